#pragma once

#include <cstdint>
#include <span>

#include "xlearn/loss_oracle.hpp"
#include "xlearn/types.hpp"

namespace xlearn {

// Reg(pi) = sum_t l_{t,c_t}(a_t) - l_{t,c_t}(pi(c_t)), exactly as realized.
// Throws std::invalid_argument on trace/oracle/policy dimension mismatch.
double realized_regret(const Trace& trace, const LossOracle& oracle, const Policy& pi);

// Hindsight-optimal fixed policy: per context c, the arm minimizing the total
// loss over rounds where c was realized; ties break toward the smaller index.
Policy best_fixed_policy(const LossOracle& oracle, std::span<const int> realized_contexts);

}  // namespace xlearn
