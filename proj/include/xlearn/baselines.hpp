#pragma once

#include <cstdint>
#include <string>

#include "xlearn/loss_oracle.hpp"
#include "xlearn/rng.hpp"
#include "xlearn/simplex.hpp"
#include "xlearn/types.hpp"

namespace xlearn {

enum class BaselineKind { kPerContextExp3Ix, kKnownNuCross, kUniform };

BaselineKind parse_baseline_kind(const std::string& name);
std::string baseline_kind_name(BaselineKind kind);

// Comparison learners sharing the episode interface.
//
// kUniform plays uniformly at random. kPerContextExp3Ix keeps C independent
// EXP3-IX learners (learning rate sqrt(2 ln K / (K T / C)), implicit
// exploration of half the learning rate), each updated only on its own
// context's rounds. kKnownNuCross is a single multiplicative-weights learner
// fed cross-learning feedback with the exact-nu importance
// E_c[p_{t,c}(a_t)] in the denominator, plus the same style of implicit
// exploration offset; it updates every context every round.
Trace run_baseline(BaselineKind kind, const LossOracle& oracle, const ContextDistribution& nu,
                   RngStreams& rngs);

}  // namespace xlearn
