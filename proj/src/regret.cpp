#include "xlearn/regret.hpp"

#include <limits>
#include <stdexcept>

namespace xlearn {

double realized_regret(const Trace& trace, const LossOracle& oracle, const Policy& pi) {
  if (trace.T != oracle.horizon() || trace.C != oracle.contexts() || trace.K != oracle.arms())
    throw std::invalid_argument("trace/oracle dimension mismatch");
  if (pi.contexts() != trace.C) throw std::invalid_argument("policy dimension mismatch");
  if (static_cast<std::int64_t>(trace.rounds.size()) != trace.T)
    throw std::invalid_argument("trace does not cover the horizon");
  for (int c = 0; c < pi.contexts(); ++c)
    if (pi[c] < 0 || pi[c] >= trace.K) throw std::invalid_argument("policy arm out of range");

  double total = 0.0;
  for (const RoundRecord& r : trace.rounds) {
    if (r.context < 0 || r.context >= trace.C || r.arm < 0 || r.arm >= trace.K)
      throw std::invalid_argument("trace round out of range");
    total += oracle.loss(r.t, r.context, r.arm) - oracle.loss(r.t, r.context, pi[r.context]);
  }
  return total;
}

Policy best_fixed_policy(const LossOracle& oracle, std::span<const int> realized_contexts) {
  const int C = oracle.contexts();
  const int K = oracle.arms();
  std::vector<double> totals(static_cast<std::size_t>(C) * K, 0.0);
  for (std::size_t i = 0; i < realized_contexts.size(); ++i) {
    const int c = realized_contexts[i];
    if (c < 0 || c >= C) throw std::invalid_argument("context out of range");
    const std::int64_t t = static_cast<std::int64_t>(i) + 1;
    for (int a = 0; a < K; ++a)
      totals[static_cast<std::size_t>(c) * K + a] += oracle.loss(t, c, a);
  }
  Policy pi;
  pi.arm_for_context.resize(static_cast<std::size_t>(C), 0);
  for (int c = 0; c < C; ++c) {
    int best = 0;
    double best_total = totals[static_cast<std::size_t>(c) * K];
    for (int a = 1; a < K; ++a) {
      const double v = totals[static_cast<std::size_t>(c) * K + a];
      if (v < best_total) {  // strict: ties stay with the smaller arm index
        best_total = v;
        best = a;
      }
    }
    pi.arm_for_context[static_cast<std::size_t>(c)] = best;
  }
  return pi;
}

}  // namespace xlearn
