#include "xlearn/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "xlearn/env.hpp"

namespace xlearn {

namespace {

Trace make_baseline_trace(const LossOracle& oracle) {
  Trace tr;
  tr.T = oracle.horizon();
  tr.K = oracle.arms();
  tr.C = oracle.contexts();
  tr.rounds.reserve(static_cast<std::size_t>(tr.T));
  return tr;
}

void push_round(Trace& tr, std::int64_t t, int c, int a, double prob) {
  tr.rounds.push_back({t, c, a, Role::kSingle, false, kKeepAbsent, prob, prob});
}

Trace run_uniform(const LossOracle& oracle, const ContextDistribution& nu, RngStreams& rngs) {
  Trace tr = make_baseline_trace(oracle);
  const SimplexVector u = SimplexVector::uniform(tr.K);
  for (std::int64_t t = 1; t <= tr.T; ++t) {
    const int c = sample_context(nu, rngs.context);
    const int a = sample_categorical(u, rngs.action);
    push_round(tr, t, c, a, u[a]);
  }
  return tr;
}

// C independent EXP3-IX learners; a round touches exactly one of them.
Trace run_per_context_exp3ix(const LossOracle& oracle, const ContextDistribution& nu,
                             RngStreams& rngs) {
  Trace tr = make_baseline_trace(oracle);
  const double per_context_horizon = static_cast<double>(tr.T) / tr.C;
  const double lr = std::sqrt(2.0 * std::log(tr.K) / (tr.K * per_context_horizon));
  const double gamma_ix = lr / 2.0;
  std::vector<std::vector<double>> cumloss(
      static_cast<std::size_t>(tr.C), std::vector<double>(static_cast<std::size_t>(tr.K), 0.0));
  for (std::int64_t t = 1; t <= tr.T; ++t) {
    const int c = sample_context(nu, rngs.context);
    const SimplexVector p = softmax_weights(cumloss[static_cast<std::size_t>(c)], lr);
    const int a = sample_categorical(p, rngs.action);
    cumloss[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] +=
        oracle.loss(t, c, a) / (p[a] + gamma_ix);
    push_round(tr, t, c, a, p[a]);
  }
  return tr;
}

// Single multiplicative-weights learner with the exact-nu importance
// E_c[p_{t,c}(a_t)] plus an implicit-exploration offset; every round updates
// every context from the cross-learning loss row.
Trace run_known_nu_cross(const LossOracle& oracle, const ContextDistribution& nu,
                         RngStreams& rngs) {
  Trace tr = make_baseline_trace(oracle);
  const double lr = std::sqrt(2.0 * std::log(tr.K) / (tr.K * static_cast<double>(tr.T)));
  const double gamma_ix = lr / 2.0;
  std::vector<std::vector<double>> cumloss(
      static_cast<std::size_t>(tr.C), std::vector<double>(static_cast<std::size_t>(tr.K), 0.0));
  std::vector<SimplexVector> p;
  p.reserve(static_cast<std::size_t>(tr.C));
  std::vector<double> row(static_cast<std::size_t>(tr.C));
  for (std::int64_t t = 1; t <= tr.T; ++t) {
    p.clear();
    for (int c = 0; c < tr.C; ++c)
      p.push_back(softmax_weights(cumloss[static_cast<std::size_t>(c)], lr));
    const int c_t = sample_context(nu, rngs.context);
    const int a = sample_categorical(p[static_cast<std::size_t>(c_t)], rngs.action);
    double importance = 0.0;
    for (int c = 0; c < tr.C; ++c) importance += nu[c] * p[static_cast<std::size_t>(c)][a];
    oracle.loss_row(t, a, row);
    for (int c = 0; c < tr.C; ++c)
      cumloss[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] +=
          row[static_cast<std::size_t>(c)] / (importance + gamma_ix);
    push_round(tr, t, c_t, a, p[static_cast<std::size_t>(c_t)][a]);
  }
  return tr;
}

}  // namespace

BaselineKind parse_baseline_kind(const std::string& name) {
  if (name == "per_context_exp3ix") return BaselineKind::kPerContextExp3Ix;
  if (name == "known_nu_cross") return BaselineKind::kKnownNuCross;
  if (name == "uniform") return BaselineKind::kUniform;
  throw std::invalid_argument("unknown baseline kind: " + name);
}

std::string baseline_kind_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kPerContextExp3Ix: return "per_context_exp3ix";
    case BaselineKind::kKnownNuCross: return "known_nu_cross";
    case BaselineKind::kUniform: return "uniform";
  }
  return "?";
}

Trace run_baseline(BaselineKind kind, const LossOracle& oracle, const ContextDistribution& nu,
                   RngStreams& rngs) {
  if (nu.size() != oracle.contexts()) throw std::invalid_argument("nu dimension mismatch");
  switch (kind) {
    case BaselineKind::kUniform: return run_uniform(oracle, nu, rngs);
    case BaselineKind::kPerContextExp3Ix: return run_per_context_exp3ix(oracle, nu, rngs);
    case BaselineKind::kKnownNuCross: return run_known_nu_cross(oracle, nu, rngs);
  }
  throw std::invalid_argument("unknown baseline kind");
}

}  // namespace xlearn
