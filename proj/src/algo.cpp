#include "xlearn/algo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xlearn/env.hpp"

namespace xlearn {

namespace {

// Placeholder estimator recorded for epoch 1 (no loss estimates are made
// there): the value the epoch-1 accumulation rule yields on the uniform
// snapshot, 1/(2K) per arm.
std::vector<double> epoch1_fhat(int K) {
  return std::vector<double>(static_cast<std::size_t>(K), 1.0 / (2.0 * K));
}

// Random choices an episode consumes, in engine call order. The live source
// draws from the rng streams; the replay source feeds a recorded trace back,
// so both paths run the identical engine.
class DecisionSource {
 public:
  virtual ~DecisionSource() = default;
  virtual int context() = 0;
  virtual int action(const SimplexVector& q) = 0;
  virtual bool second_is_loss() = 0;
  virtual bool keep(double prob) = 0;
};

class RngDecisionSource final : public DecisionSource {
 public:
  RngDecisionSource(const ContextDistribution& nu, RngStreams& rngs) : nu_(nu), rngs_(rngs) {}

  int context() override { return sample_context(nu_, rngs_.context); }
  int action(const SimplexVector& q) override { return sample_categorical(q, rngs_.action); }
  bool second_is_loss() override { return draw_pair_roles(rngs_.pairing); }
  bool keep(double prob) override { return rngs_.keep.next_bernoulli(prob); }

 private:
  const ContextDistribution& nu_;
  RngStreams& rngs_;
};

class TraceDecisionSource final : public DecisionSource {
 public:
  explicit TraceDecisionSource(const Trace& trace) : trace_(trace) {}

  int context() override { return trace_.rounds[cursor_++].context; }
  int action(const SimplexVector&) override { return trace_.rounds[cursor_ - 1].arm; }
  bool second_is_loss() override { return trace_.rounds[cursor_ - 1].role == Role::kLoss; }
  bool keep(double) override {
    const RoundRecord& second = trace_.rounds[cursor_ - 1];
    const RoundRecord& loss = (second.role == Role::kLoss) ? second : trace_.rounds[cursor_ - 2];
    return loss.keep == 1;
  }

 private:
  const Trace& trace_;
  std::size_t cursor_ = 0;
};

void push_epoch_record(Trace& tr, const AlgoState& st) {
  EpochRecord rec;
  rec.e = st.epoch;
  rec.fhat = (st.epoch == 1) ? epoch1_fhat(st.K) : st.fhat;
  rec.completed = false;
  tr.epochs.push_back(std::move(rec));
}

Trace run_engine(const LossOracle& oracle, const ParamSchedule& sched, DecisionSource& src,
                 EpisodeObserver* obs) {
  const std::int64_t T = oracle.horizon();
  const int K = oracle.arms();
  const int C = oracle.contexts();
  if (T < sched.L) throw std::invalid_argument("horizon shorter than epoch length");

  AlgoState st = init_state(K, C, sched);
  Trace tr;
  tr.T = T;
  tr.K = K;
  tr.C = C;
  tr.schedule = sched;
  tr.rounds.reserve(static_cast<std::size_t>(T));
  tr.snapshots.push_back(st.snap_cur);   // s_1
  tr.snapshots.push_back(st.snap_next);  // s_2
  push_epoch_record(tr, st);
  if (obs) obs->on_epoch_start(st);

  std::vector<double> row(static_cast<std::size_t>(C));
  std::int64_t t = 1;

  // Epoch 1: play s_1, accumulate fhat_2 from every round; pair roles are
  // drawn anyway so the whole horizon carries the pairing structure.
  while (t <= sched.L) {
    if (obs) obs->on_pair_start(t, st);
    const std::size_t base = tr.rounds.size();
    for (int j = 0; j < 2; ++j) {
      const int c = src.context();
      const int A = src.action(st.snap_cur[c]);
      accumulate_freq(st, c);
      tr.rounds.push_back({t + j, c, A, Role::kLoss, false, kKeepAbsent, st.snap_cur[c][A],
                           st.snap_cur[c][A]});
      if (obs) obs->on_round(tr.rounds.back(), st, st.snap_cur[c], st.snap_cur[c]);
    }
    const bool second_loss = src.second_is_loss();
    tr.rounds[base].role = second_loss ? Role::kFreq : Role::kLoss;
    tr.rounds[base + 1].role = second_loss ? Role::kLoss : Role::kFreq;
    st.rounds_in_epoch += 2;
    if (obs) obs->on_pair_end(tr.rounds[base + (second_loss ? 0 : 1)],
                              tr.rounds[base + (second_loss ? 1 : 0)], st);
    t += 2;
  }
  {
    std::vector<SimplexVector> p_end;
    p_end.reserve(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) p_end.push_back(compute_p(st, c));
    tr.epochs.back().completed = true;
    finalize_epoch(st, std::move(p_end));
    tr.snapshots.push_back(st.snap_next);
    if (obs) obs->on_epoch_end(st);
  }

  // Epochs e >= 2, processed in pairs sharing one FTRL distribution. A
  // trailing partial epoch runs identically but is never finalized; a
  // trailing odd round plays without estimates.
  while (t <= T) {
    if (st.rounds_in_epoch == 0) {
      push_epoch_record(tr, st);
      if (obs) obs->on_epoch_start(st);
    }
    if (t + 1 > T) {
      const int c = src.context();
      const SimplexVector p = compute_p(st, c);
      auto [q, fb] = reject_or_fallback(p, st.snap_cur[c]);
      const int A = src.action(q);
      tr.rounds.push_back({t, c, A, Role::kSingle, fb, kKeepAbsent, p[A], q[A]});
      if (obs) obs->on_round(tr.rounds.back(), st, p, q);
      st.rounds_in_epoch += 1;
      t += 1;
      break;
    }
    if (obs) obs->on_pair_start(t, st);
    const bool last_pair_of_epoch = ((t + 1) % sched.L) == 0;
    std::vector<SimplexVector> p_end;
    if (last_pair_of_epoch) {
      // The epoch's snapshot is the distribution of this final FTRL update,
      // taken before the pair's own estimate lands.
      p_end.reserve(static_cast<std::size_t>(C));
      for (int c = 0; c < C; ++c) p_end.push_back(compute_p(st, c));
    }

    int ctx[2];
    int arm[2];
    SimplexVector qs[2] = {SimplexVector::uniform(K), SimplexVector::uniform(K)};
    const std::size_t base = tr.rounds.size();
    for (int j = 0; j < 2; ++j) {
      const int c = src.context();
      const SimplexVector p = last_pair_of_epoch ? p_end[static_cast<std::size_t>(c)]
                                                 : compute_p(st, c);
      auto [q, fb] = reject_or_fallback(p, st.snap_cur[c]);
      const int A = src.action(q);
      ctx[j] = c;
      arm[j] = A;
      qs[j] = q;
      tr.rounds.push_back({t + j, c, A, Role::kLoss, fb, kKeepAbsent, p[A], q[A]});
      if (obs) obs->on_round(tr.rounds.back(), st, p, q);
    }
    const bool second_loss = src.second_is_loss();
    tr.rounds[base].role = second_loss ? Role::kFreq : Role::kLoss;
    tr.rounds[base + 1].role = second_loss ? Role::kLoss : Role::kFreq;
    const int jl = second_loss ? 1 : 0;
    const int jf = 1 - jl;
    accumulate_freq(st, ctx[jf]);
    const double kp = keep_probability(st.snap_cur[ctx[jl]], qs[jl], arm[jl]);
    const bool S = src.keep(kp);
    tr.rounds[base + static_cast<std::size_t>(jl)].keep = S ? 1 : 0;
    oracle.loss_row(t + jl, arm[jl], row);
    make_loss_estimate(st, row, arm[jl], S);
    st.rounds_in_epoch += 2;
    if (obs) obs->on_pair_end(tr.rounds[base + static_cast<std::size_t>(jf)],
                              tr.rounds[base + static_cast<std::size_t>(jl)], st);
    t += 2;

    if (last_pair_of_epoch) {
      tr.epochs.back().completed = true;
      finalize_epoch(st, std::move(p_end));
      tr.snapshots.push_back(st.snap_next);
      if (obs) obs->on_epoch_end(st);
    }
  }
  return tr;
}

}  // namespace

AlgoState init_state(int K, int C, const ParamSchedule& sched) {
  if (K < 2 || C < 1) throw std::invalid_argument("bad dimensions");
  if (sched.L < 2 || sched.L % 2 != 0) throw std::invalid_argument("epoch length must be even");
  AlgoState st;
  st.K = K;
  st.C = C;
  st.sched = sched;
  st.epoch = 1;
  st.rounds_in_epoch = 0;
  st.snap_cur.assign(static_cast<std::size_t>(C), SimplexVector::uniform(K));
  st.snap_next.assign(static_cast<std::size_t>(C), SimplexVector::uniform(K));
  st.fhat.assign(static_cast<std::size_t>(K), 0.0);
  st.fhat_accum.assign(static_cast<std::size_t>(K), 0.0);
  st.cumloss.assign(static_cast<std::size_t>(C), std::vector<double>(static_cast<std::size_t>(K), 0.0));
  return st;
}

SimplexVector compute_p(const AlgoState& state, int c) {
  return softmax_weights(state.cumloss[static_cast<std::size_t>(c)], state.sched.eta);
}

std::pair<SimplexVector, bool> reject_or_fallback(const SimplexVector& p,
                                                  const SimplexVector& s_e_c) {
  for (int a = 0; a < p.size(); ++a) {
    if (!(p[a] >= s_e_c[a] / 2.0)) return {s_e_c, true};
  }
  return {p, false};
}

double keep_probability(const SimplexVector& s_e_c, const SimplexVector& q, int arm) {
  if (!(q[arm] > 0.0)) throw std::invalid_argument("played arm has zero probability");
  return s_e_c[arm] / (2.0 * q[arm]);
}

bool draw_pair_roles(SplitMix64& pairing) { return !pairing.next_bit(); }

void accumulate_freq(AlgoState& state, int c_at_tf) {
  const SimplexVector& snap = state.snap_next[static_cast<std::size_t>(c_at_tf)];
  const double divisor = (state.epoch == 1) ? 2.0 * static_cast<double>(state.sched.L)
                                            : 2.0 * static_cast<double>(state.sched.L / 2);
  for (int a = 0; a < state.K; ++a)
    state.fhat_accum[static_cast<std::size_t>(a)] += snap[a] / divisor;
}

double make_loss_estimate(AlgoState& state, std::span<const double> loss_row, int arm,
                          bool keep) {
  if (!keep) return 0.0;
  const double coeff = 2.0 / (state.fhat[static_cast<std::size_t>(arm)] + 1.5 * state.sched.gamma);
  for (int c = 0; c < state.C; ++c)
    state.cumloss[static_cast<std::size_t>(c)][static_cast<std::size_t>(arm)] +=
        coeff * loss_row[static_cast<std::size_t>(c)];
  return coeff;
}

void finalize_epoch(AlgoState& state, std::vector<SimplexVector> p_at_end) {
  if (state.rounds_in_epoch != state.sched.L)
    throw std::logic_error("finalize_epoch called mid-epoch");
  if (static_cast<int>(p_at_end.size()) != state.C)
    throw std::invalid_argument("need one distribution per context");
  state.snap_cur = std::move(state.snap_next);
  state.snap_next = std::move(p_at_end);
  state.fhat = state.fhat_accum;
  std::fill(state.fhat_accum.begin(), state.fhat_accum.end(), 0.0);
  state.epoch += 1;
  state.rounds_in_epoch = 0;
  // Re-center so cumulative estimates stay small; softmax shift invariance
  // keeps the distributions unchanged.
  for (auto& v : state.cumloss) {
    const double m = *std::min_element(v.begin(), v.end());
    for (double& x : v) x -= m;
  }
}

Trace run_episode(const LossOracle& oracle, const ContextDistribution& nu,
                  const ParamSchedule& sched, RngStreams& rngs, EpisodeObserver* observer) {
  if (nu.size() != oracle.contexts()) throw std::invalid_argument("nu dimension mismatch");
  RngDecisionSource src(nu, rngs);
  return run_engine(oracle, sched, src, observer);
}

void replay_episode(const Trace& trace, const LossOracle& oracle, EpisodeObserver* observer) {
  if (!trace.schedule) throw std::invalid_argument("trace has no schedule to replay");
  TraceDecisionSource src(trace);
  Trace again = run_engine(oracle, *trace.schedule, src, observer);
  if (again.rounds.size() != trace.rounds.size() ||
      again.snapshots.size() != trace.snapshots.size() || again.epochs.size() != trace.epochs.size())
    throw std::invalid_argument("trace replay mismatch (shape)");
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const RoundRecord& a = trace.rounds[i];
    const RoundRecord& b = again.rounds[i];
    if (a.t != b.t || a.context != b.context || a.arm != b.arm || a.role != b.role ||
        a.used_fallback != b.used_fallback || a.keep != b.keep || a.p_played != b.p_played ||
        a.q_played != b.q_played)
      throw std::invalid_argument("trace replay mismatch (round)");
  }
  for (std::size_t i = 0; i < trace.snapshots.size(); ++i)
    if (trace.snapshots[i] != again.snapshots[i])
      throw std::invalid_argument("trace replay mismatch (snapshot)");
  for (std::size_t i = 0; i < trace.epochs.size(); ++i)
    if (trace.epochs[i].fhat != again.epochs[i].fhat ||
        trace.epochs[i].completed != again.epochs[i].completed)
      throw std::invalid_argument("trace replay mismatch (epoch)");
}

}  // namespace xlearn
