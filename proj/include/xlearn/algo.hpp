#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xlearn/loss_oracle.hpp"
#include "xlearn/rng.hpp"
#include "xlearn/schedule.hpp"
#include "xlearn/simplex.hpp"
#include "xlearn/types.hpp"

namespace xlearn {

// Mutable state of the epoch-structured cross-learning learner. During epoch e
// it holds the rejection snapshot s_e (snap_cur), the snapshot s_{e+1} feeding
// the frequency accumulator (snap_next), the estimator fhat used by the loss
// estimates, and per-context cumulative loss-estimate vectors. One state per
// episode, single writer.
struct AlgoState {
  int K = 0;
  int C = 0;
  ParamSchedule sched;

  std::int64_t epoch = 0;                 // e, 1-based
  std::int64_t rounds_in_epoch = 0;       // rounds processed inside the current epoch
  std::vector<SimplexVector> snap_cur;    // s_e, one per context
  std::vector<SimplexVector> snap_next;   // s_{e+1}
  std::vector<double> fhat;               // \hat f_e
  std::vector<double> fhat_accum;         // running accumulator for \hat f_{e+1}
  std::vector<std::vector<double>> cumloss;  // per context, sum of loss estimates
};

// e = 1, s_1 = s_2 = uniform, accumulators and cumulative estimates zero.
AlgoState init_state(int K, int C, const ParamSchedule& sched);

// FTRL distribution for context c: softmax_weights(cumloss[c], eta).
SimplexVector compute_p(const AlgoState& state, int c);

// q = p iff p(a) >= s_e(a)/2 for every arm (exact floating >=); otherwise the
// snapshot itself, with the fallback flag set.
std::pair<SimplexVector, bool> reject_or_fallback(const SimplexVector& p,
                                                  const SimplexVector& s_e_c);

// s_e(A) / (2 q(A)); in (0,1] whenever q came from reject_or_fallback and the
// snapshot is strictly positive. Throws std::invalid_argument if q(A) <= 0.
double keep_probability(const SimplexVector& s_e_c, const SimplexVector& q, int arm);

// One pairing-stream draw deciding the pair's role order. Returns true when
// the pair's second round takes the loss role, i.e. bit 0 means
// (t_f, t_l) = (t, t+1).
bool draw_pair_roles(SplitMix64& pairing);

// Adds the snapshot row for the freq-role context into the accumulator:
// s_{e+1,c}(.) / (2 (L/2)) per pair in epochs e >= 2, s_{2,c}(.) / (2L) per
// round in epoch 1 (every epoch-1 round contributes).
void accumulate_freq(AlgoState& state, int c_at_tf);

// Applies the loss estimate of a loss-role round: when keep is set, every
// context's cumulative vector gains 2*loss_row[c] / (fhat(A) + 3*gamma/2) at
// arm A. Returns the common coefficient 2 / (fhat(A) + 3*gamma/2), or 0 when
// keep is false.
double make_loss_estimate(AlgoState& state, std::span<const double> loss_row, int arm,
                          bool keep);

// Epoch boundary: s_{e+2} := the distribution of the epoch's final FTRL
// update (bit-exact copy), the frequency accumulator becomes fhat of the next
// epoch, the snapshot window shifts, e advances, and each context's
// cumulative vector is re-centered by its minimum (exact up to the softmax
// shift invariance). Throws std::logic_error if called mid-epoch.
void finalize_epoch(AlgoState& state, std::vector<SimplexVector> p_at_end);

// Hooks into the episode engine; the replay-based diagnostics ride on these.
// Callbacks fire in execution order: epoch_start at the first round of every
// epoch (the partial trailing epoch included), pair_start once per pair after
// the boundary snapshot (if any) is taken, round for every round, pair_end
// after roles are drawn and the estimate applied, epoch_end right after
// finalize_epoch.
class EpisodeObserver {
 public:
  virtual ~EpisodeObserver() = default;
  virtual void on_epoch_start(const AlgoState& /*state*/) {}
  virtual void on_pair_start(std::int64_t /*t*/, const AlgoState& /*state*/) {}
  virtual void on_round(const RoundRecord& /*rec*/, const AlgoState& /*state*/,
                        const SimplexVector& /*p*/, const SimplexVector& /*q*/) {}
  virtual void on_pair_end(const RoundRecord& /*freq_rec*/, const RoundRecord& /*loss_rec*/,
                           const AlgoState& /*state*/) {}
  virtual void on_epoch_end(const AlgoState& /*state*/) {}
};

// Runs one full episode of the cross-learning learner.
//
// Epoch 1 plays s_1 and accumulates fhat_2 every round. Epochs e >= 2 process
// rounds in consecutive pairs sharing one FTRL distribution (computed at the
// pair's first round), apply rejection sampling per realized context, play
// A ~ q, then draw the pair's role order, accumulate the frequency estimate
// with the freq-role context, draw S_t for the loss-role round, and apply the
// loss estimate. Epoch boundaries finalize; a trailing partial epoch is
// processed identically but never finalized; a trailing odd round is played
// without producing estimates. Role labels are drawn for epoch-1 pairs too
// (instrumentation only; no estimates are made there).
Trace run_episode(const LossOracle& oracle, const ContextDistribution& nu,
                  const ParamSchedule& sched, RngStreams& rngs,
                  EpisodeObserver* observer = nullptr);

// Replays a recorded episode through the same engine, firing the observer
// with identical state evolution. Throws std::invalid_argument if the trace
// disagrees with what the engine would have recorded (bit-exact comparison of
// the played probabilities).
void replay_episode(const Trace& trace, const LossOracle& oracle, EpisodeObserver* observer);

}  // namespace xlearn
