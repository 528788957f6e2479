#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xlearn/loss_oracle.hpp"
#include "xlearn/schedule.hpp"
#include "xlearn/simplex.hpp"
#include "xlearn/types.hpp"

namespace xlearn {

// Proof-side quantities computed from a trace plus simulator-known ground
// truth (nu, snapshots). The learner never reads anything in this module.

// f_e(a) = sum_c nu(c) s_{e,c}(a) / 2; sums to 1/2 over arms.
std::vector<double> true_importance(std::span<const SimplexVector> snapshot,
                                    const ContextDistribution& nu);

// Ground-truth analogue of the loss estimate: coefficient 2 / (f_e(A) + gamma)
// applied to the loss row when the round fired (loss role, arm A, S_t = 1).
// Returns 0 when fired is false.
double tilde_coefficient(double f_at_arm, double gamma, bool fired);

// Auxiliary distribution: softmax of the within-epoch tilde-estimate history
// on top of the epoch's base snapshot s_{e+1,c}.
SimplexVector tilde_p(const SimplexVector& start_of_epoch_base,
                      std::span<const double> tilde_history, double eta);

// 1/2 <= (f_e(a) + gamma) / (fhat_e(a) + 3 gamma / 2) <= 2 for every arm.
bool ratio_check(std::span<const double> f_e, std::span<const double> fhat_e, double gamma);

struct EpochEvents {
  std::int64_t e = 0;
  bool completed = false;
  bool F = false;             // estimator concentration event
  bool L = false;             // within-epoch tilde-estimate growth event
  std::int64_t fallbacks = 0; // rejection fallbacks among the epoch's rounds
  double max_ratio = 0.0;     // max_a (f_e(a)+gamma)/(fhat_e(a)+1.5 gamma)
  double min_ratio = 0.0;
  std::int64_t j_violations = 0;   // loss rounds with some E_c[ptilde_{t,c}(a)] > 4 f_e(a)
  std::int64_t l_violations = 0;   // loss rounds with some E_c[p_{t,c}(a)] > 4 f_e(a)
  double max_tilde_sum = 0.0;      // max_{c,a} sum_{t in epoch} tilde-estimate
};

// Event booleans for one epoch, given the epoch's fhat, its true importance,
// and the maximum within-epoch tilde-estimate sum:
//   F  iff  |fhat(a) - f(a)| <= 2 max{sqrt(f(a) iota / L), iota / L} for all a
//   L  iff  max_{c,a} tilde-sum <= L + iota / gamma
void indicator_events(EpochEvents& ev, std::span<const double> f_e,
                      std::span<const double> fhat_e, double max_tilde_sum,
                      const ParamSchedule& sched);

// Exact six-term split of the realized regret. The terms are accumulated with
// compensated summation; their sum reproduces Reg(pi) up to float error
// (asserted at 1e-6 * T by the callers that care).
struct DecompositionLedger {
  double bias1 = 0.0;
  double bias2 = 0.0;
  double ftrl = 0.0;
  double bias3 = 0.0;
  double bias4 = 0.0;
  double bias5 = 0.0;
  double regret = 0.0;  // directly computed Reg(pi)

  double sum() const { return bias1 + bias2 + ftrl + bias3 + bias4 + bias5; }
};

// Everything the replay produces in one pass.
struct ReplayReport {
  DecompositionLedger ledger;
  std::vector<EpochEvents> epochs;
  bool G = false;              // conjunction of F_e and L_e over all epochs run
  double pairing_gap = 0.0;    // full-horizon regret minus twice the loss-role regret
  double linearized = 0.0;     // 2 sum_{T_l} sum_c nu(c) <p - pi, l>, for the telescoping check

  // Structural band counters over all replayed (t, c, a):
  std::int64_t p_band_violations = 0;      // p_{t,c}(a) outside [s_e/2, 2 s_e]
  std::int64_t ptilde_band_violations = 0; // ptilde_{t,c}(a) outside [s_e/2, 2 s_e]
  std::int64_t fallbacks_after_epoch1 = 0;
  double max_cumloss_increment = 0.0;      // largest single loss-estimate increment
};

// Replays a learner trace against the oracle and ground truth, reconstructing
// p, the loss estimates, their true-importance analogues and the auxiliary
// distributions, and returns the decomposition plus the event machinery.
// Epoch-1 rounds contribute with zero estimates and uniform p, so the
// decomposition identity is exact over the whole horizon.
ReplayReport replay_diagnostics(const Trace& trace, const LossOracle& oracle,
                                const ContextDistribution& nu, const Policy& pi);

// The six-term split alone.
DecompositionLedger decomposition(const Trace& trace, const LossOracle& oracle,
                                  const ContextDistribution& nu, const Policy& pi);

// sum_{t=1}^T (l_t(a_t) - l_t(pi)) - 2 sum_{t in T_l} (l_t(a_t) - l_t(pi)).
// Needs only the role labels, not the ground truth.
double pairing_gap(const Trace& trace, const LossOracle& oracle, const Policy& pi);

}  // namespace xlearn
