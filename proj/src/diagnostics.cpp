#include "xlearn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "xlearn/algo.hpp"

namespace xlearn {

namespace {

struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// Replays a learner trace and accumulates the regret split, the indicator
// events, and the structural counters in one pass. All ground truth (nu, f_e,
// the tilde quantities) lives here; the engine state it observes is the
// learner's own.
class DiagObserver final : public EpisodeObserver {
 public:
  DiagObserver(const LossOracle& oracle, const ContextDistribution& nu, const Policy& pi)
      : oracle_(oracle), nu_(nu), pi_(pi), C_(oracle.contexts()), K_(oracle.arms()) {
    loss_matrix_.assign(static_cast<std::size_t>(C_) * K_, 0.0);
  }

  void on_epoch_start(const AlgoState& st) override {
    epoch_ = st.epoch;
    eta_ = st.sched.eta;
    gamma_ = st.sched.gamma;
    sched_ = st.sched;
    snap_e_ = st.snap_cur;
    snap_next_ = st.snap_next;
    fhat_ = (st.epoch == 1) ? std::vector<double>(static_cast<std::size_t>(K_), 1.0 / (2.0 * K_))
                            : st.fhat;
    f_e_ = true_importance(snap_e_, nu_);
    cumtilde_.assign(static_cast<std::size_t>(C_),
                     std::vector<double>(static_cast<std::size_t>(K_), 0.0));
    epoch_fallbacks_ = 0;
    epoch_j_viol_ = 0;
    epoch_l_viol_ = 0;
    epoch_rounds_ = 0;
    epoch_open_ = true;
  }

  void on_pair_start(std::int64_t, const AlgoState& st) override {
    pair_p_.clear();
    for (int c = 0; c < C_; ++c) pair_p_.push_back(compute_p(st, c));
    if (epoch_ >= 2) check_p_band(pair_p_);
  }

  void on_round(const RoundRecord& rec, const AlgoState& st, const SimplexVector&,
                const SimplexVector&) override {
    regret_all_.add(oracle_.loss(rec.t, rec.context, rec.arm) -
                    oracle_.loss(rec.t, rec.context, pi_[rec.context]));
    if (rec.used_fallback) {
      ++epoch_fallbacks_;
      if (epoch_ >= 2) ++report_.fallbacks_after_epoch1;
    }
    ++epoch_rounds_;
    if (rec.role == Role::kSingle && epoch_ >= 2) {
      // Unpaired tail round: the band checks still apply to its p.
      std::vector<SimplexVector> p;
      p.reserve(static_cast<std::size_t>(C_));
      for (int c = 0; c < C_; ++c) p.push_back(compute_p(st, c));
      check_p_band(p);
      std::vector<SimplexVector> pt = compute_ptilde();
      check_ptilde_band(pt);
    }
  }

  void on_pair_end(const RoundRecord& freq_rec, const RoundRecord& loss_rec,
                   const AlgoState&) override {
    const bool first_is_loss = loss_rec.t < freq_rec.t;
    if (epoch_ == 1) {
      // Estimates are identically zero in epoch 1; only the regret split's
      // realized and linearized parts accumulate. The band and indicator
      // checks hold exactly (p and ptilde are the uniform snapshots).
      process_loss_round(loss_rec, /*fired=*/false);
      return;
    }
    std::vector<SimplexVector> pt = compute_ptilde();
    check_ptilde_band(pt);  // first round of the pair
    if (first_is_loss) {
      check_jl(pt, loss_rec);
      const bool fired = loss_rec.keep == 1;
      process_loss_round(loss_rec, fired);
      if (fired) {
        apply_tilde_update(loss_rec);
        pt = compute_ptilde();
      }
      check_ptilde_band(pt);  // second (freq) round
    } else {
      check_ptilde_band(pt);  // second (loss) round: history unchanged so far
      check_jl(pt, loss_rec);
      const bool fired = loss_rec.keep == 1;
      process_loss_round(loss_rec, fired);
      if (fired) apply_tilde_update(loss_rec);
    }
  }

  void on_epoch_end(const AlgoState&) override { flush_epoch(/*completed=*/true); }

  ReplayReport finish() {
    if (epoch_open_ && epoch_rounds_ > 0) flush_epoch(/*completed=*/false);
    report_.ledger.bias1 = regret_all_.sum - 2.0 * regret_tl_.sum;
    report_.ledger.bias2 = bias2_.sum;
    report_.ledger.ftrl = ftrl_.sum;
    report_.ledger.bias3 = bias3_.sum;
    report_.ledger.bias4 = bias4_.sum;
    report_.ledger.bias5 = bias5_.sum;
    report_.ledger.regret = regret_all_.sum;
    report_.pairing_gap = report_.ledger.bias1;
    report_.linearized = linearized_.sum;
    report_.G = true;
    for (const EpochEvents& ev : report_.epochs) report_.G = report_.G && ev.F && ev.L;
    return std::move(report_);
  }

 private:
  std::vector<SimplexVector> compute_ptilde() const {
    std::vector<SimplexVector> pt;
    pt.reserve(static_cast<std::size_t>(C_));
    for (int c = 0; c < C_; ++c)
      pt.push_back(tilde_p(snap_next_[static_cast<std::size_t>(c)],
                           cumtilde_[static_cast<std::size_t>(c)], eta_));
    return pt;
  }

  void check_p_band(const std::vector<SimplexVector>& p) {
    for (int c = 0; c < C_; ++c) {
      const SimplexVector& s = snap_e_[static_cast<std::size_t>(c)];
      for (int a = 0; a < K_; ++a)
        if (!(p[static_cast<std::size_t>(c)][a] >= s[a] / 2.0 &&
              p[static_cast<std::size_t>(c)][a] <= 2.0 * s[a]))
          ++report_.p_band_violations;
    }
  }

  void check_ptilde_band(const std::vector<SimplexVector>& pt) {
    for (int c = 0; c < C_; ++c) {
      const SimplexVector& s = snap_e_[static_cast<std::size_t>(c)];
      for (int a = 0; a < K_; ++a)
        if (!(pt[static_cast<std::size_t>(c)][a] >= s[a] / 2.0 &&
              pt[static_cast<std::size_t>(c)][a] <= 2.0 * s[a]))
          ++report_.ptilde_band_violations;
    }
  }

  // J_t and L_t, checked at loss-role rounds only.
  void check_jl(const std::vector<SimplexVector>& pt, const RoundRecord&) {
    bool j_bad = false;
    bool l_bad = false;
    for (int a = 0; a < K_ && !(j_bad && l_bad); ++a) {
      double pt_mean = 0.0;
      double p_mean = 0.0;
      for (int c = 0; c < C_; ++c) {
        pt_mean += nu_[c] * pt[static_cast<std::size_t>(c)][a];
        p_mean += nu_[c] * pair_p_[static_cast<std::size_t>(c)][a];
      }
      const double cap = 4.0 * f_e_[static_cast<std::size_t>(a)];
      if (pt_mean > cap) j_bad = true;
      if (p_mean > cap) l_bad = true;
    }
    if (j_bad) ++epoch_j_viol_;
    if (l_bad) ++epoch_l_viol_;
  }

  void process_loss_round(const RoundRecord& rec, bool fired) {
    const std::int64_t t = rec.t;
    const int A = rec.arm;
    for (int c = 0; c < C_; ++c)
      for (int a = 0; a < K_; ++a)
        loss_matrix_[static_cast<std::size_t>(c) * K_ + a] = oracle_.loss(t, c, a);
    const auto lossat = [&](int c, int a) {
      return loss_matrix_[static_cast<std::size_t>(c) * K_ + a];
    };

    const double delta = lossat(rec.context, A) - lossat(rec.context, pi_[rec.context]);
    regret_tl_.add(delta);

    const double coeff_hat =
        fired ? 2.0 / (fhat_[static_cast<std::size_t>(A)] + 1.5 * gamma_) : 0.0;
    const double coeff_tilde = tilde_coefficient(f_e_[static_cast<std::size_t>(A)], gamma_, fired);
    if (fired && coeff_hat > report_.max_cumloss_increment)
      report_.max_cumloss_increment = coeff_hat;

    double lin = 0.0;
    for (int c = 0; c < C_; ++c) {
      const SimplexVector& p = pair_p_[static_cast<std::size_t>(c)];
      const int pic = pi_[c];
      double pdotl = 0.0;
      for (int a = 0; a < K_; ++a) pdotl += p[a] * lossat(c, a);
      lin += nu_[c] * (pdotl - lossat(c, pic));

      const double vh = coeff_hat * lossat(c, A);    // loss-estimate value at arm A
      const double vt = coeff_tilde * lossat(c, A);  // ground-truth analogue
      const double pA = p[A];
      const double hat_at_pi = (pic == A) ? vh : 0.0;
      ftrl_.add(2.0 * nu_[c] * (pA * vh - hat_at_pi));
      bias3_.add(2.0 * nu_[c] * (pdotl - pA * vt));
      bias4_.add(2.0 * nu_[c] * pA * (vt - vh));
      bias5_.add(2.0 * nu_[c] * (hat_at_pi - lossat(c, pic)));
    }
    bias2_.add(2.0 * (delta - lin));
    linearized_.add(2.0 * lin);
  }

  void apply_tilde_update(const RoundRecord& rec) {
    const int A = rec.arm;
    const double coeff = tilde_coefficient(f_e_[static_cast<std::size_t>(A)], gamma_, true);
    for (int c = 0; c < C_; ++c)
      cumtilde_[static_cast<std::size_t>(c)][static_cast<std::size_t>(A)] +=
          coeff * loss_matrix_[static_cast<std::size_t>(c) * K_ + A];
  }

  void flush_epoch(bool completed) {
    EpochEvents ev;
    ev.e = epoch_;
    ev.completed = completed;
    ev.fallbacks = epoch_fallbacks_;
    ev.j_violations = epoch_j_viol_;
    ev.l_violations = epoch_l_viol_;
    double max_sum = 0.0;
    for (const auto& v : cumtilde_)
      for (double x : v) max_sum = std::max(max_sum, x);
    indicator_events(ev, f_e_, fhat_, max_sum, sched_);
    report_.epochs.push_back(ev);
    epoch_open_ = false;
  }

  const LossOracle& oracle_;
  const ContextDistribution& nu_;
  const Policy& pi_;
  const int C_;
  const int K_;

  // Current-epoch ground truth and caches.
  std::int64_t epoch_ = 0;
  double eta_ = 0.0;
  double gamma_ = 0.0;
  ParamSchedule sched_;
  std::vector<SimplexVector> snap_e_;
  std::vector<SimplexVector> snap_next_;
  std::vector<double> fhat_;
  std::vector<double> f_e_;
  std::vector<std::vector<double>> cumtilde_;
  std::vector<SimplexVector> pair_p_;
  std::vector<double> loss_matrix_;
  std::int64_t epoch_fallbacks_ = 0;
  std::int64_t epoch_j_viol_ = 0;
  std::int64_t epoch_l_viol_ = 0;
  std::int64_t epoch_rounds_ = 0;
  bool epoch_open_ = false;

  KahanSum regret_all_;
  KahanSum regret_tl_;
  KahanSum bias2_;
  KahanSum ftrl_;
  KahanSum bias3_;
  KahanSum bias4_;
  KahanSum bias5_;
  KahanSum linearized_;
  ReplayReport report_;
};

}  // namespace

std::vector<double> true_importance(std::span<const SimplexVector> snapshot,
                                    const ContextDistribution& nu) {
  if (snapshot.empty() || static_cast<int>(snapshot.size()) != nu.size())
    throw std::invalid_argument("snapshot/nu dimension mismatch");
  const int K = snapshot[0].size();
  std::vector<double> f(static_cast<std::size_t>(K), 0.0);
  for (int c = 0; c < nu.size(); ++c)
    for (int a = 0; a < K; ++a)
      f[static_cast<std::size_t>(a)] += nu[c] * snapshot[static_cast<std::size_t>(c)][a] / 2.0;
  return f;
}

double tilde_coefficient(double f_at_arm, double gamma, bool fired) {
  return fired ? 2.0 / (f_at_arm + gamma) : 0.0;
}

SimplexVector tilde_p(const SimplexVector& start_of_epoch_base,
                      std::span<const double> tilde_history, double eta) {
  return softmax_weights(tilde_history, eta, &start_of_epoch_base);
}

bool ratio_check(std::span<const double> f_e, std::span<const double> fhat_e, double gamma) {
  for (std::size_t a = 0; a < f_e.size(); ++a) {
    const double r = (f_e[a] + gamma) / (fhat_e[a] + 1.5 * gamma);
    if (!(r >= 0.5 && r <= 2.0)) return false;
  }
  return true;
}

void indicator_events(EpochEvents& ev, std::span<const double> f_e,
                      std::span<const double> fhat_e, double max_tilde_sum,
                      const ParamSchedule& sched) {
  const double L = static_cast<double>(sched.L);
  bool F = true;
  double max_ratio = 0.0;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < f_e.size(); ++a) {
    const double bound = 2.0 * std::max(std::sqrt(f_e[a] * sched.iota / L), sched.iota / L);
    if (std::abs(fhat_e[a] - f_e[a]) > bound) F = false;
    const double r = (f_e[a] + sched.gamma) / (fhat_e[a] + 1.5 * sched.gamma);
    max_ratio = std::max(max_ratio, r);
    min_ratio = std::min(min_ratio, r);
  }
  ev.F = F;
  ev.L = max_tilde_sum <= L + sched.iota / sched.gamma;
  ev.max_ratio = max_ratio;
  ev.min_ratio = min_ratio;
  ev.max_tilde_sum = max_tilde_sum;
}

ReplayReport replay_diagnostics(const Trace& trace, const LossOracle& oracle,
                                const ContextDistribution& nu, const Policy& pi) {
  if (trace.C != oracle.contexts() || trace.K != oracle.arms() || trace.T != oracle.horizon())
    throw std::invalid_argument("trace/oracle dimension mismatch");
  if (nu.size() != trace.C || pi.contexts() != trace.C)
    throw std::invalid_argument("nu/policy dimension mismatch");
  DiagObserver obs(oracle, nu, pi);
  replay_episode(trace, oracle, &obs);
  return obs.finish();
}

DecompositionLedger decomposition(const Trace& trace, const LossOracle& oracle,
                                  const ContextDistribution& nu, const Policy& pi) {
  return replay_diagnostics(trace, oracle, nu, pi).ledger;
}

double pairing_gap(const Trace& trace, const LossOracle& oracle, const Policy& pi) {
  if (trace.C != oracle.contexts() || trace.K != oracle.arms() || trace.T != oracle.horizon())
    throw std::invalid_argument("trace/oracle dimension mismatch");
  double all = 0.0;
  double used = 0.0;
  for (const RoundRecord& r : trace.rounds) {
    const double d =
        oracle.loss(r.t, r.context, r.arm) - oracle.loss(r.t, r.context, pi[r.context]);
    all += d;
    if (r.role == Role::kLoss) used += d;
  }
  return all - 2.0 * used;
}

}  // namespace xlearn
