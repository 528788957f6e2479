#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xlearn/schedule.hpp"
#include "xlearn/simplex.hpp"

namespace xlearn {

// Deterministic context -> arm map; the comparator regret is measured against.
struct Policy {
  std::vector<int> arm_for_context;

  int operator[](int c) const { return arm_for_context[static_cast<std::size_t>(c)]; }
  int contexts() const { return static_cast<int>(arm_for_context.size()); }
};

// Which half of its consecutive pair a round was assigned to. kSingle marks a
// trailing unpaired round (odd horizon tail); it produces no estimates.
enum class Role : std::uint8_t { kFreq, kLoss, kSingle };

// S_t is drawn only on loss-role rounds of epochs >= 2.
inline constexpr std::int8_t kKeepAbsent = -1;

struct RoundRecord {
  std::int64_t t = 0;  // 1-based
  int context = 0;
  int arm = 0;
  Role role = Role::kSingle;
  bool used_fallback = false;
  std::int8_t keep = kKeepAbsent;  // -1 absent, else 0/1
  double p_played = 0.0;           // p_{t,c_t}(A_t)
  double q_played = 0.0;           // q_{t,c_t}(A_t)
};

// Snapshot / estimator pair as used during one epoch.
struct EpochRecord {
  std::int64_t e = 0;                // 1-based epoch index
  std::vector<double> fhat;          // estimator dividing the loss estimates in epoch e
  bool completed = false;            // ran its full L rounds and was finalized
};

// Full record of one episode: exactly one RoundRecord per round, the snapshot
// archive (snapshots[k] is the distribution with snapshot index k+1), and the
// per-epoch estimator values. Appended by a single writer during the run,
// read-only afterwards.
struct Trace {
  std::int64_t T = 0;
  int K = 0;
  int C = 0;
  std::optional<ParamSchedule> schedule;  // absent for baseline traces

  std::vector<RoundRecord> rounds;
  std::vector<std::vector<SimplexVector>> snapshots;  // [k][c], k = snapshot index - 1
  std::vector<EpochRecord> epochs;

  std::int64_t epoch_length() const { return schedule ? schedule->L : 0; }

  // Epoch covering round t (1-based); valid only for epoch-structured traces.
  std::int64_t epoch_of(std::int64_t t) const { return (t - 1) / epoch_length() + 1; }

  const std::vector<SimplexVector>& snapshot(std::int64_t index) const {
    return snapshots[static_cast<std::size_t>(index - 1)];
  }
};

}  // namespace xlearn
