#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xlearn/loss_oracle.hpp"
#include "xlearn/rng.hpp"
#include "xlearn/simplex.hpp"

namespace xlearn {

enum class EnvKind { kShifting, kAuction, kSleeping };

EnvKind parse_env_kind(const std::string& name);
std::string env_kind_name(EnvKind kind);

// Configuration of an oblivious-adversary environment.
//
// shifting: the horizon splits into `segments` equal blocks; within a block
//   each context has a designated best arm with mean loss 0.2, all others 0.8,
//   plus per-round jitter uniform in [-0.1, 0.1] (clipped to [0,1]) unless
//   `jitter` is off.
// auction: context c is the private value value_grid[c], arm a the bid
//   bid_grid[a]; a seeded competing bid m_t is drawn from a two-mode schedule
//   that switches regime every T/32 rounds; utility (v－b)·1[b >= m_t] maps to
//   loss (1-u)/2.
// sleeping: context c indexes the availability set availability[c]; arms
//   outside the set cost exactly 1, available arms get seeded losses in [0,1].
struct EnvSpec {
  EnvKind kind = EnvKind::kShifting;
  int K = 2;
  int C = 1;
  std::int64_t T = 2;
  std::uint64_t env_seed = 0;

  int segments = 1;     // shifting
  bool jitter = true;   // shifting

  std::vector<double> value_grid;  // auction, size C
  std::vector<double> bid_grid;    // auction, size K

  std::vector<std::vector<int>> availability;  // sleeping, size C

  std::optional<std::vector<double>> nu_override;  // context distribution; uniform if absent
};

// Validates the spec and builds the oracle plus the context distribution.
// Deterministic in env_seed: equal specs give bit-identical tensors.
std::pair<std::unique_ptr<LossOracle>, ContextDistribution> build_oracle(const EnvSpec& spec);

// One i.i.d. draw c ~ nu, advancing only the given stream.
int sample_context(const ContextDistribution& nu, SplitMix64& rng);

// Test hook: the competing bid at round t of an auction oracle. Throws if the
// oracle is not an auction.
double auction_competing_bid(const LossOracle& oracle, std::int64_t t);

}  // namespace xlearn
