#include "xlearn/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xlearn {

namespace {

constexpr std::uint64_t kSaltBestArm = 0x42657374ULL;
constexpr std::uint64_t kSaltJitter = 0x4a697474ULL;
constexpr std::uint64_t kSaltRegime = 0x5265674dULL;
constexpr std::uint64_t kSaltCompeting = 0x436f6d70ULL;
constexpr std::uint64_t kSaltSleeping = 0x536c6570ULL;
constexpr std::uint64_t kSaltSleepBias = 0x53426961ULL;

class ShiftingOracle final : public LossOracle {
 public:
  ShiftingOracle(const EnvSpec& spec)
      : LossOracle(spec.T, spec.C, spec.K),
        seed_(spec.env_seed),
        segments_(spec.segments),
        jitter_(spec.jitter) {}

  double loss(std::int64_t t, int c, int a) const override {
    const std::int64_t seg = (t - 1) * segments_ / horizon();
    const int best = static_cast<int>(
        mix64(seed_, kSaltBestArm, static_cast<std::uint64_t>(seg), static_cast<std::uint64_t>(c)) %
        static_cast<std::uint64_t>(arms()));
    double v = (a == best) ? 0.2 : 0.8;
    if (jitter_) {
      const double u = hash_unit(mix64(seed_, kSaltJitter, static_cast<std::uint64_t>(t),
                                       mix64(static_cast<std::uint64_t>(c),
                                             static_cast<std::uint64_t>(a))));
      v += (2.0 * u - 1.0) * 0.1;
    }
    return std::clamp(v, 0.0, 1.0);
  }

 private:
  std::uint64_t seed_;
  std::int64_t segments_;
  bool jitter_;
};

class AuctionOracle final : public LossOracle {
 public:
  AuctionOracle(const EnvSpec& spec)
      : LossOracle(spec.T, spec.C, spec.K),
        seed_(spec.env_seed),
        values_(spec.value_grid),
        bids_(spec.bid_grid),
        block_length_(std::max<std::int64_t>(spec.T / 32, 1)) {}

  // Seeded two-mode schedule: every block of T/32 rounds flips (by hash)
  // between a low-bid regime m_t in [0.2, 0.45] and a high-bid regime
  // m_t in [0.5, 0.95].
  double competing_bid(std::int64_t t) const {
    const std::uint64_t block = static_cast<std::uint64_t>((t - 1) / block_length_);
    const bool high = (mix64(seed_, kSaltRegime, block) & 1ULL) != 0;
    const double u = hash_unit(mix64(seed_, kSaltCompeting, static_cast<std::uint64_t>(t)));
    return high ? 0.5 + 0.45 * u : 0.2 + 0.25 * u;
  }

  double loss(std::int64_t t, int c, int a) const override {
    const double v = values_[static_cast<std::size_t>(c)];
    const double b = bids_[static_cast<std::size_t>(a)];
    const double utility = (b >= competing_bid(t)) ? v - b : 0.0;
    return (1.0 - utility) / 2.0;
  }

 private:
  std::uint64_t seed_;
  std::vector<double> values_;
  std::vector<double> bids_;
  std::int64_t block_length_;
};

class SleepingOracle final : public LossOracle {
 public:
  SleepingOracle(const EnvSpec& spec)
      : LossOracle(spec.T, spec.C, spec.K), seed_(spec.env_seed) {
    available_.assign(static_cast<std::size_t>(spec.C) * spec.K, false);
    for (int c = 0; c < spec.C; ++c)
      for (int a : spec.availability[static_cast<std::size_t>(c)])
        available_[static_cast<std::size_t>(c) * spec.K + a] = true;
  }

  double loss(std::int64_t t, int c, int a) const override {
    if (!available_[static_cast<std::size_t>(c) * arms() + a]) return 1.0;
    const std::uint64_t ca = mix64(static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(a));
    const double bias = 0.3 + 0.4 * hash_unit(mix64(seed_, kSaltSleepBias, ca));
    const double u = hash_unit(mix64(seed_, kSaltSleeping, static_cast<std::uint64_t>(t), ca));
    return std::clamp(bias + 0.3 * (2.0 * u - 1.0), 0.0, 1.0);
  }

 private:
  std::uint64_t seed_;
  std::vector<bool> available_;
};

void check_sorted_unit_grid(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + " grid must be non-empty");
  double prev = -1.0;
  for (double v : grid) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " grid outside [0,1]");
    if (v < prev) throw std::invalid_argument(std::string(what) + " grid must be sorted ascending");
    prev = v;
  }
}

void validate(const EnvSpec& spec) {
  if (spec.K < 2) throw std::invalid_argument("need at least two arms");
  if (spec.C < 1) throw std::invalid_argument("need at least one context");
  if (spec.T < 2) throw std::invalid_argument("need at least two rounds");
  switch (spec.kind) {
    case EnvKind::kShifting:
      if (spec.segments < 1 || spec.segments > spec.T)
        throw std::invalid_argument("segment count must be in [1, T]");
      break;
    case EnvKind::kAuction:
      check_sorted_unit_grid(spec.value_grid, "value");
      check_sorted_unit_grid(spec.bid_grid, "bid");
      if (static_cast<int>(spec.value_grid.size()) != spec.C)
        throw std::invalid_argument("value grid must have one entry per context");
      if (static_cast<int>(spec.bid_grid.size()) != spec.K)
        throw std::invalid_argument("bid grid must have one entry per arm");
      break;
    case EnvKind::kSleeping:
      if (static_cast<int>(spec.availability.size()) != spec.C)
        throw std::invalid_argument("availability family must have one set per context");
      for (const auto& set : spec.availability)
        for (int a : set)
          if (a < 0 || a >= spec.K) throw std::invalid_argument("availability arm out of range");
      break;
  }
  if (spec.nu_override && static_cast<int>(spec.nu_override->size()) != spec.C)
    throw std::invalid_argument("nu override must have one entry per context");
}

}  // namespace

void LossOracle::loss_row(std::int64_t t, int a, std::span<double> out) const {
  if (static_cast<int>(out.size()) != C_) throw std::invalid_argument("row buffer size mismatch");
  for (int c = 0; c < C_; ++c) out[static_cast<std::size_t>(c)] = loss(t, c, a);
}

EnvKind parse_env_kind(const std::string& name) {
  if (name == "shifting") return EnvKind::kShifting;
  if (name == "auction") return EnvKind::kAuction;
  if (name == "sleeping") return EnvKind::kSleeping;
  throw std::invalid_argument("unknown environment kind: " + name);
}

std::string env_kind_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::kShifting: return "shifting";
    case EnvKind::kAuction: return "auction";
    case EnvKind::kSleeping: return "sleeping";
  }
  return "?";
}

std::pair<std::unique_ptr<LossOracle>, ContextDistribution> build_oracle(const EnvSpec& spec) {
  validate(spec);
  std::unique_ptr<LossOracle> oracle;
  switch (spec.kind) {
    case EnvKind::kShifting: oracle = std::make_unique<ShiftingOracle>(spec); break;
    case EnvKind::kAuction: oracle = std::make_unique<AuctionOracle>(spec); break;
    case EnvKind::kSleeping: oracle = std::make_unique<SleepingOracle>(spec); break;
  }
  ContextDistribution nu = spec.nu_override ? ContextDistribution(*spec.nu_override)
                                            : ContextDistribution::uniform(spec.C);
  return {std::move(oracle), std::move(nu)};
}

int sample_context(const ContextDistribution& nu, SplitMix64& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  int last_positive = 0;
  for (int c = 0; c < nu.size(); ++c) {
    if (nu[c] <= 0.0) continue;
    last_positive = c;
    acc += nu[c];
    if (u < acc) return c;
  }
  return last_positive;
}

double auction_competing_bid(const LossOracle& oracle, std::int64_t t) {
  const auto* auction = dynamic_cast<const AuctionOracle*>(&oracle);
  if (!auction) throw std::invalid_argument("not an auction oracle");
  return auction->competing_bid(t);
}

}  // namespace xlearn
