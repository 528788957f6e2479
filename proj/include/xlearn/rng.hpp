#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace xlearn {

// SplitMix64 (Steele, Lea, Flood 2014). One fixed 64-bit generator for the
// whole project so that runs are reproducible bit-for-bit across platforms.
// Uniform doubles take the top 53 bits, giving values in [0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Top bit of one draw; consumes exactly one generator step.
  bool next_bit() { return (next_u64() >> 63) != 0; }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Stateless output function of SplitMix64, used as a mixing hash for
// counter-based randomness (loss tensors are pure functions of their keys).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ b); }
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(a, b) ^ c);
}
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return mix64(mix64(a, b, c) ^ d);
}

// Uniform double in [0,1) from a hashed key.
inline double hash_unit(std::uint64_t key) { return static_cast<double>(key >> 11) * 0x1.0p-53; }

// Named independent substreams derived from one master seed. Substream k is a
// SplitMix64 seeded with mix64(master, salt_k); the salts are fixed constants
// recorded in run metadata, so equal master seeds give bit-identical streams.
struct RngStreams {
  static constexpr std::uint64_t kSaltContext = 0x436f6e74657874ULL;      // "Context"
  static constexpr std::uint64_t kSaltAction = 0x416374696f6eULL;         // "Action"
  static constexpr std::uint64_t kSaltKeep = 0x4b656570ULL;               // "Keep"
  static constexpr std::uint64_t kSaltPairing = 0x50616972696e67ULL;      // "Pairing"
  static constexpr std::uint64_t kSaltEnvironment = 0x456e7669726fULL;    // "Enviro"

  explicit RngStreams(std::uint64_t master_seed)
      : master(master_seed),
        context(mix64(master_seed, kSaltContext)),
        action(mix64(master_seed, kSaltAction)),
        keep(mix64(master_seed, kSaltKeep)),
        pairing(mix64(master_seed, kSaltPairing)),
        environment(mix64(master_seed, kSaltEnvironment)) {}

  static constexpr std::string_view algorithm_name() { return "splitmix64"; }

  std::uint64_t master;
  SplitMix64 context;
  SplitMix64 action;
  SplitMix64 keep;
  SplitMix64 pairing;
  SplitMix64 environment;
};

}  // namespace xlearn
