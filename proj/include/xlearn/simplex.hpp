#pragma once

#include <span>
#include <vector>

#include "xlearn/rng.hpp"

namespace xlearn {

// Probability distribution over a finite set. Entries are nonnegative and sum
// to 1 within 1e-12; construction validates. Immutable after construction.
class SimplexVector {
 public:
  explicit SimplexVector(std::vector<double> weights);

  static SimplexVector uniform(int k);
  static SimplexVector one_hot(int k, int index);

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const { return w_; }

  bool operator==(const SimplexVector& other) const { return w_ == other.w_; }

 private:
  std::vector<double> w_;
};

// Distribution over contexts; same contract as SimplexVector.
class ContextDistribution {
 public:
  explicit ContextDistribution(std::vector<double> probs) : p_(std::move(probs)) {}

  static ContextDistribution uniform(int c);

  int size() const { return p_.size(); }
  double operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const { return p_.values(); }

 private:
  SimplexVector p_;
};

// Exponential-weights solution of entropy-regularized FTRL over the simplex:
// returns the distribution proportional to base(a) * exp(-eta * cumloss(a)),
// base defaulting to uniform. Computed in log domain with max-subtraction.
// Throws std::invalid_argument on non-finite input, eta <= 0, a base of the
// wrong length, or a base with non-positive entries.
SimplexVector softmax_weights(std::span<const double> cumloss, double eta,
                              const SimplexVector* base = nullptr);

// Draws index a with probability p(a), consuming draws from the given stream
// only (exactly one uniform per call).
int sample_categorical(const SimplexVector& p, SplitMix64& rng);

}  // namespace xlearn
