#include "xlearn/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xlearn {

namespace {
constexpr double kSumTolerance = 1e-12;
}

SimplexVector::SimplexVector(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw std::invalid_argument("simplex vector must be non-empty");
  double sum = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("simplex entries must be finite and nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw std::invalid_argument("simplex entries must sum to 1");
}

SimplexVector SimplexVector::uniform(int k) {
  if (k <= 0) throw std::invalid_argument("dimension must be positive");
  return SimplexVector(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
}

SimplexVector SimplexVector::one_hot(int k, int index) {
  if (k <= 0 || index < 0 || index >= k) throw std::invalid_argument("one_hot index out of range");
  std::vector<double> w(static_cast<std::size_t>(k), 0.0);
  w[static_cast<std::size_t>(index)] = 1.0;
  return SimplexVector(std::move(w));
}

ContextDistribution ContextDistribution::uniform(int c) {
  return ContextDistribution(std::vector<double>(static_cast<std::size_t>(c), 1.0 / c));
}

SimplexVector softmax_weights(std::span<const double> cumloss, double eta,
                              const SimplexVector* base) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
  const std::size_t k = cumloss.size();
  if (k == 0) throw std::invalid_argument("cumloss must be non-empty");
  if (base) {
    if (static_cast<std::size_t>(base->size()) != k)
      throw std::invalid_argument("base dimension mismatch");
    for (int a = 0; a < base->size(); ++a)
      if (!((*base)[a] > 0.0)) throw std::invalid_argument("base must be strictly positive");
  }

  std::vector<double> z(k);
  for (std::size_t a = 0; a < k; ++a) {
    if (!std::isfinite(cumloss[a])) throw std::invalid_argument("cumloss must be finite");
    z[a] = -eta * cumloss[a];
    if (base) z[a] += std::log((*base)[static_cast<int>(a)]);
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    z[a] = std::exp(z[a] - zmax);
    sum += z[a];
  }
  for (std::size_t a = 0; a < k; ++a) z[a] /= sum;
  return SimplexVector(std::move(z));
}

int sample_categorical(const SimplexVector& p, SplitMix64& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  int last_positive = 0;
  for (int a = 0; a < p.size(); ++a) {
    if (p[a] <= 0.0) continue;
    last_positive = a;
    acc += p[a];
    if (u < acc) return a;
  }
  return last_positive;  // float residue at the top of the cdf
}

}  // namespace xlearn
