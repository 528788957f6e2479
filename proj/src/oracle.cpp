#include "xlearn/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace xlearn {
namespace oracle {

namespace {

double ftrl_objective(std::span<const double> p, std::span<const double> cumloss, double eta) {
  double v = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    v += p[i] * cumloss[i];
    if (p[i] > 0.0) v += p[i] * std::log(p[i]) / eta;  // 0 log 0 := 0
  }
  return v;
}

}  // namespace

SimplexVector grid_argmin_ftrl(std::span<const double> cumloss, double eta, double step) {
  const int K = static_cast<int>(cumloss.size());
  if (K < 2 || K > 4) throw std::invalid_argument("grid search supports 2 <= K <= 4");
  if (!(step > 0.0 && step <= 0.01)) throw std::invalid_argument("step must be in (0, 0.01]");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const int n = static_cast<int>(std::llround(1.0 / step));

  std::vector<double> best(static_cast<std::size_t>(K), 0.0);
  std::vector<double> point(static_cast<std::size_t>(K), 0.0);
  double best_value = std::numeric_limits<double>::infinity();
  const double denom = static_cast<double>(n);

  // Enumerate compositions of n into K parts.
  std::vector<int> counts(static_cast<std::size_t>(K), 0);
  auto evaluate = [&]() {
    for (int i = 0; i < K; ++i) point[static_cast<std::size_t>(i)] = counts[static_cast<std::size_t>(i)] / denom;
    const double v = ftrl_objective(point, cumloss, eta);
    if (v < best_value) {
      best_value = v;
      best = point;
    }
  };
  if (K == 2) {
    for (int i = 0; i <= n; ++i) {
      counts[0] = i;
      counts[1] = n - i;
      evaluate();
    }
  } else if (K == 3) {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n - i; ++j) {
        counts[0] = i;
        counts[1] = j;
        counts[2] = n - i - j;
        evaluate();
      }
  } else {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n - i; ++j)
        for (int k = 0; k <= n - i - j; ++k) {
          counts[0] = i;
          counts[1] = j;
          counts[2] = k;
          counts[3] = n - i - j - k;
          evaluate();
        }
  }
  return SimplexVector(std::move(best));
}

McEstimate mc_expectation(const std::function<double(SplitMix64&)>& sampler, SplitMix64& rng,
                          long long n) {
  if (n < 2) throw std::invalid_argument("need at least two samples");
  double mean = 0.0;
  double m2 = 0.0;
  for (long long i = 1; i <= n; ++i) {
    const double x = sampler(rng);
    const double d = x - mean;
    mean += d / static_cast<double>(i);
    m2 += d * (x - mean);
  }
  McEstimate est;
  est.mean = mean;
  est.n = n;
  const double var = m2 / static_cast<double>(n - 1);
  est.stderr_ = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
  return est;
}

}  // namespace oracle
}  // namespace xlearn
