#pragma once

#include <functional>
#include <span>

#include "xlearn/rng.hpp"
#include "xlearn/simplex.hpp"

namespace xlearn {
namespace oracle {

// Brute-force verifiers for the test and acceptance suites. Never used on the
// hot path.

// Exhaustive simplex-grid minimizer of <p, cumloss> + eta^-1 sum_i p_i log p_i
// (with 0 log 0 := 0). Requires K <= 4 and step <= 0.01.
SimplexVector grid_argmin_ftrl(std::span<const double> cumloss, double eta, double step);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std / sqrt(n)
  long long n = 0;
};

// Sample mean and standard error of n independent evaluations of the sampler.
// Deterministic given the stream state. Requires n >= 2.
McEstimate mc_expectation(const std::function<double(SplitMix64&)>& sampler, SplitMix64& rng,
                          long long n);

}  // namespace oracle
}  // namespace xlearn
