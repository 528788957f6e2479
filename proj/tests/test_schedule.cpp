#include <cmath>
#include <initializer_list>
#include <stdexcept>

#include "doctest.h"
#include "xlearn/schedule.hpp"

using namespace xlearn;

namespace {

// Independent recomputation with long double arithmetic.
void check_schedule(int K, std::int64_t T, double delta) {
  const ParamSchedule s = derive_schedule(K, T, delta);
  const long double iota = 2.0L * std::log(8.0L * K * T / static_cast<long double>(delta));
  CHECK(s.iota == doctest::Approx(static_cast<double>(iota)).epsilon(1e-12));
  const long double l_raw = std::sqrt(iota * K * T / std::log(static_cast<long double>(K)));
  const long long expected_l = 2 * std::llround(static_cast<double>(l_raw) / 2.0);
  CHECK(s.L == expected_l);
  CHECK(s.L % 2 == 0);
  CHECK(s.gamma == doctest::Approx(16.0 * s.iota / s.L).epsilon(1e-15));
  CHECK(s.eta ==
        doctest::Approx(s.gamma / (2.0 * (2.0 * s.L * s.gamma + s.iota))).epsilon(1e-15));
}

}  // namespace

TEST_CASE("schedule values for K=10, T=100000, delta=0.1") {
  const ParamSchedule s = derive_schedule(10, 100000, 0.1);
  CHECK(s.iota == doctest::Approx(36.39).epsilon(1e-3));
  CHECK(s.L == 3976);
  CHECK(s.gamma == doctest::Approx(0.1464).epsilon(1e-3));
  CHECK(s.eta == doctest::Approx(6.10e-5).epsilon(1e-2));
  check_schedule(10, 100000, 0.1);
}

TEST_CASE("schedule values for K=2, T=1024, delta=0.5") {
  const ParamSchedule s = derive_schedule(2, 1024, 0.5);
  CHECK(s.iota == doctest::Approx(20.79).epsilon(1e-3));
  CHECK(s.L == 248);
  CHECK(s.gamma == doctest::Approx(1.342).epsilon(1e-3));  // gamma > 1 is legal
  check_schedule(2, 1024, 0.5);
}

TEST_CASE("schedule guards the horizon") {
  CHECK_THROWS_AS(derive_schedule(2, 4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(derive_schedule(1, 1000, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(derive_schedule(2, 1000, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(derive_schedule(2, 1000, 1.0), std::invalid_argument);
}

TEST_CASE("schedule self-consistency across a small grid") {
  for (int K : {2, 3, 5, 10})
    for (std::int64_t T : {512, 4096, 65536})
      for (double delta : {0.05, 0.1, 0.5}) check_schedule(K, T, delta);
}
