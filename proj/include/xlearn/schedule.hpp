#pragma once

#include <cstdint>

namespace xlearn {

// Parameter schedule (iota, L, gamma, eta) for the cross-learning learner.
// gamma and eta are recomputed from the rounded L so the published relations
// gamma = 16*iota/L and eta = gamma / (2*(2*L*gamma + iota)) hold exactly.
struct ParamSchedule {
  double iota = 0.0;
  std::int64_t L = 0;  // epoch length in rounds; even, >= 2
  double gamma = 0.0;
  double eta = 0.0;
  double delta = 0.0;
};

// Derives the schedule from (K, T, delta):
//   iota  = 2 ln(8 K T / delta)
//   L     = sqrt(iota K T / ln K), rounded to the nearest even integer >= 2
//   gamma = 16 iota / L
//   eta   = gamma / (2 (2 L gamma + iota))
// Throws std::invalid_argument if K < 2, T < 4, delta outside (0,1), or the
// rounded L reaches T (horizon too small for the schedule).
ParamSchedule derive_schedule(int K, std::int64_t T, double delta);

// Same schedule family with the concentration weight iota supplied directly:
// L = sqrt(iota K T / ln K) rounded even, gamma and eta from the relations
// above. The published iota = 2 ln(8KT/delta) targets union bounds over every
// round and arm and over-regularizes short horizons; scaling studies pass a
// small constant instead. delta_tag is recorded for run metadata only.
ParamSchedule schedule_from_iota(int K, std::int64_t T, double iota, double delta_tag);

}  // namespace xlearn
