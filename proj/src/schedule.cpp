#include "xlearn/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace xlearn {

ParamSchedule schedule_from_iota(int K, std::int64_t T, double iota, double delta_tag) {
  if (K < 2) throw std::invalid_argument("need at least two arms");
  if (T < 4) throw std::invalid_argument("need at least four rounds");
  if (!(iota > 0.0) || !std::isfinite(iota)) throw std::invalid_argument("iota must be positive");

  ParamSchedule s;
  s.delta = delta_tag;
  s.iota = iota;
  const double l_raw =
      std::sqrt(iota * static_cast<double>(K) * static_cast<double>(T) / std::log(K));
  s.L = 2 * std::llround(l_raw / 2.0);  // nearest even integer
  if (s.L < 2) s.L = 2;
  if (s.L >= T) throw std::invalid_argument("horizon too small for schedule");
  s.gamma = 16.0 * s.iota / static_cast<double>(s.L);
  s.eta = s.gamma / (2.0 * (2.0 * static_cast<double>(s.L) * s.gamma + s.iota));
  return s;
}

ParamSchedule derive_schedule(int K, std::int64_t T, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
  if (K < 2) throw std::invalid_argument("need at least two arms");
  if (T < 4) throw std::invalid_argument("need at least four rounds");
  const double iota =
      2.0 * std::log(8.0 * static_cast<double>(K) * static_cast<double>(T) / delta);
  return schedule_from_iota(K, T, iota, delta);
}

}  // namespace xlearn
