#pragma once

#include <cstdint>
#include <memory>
#include <span>

namespace xlearn {

// Oblivious adversary: the loss tensor l_t,c(a) in [0,1] is a pure function of
// (t, c, a) and the environment seed, fixed before the run. Rows are computed
// on demand, so memory stays O(C*K) per query. Read-only after construction;
// safe for concurrent readers.
class LossOracle {
 public:
  LossOracle(std::int64_t T, int C, int K) : T_(T), C_(C), K_(K) {}
  virtual ~LossOracle() = default;

  std::int64_t horizon() const { return T_; }
  int contexts() const { return C_; }
  int arms() const { return K_; }

  // t is 1-based; c in [0,C), a in [0,K).
  virtual double loss(std::int64_t t, int c, int a) const = 0;

  // Fills out[c] = loss(t, c, a) for every context; out.size() must be C.
  virtual void loss_row(std::int64_t t, int a, std::span<double> out) const;

 private:
  std::int64_t T_;
  int C_;
  int K_;
};

}  // namespace xlearn
