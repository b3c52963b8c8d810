#pragma once

#include "nonclip/param_space.hpp"

#include <cstdint>

namespace nonclip {

/// Momentum-averaged gradient estimate d^k = alpha_k g + (1 - alpha_k) d^{k-1}, with d^0 = 0.
class MomentumState {
 public:
  MomentumState() = default;
  explicit MomentumState(const std::vector<Shape>& shapes) : d_prev_(ParamVector::zeros(shapes)) {}

  /// Folds in `g`, advances the counter and returns the new estimate.
  /// Throws ConfigError unless 0 < alpha <= 1.
  const Direction& update(const Direction& g, double alpha);

  const Direction& estimate() const { return d_prev_; }
  /// Number of updates applied so far.
  std::int64_t steps() const { return k_; }

 private:
  Direction d_prev_;
  std::int64_t k_ = 0;
};

/// Free-function form: returns alpha g + (1 - alpha) d_prev and advances `state`.
Direction momentum_update(MomentumState& state, const Direction& g, double alpha);

struct AlphaSchedule {
  enum class Kind { constant, horizon };

  Kind kind = Kind::constant;
  double value = 1.0;     // constant alpha
  std::int64_t horizon = 1;  // n for alpha = 1/sqrt(n)
  /// Use alpha_1 = 1 so d^1 is a gradient sample instead of a shrunken one.
  bool first_step_override = true;

  static AlphaSchedule constant(double a, bool first_step_override = true);
  static AlphaSchedule from_horizon(std::int64_t n, bool first_step_override = true);

  /// alpha_k for the 1-based iteration k.
  double at(std::int64_t k) const;
  void validate() const;

  friend bool operator==(const AlphaSchedule&, const AlphaSchedule&) = default;
};

}  // namespace nonclip
