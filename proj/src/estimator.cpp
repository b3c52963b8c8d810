#include "nonclip/estimator.hpp"

#include "nonclip/errors.hpp"

#include <cmath>
#include <string>

namespace nonclip {

const Direction& MomentumState::update(const Direction& g, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("momentum alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  require_finite(g, "momentum gradient sample");
  if (d_prev_.num_blocks() == 0) d_prev_ = ParamVector::zeros_like(g);
  require_same_structure(g, d_prev_, "momentum_update");
  if (alpha == 1.0) {
    d_prev_ = g;
  } else {
    for (std::size_t l = 0; l < g.num_blocks(); ++l) {
      auto& d = d_prev_.block(l).data();
      d = alpha * g.block(l).data() + (1.0 - alpha) * d;
    }
    require_finite(d_prev_, "momentum_update");
  }
  ++k_;
  return d_prev_;
}

Direction momentum_update(MomentumState& state, const Direction& g, double alpha) {
  return state.update(g, alpha);
}

AlphaSchedule AlphaSchedule::constant(double a, bool first_step_override) {
  AlphaSchedule s;
  s.kind = Kind::constant;
  s.value = a;
  s.first_step_override = first_step_override;
  return s;
}

AlphaSchedule AlphaSchedule::from_horizon(std::int64_t n, bool first_step_override) {
  AlphaSchedule s;
  s.kind = Kind::horizon;
  s.horizon = n;
  s.first_step_override = first_step_override;
  return s;
}

void AlphaSchedule::validate() const {
  if (kind == Kind::horizon) {
    if (horizon < 1) throw ConfigError("alpha horizon must be >= 1");
  } else if (!(value > 0.0 && value <= 1.0)) {
    throw ConfigError("alpha must lie in (0, 1], got " + std::to_string(value));
  }
}

double AlphaSchedule::at(std::int64_t k) const {
  if (first_step_override && k == 1) return 1.0;
  if (kind == Kind::horizon) return 1.0 / std::sqrt(static_cast<double>(horizon));
  return value;
}

}  // namespace nonclip
