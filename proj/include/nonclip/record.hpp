#pragma once

#include "nonclip/param_space.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nonclip {

/// Metrics for iteration k, evaluated at x^k before the step.
struct IterationRow {
  std::int64_t k = 0;
  double f = 0.0;
  /// ||d^k||_* of the estimate the step used.
  double dual_norm = 0.0;
  double eta = 0.0;
  bool clipped = false;
  double gamma_k = 0.0;
  /// Constrained runs only; computed with the true gradient.
  std::optional<double> wolfe_gap;
  double param_norm = 0.0;
  /// ||d^k - grad f(x^k)||_2^2 when true-gradient metrics are on.
  std::optional<double> lambda_sq;
  /// ||grad f(x^k)||_* when true-gradient metrics are on.
  std::optional<double> grad_dual_norm;
};

struct RunSummary {
  std::int64_t xbar_index = 0;  // 1-based
  double f_xbar = 0.0;
  double f_final = 0.0;
  std::optional<double> min_grad_dual_norm;
  std::optional<double> min_wolfe_gap;
  /// f(x^1) - f*, when f* is known.
  std::optional<double> delta;
};

struct RunRecord {
  std::string problem;
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<IterationRow> rows;
  RunSummary summary;

  /// x^1, ..., x^n when trajectories are stored.
  std::vector<ParamVector> trajectory;
  ParamVector initial;
  ParamVector xbar;
  /// x^{n+1}, the iterate produced by the last step.
  ParamVector final_iterate;
  /// f(x^{n+1}); used to close the descent check on the last step.
  double f_after_last = 0.0;
};

}  // namespace nonclip
