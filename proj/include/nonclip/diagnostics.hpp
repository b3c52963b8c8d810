#pragma once

#include "nonclip/geometry.hpp"
#include "nonclip/optimizers.hpp"
#include "nonclip/problems.hpp"
#include "nonclip/record.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nonclip {

/// max_{||u|| <= beta} <g, x - u> = <g, x> + beta ||g||_*. Nonnegative for feasible x.
double wolfe_gap(const Direction& g, const ParamVector& x, double beta, const NormSpec& norm);

struct SmoothnessSample {
  double ratio = 0.0;  // ||grad f(x) - grad f(y)||_* / ||x - y||
  double gnorm = 0.0;  // ||grad f(x)||_*
  double sep = 0.0;    // ||x - y||
};

struct ProbeResult {
  std::vector<SmoothnessSample> samples;
  double L0_hat = 0.0;
  double L1_hat = 0.0;
  /// Root-mean-square residual of ratio - (L0_hat + L1_hat * gnorm).
  double residual = 0.0;
  std::size_t rejected = 0;
};

using PointPair = std::pair<ParamVector, ParamVector>;

/// Samples the (L0, L1) inequality on `pairs` and fits ratio ~ L0 + L1 gnorm by nonnegative
/// least squares. Pairs with ||x - y|| > 1 / L1_hypothesis (or x == y) are dropped; fewer than
/// 10 survivors throws InsufficientDataError.
ProbeResult smoothness_probe(const Problem& problem, const std::vector<PointPair>& pairs, const NormSpec& norm,
                             std::optional<double> L1_hypothesis = std::nullopt);

/// Consecutive trajectory pairs from `record` plus `random_pairs` Gaussian perturbation pairs of
/// Euclidean size `radius` around trajectory points.
std::vector<PointPair> probe_pairs(const RunRecord& record, std::size_t random_pairs, double radius,
                                   std::uint64_t seed);

/// Iterations k (1-based) with f(x^{k+1}) > f(x^k) + 1e-12 max(1, |f(x^k)|).
std::vector<std::int64_t> check_descent(const RunRecord& record);

struct BoundReport {
  std::string name;
  std::int64_t n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// The theorem's stepsize conditions hold for the supplied constants.
  bool preconditions_met = true;
  bool pass = false;
  std::string note;
};

inline constexpr double kBoundSlack = 1e-9;

/// min_k ||grad f(x^k)||_* <= sqrt(Delta / (gamma n)) + 2 Delta / (gamma rho n), gamma <= 1/(L0 + rho L1).
BoundReport check_bound_det_ggnc(const RunRecord& record, double L0, double L1, double gamma, double rho);
/// uCG neighborhood: min_k ||grad f(x^k)||_* <= Delta / (gamma rho n) + L gamma rho / 2.
BoundReport check_bound_uscg_neighborhood(const RunRecord& record, double L, double gamma, double rho);
/// min_k ||grad f(x^k)||_* <= 2 Delta / (gamma rho n) + 2 L0 gamma rho, gamma rho < 1/(2 L1).
BoundReport check_bound_det_uscg(const RunRecord& record, double L0, double L1, double gamma, double rho);
/// min_k Wolfe gap <= 2 beta sqrt(Delta / (gamma n)) + 2 Delta / (gamma rho n), gamma <= 1/L, rho <= L.
BoundReport check_bound_wolfe(const RunRecord& record, double L, double beta, double gamma, double rho);

struct EstimatorStats {
  /// Per-iteration mean of ||lambda^k||_2^2 over seeds (index k - 1).
  std::vector<double> mean_lambda_sq;
  std::vector<double> stderr_lambda_sq;
  std::size_t seeds = 0;
};

/// Monte-Carlo average of ||d^k - grad f(x^k)||_2^2 across `seeds`.
EstimatorStats estimator_error_stats(const Problem& problem, const OptimizerConfig& config,
                                     const std::vector<std::uint64_t>& seeds);

/// Stationary E||lambda||^2 of the momentum average at a frozen point: alpha sigma^2 / (2 - alpha).
double ema_stationary_variance(double alpha, double sigma_sq);

/// Smallest C with mean_k <= 2 (sigma^2 + C) / sqrt(n) for every k (clamped at 0).
double fit_horizon_constant(const std::vector<double>& mean_lambda_sq, double sigma_sq, std::int64_t n);

}  // namespace nonclip
