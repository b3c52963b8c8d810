#include "nonclip/diagnostics.hpp"

#include "nonclip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nonclip {

double wolfe_gap(const Direction& g, const ParamVector& x, double beta, const NormSpec& norm) {
  return inner(g, x) + beta * dual_norm(norm, g);
}

namespace {

struct Fit {
  double a = 0.0;
  double b = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

double sse_of(const std::vector<SmoothnessSample>& s, double a, double b) {
  double sse = 0.0;
  for (const auto& p : s) {
    const double r = p.ratio - (a + b * p.gnorm);
    sse += r * r;
  }
  return sse;
}

/// Two-variable nonnegative least squares by enumerating active sets.
Fit nnls_affine(const std::vector<SmoothnessSample>& s) {
  const double n = static_cast<double>(s.size());
  double sg = 0, sr = 0, sgg = 0, sgr = 0;
  for (const auto& p : s) {
    sg += p.gnorm;
    sr += p.ratio;
    sgg += p.gnorm * p.gnorm;
    sgr += p.gnorm * p.ratio;
  }
  std::vector<Fit> candidates;
  candidates.push_back({0.0, 0.0, 0.0});
  candidates.push_back({std::max(0.0, sr / n), 0.0, 0.0});
  if (sgg > 0.0) candidates.push_back({0.0, std::max(0.0, sgr / sgg), 0.0});
  const double det = n * sgg - sg * sg;
  if (det > 1e-12 * std::max(1.0, n * sgg)) {
    const double a = (sgg * sr - sg * sgr) / det;
    const double b = (n * sgr - sg * sr) / det;
    if (a >= 0.0 && b >= 0.0) candidates.push_back({a, b, 0.0});
  }
  Fit best;
  for (auto& c : candidates) {
    c.sse = sse_of(s, c.a, c.b);
    if (c.sse < best.sse) best = c;
  }
  return best;
}

}  // namespace

ProbeResult smoothness_probe(const Problem& problem, const std::vector<PointPair>& pairs, const NormSpec& norm,
                             std::optional<double> L1_hypothesis) {
  ProbeResult out;
  const double max_sep = (L1_hypothesis && *L1_hypothesis > 0.0) ? 1.0 / *L1_hypothesis
                                                                  : std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : pairs) {
    const double sep = primal_norm(norm, subtract(x, y));
    if (!(sep > 0.0) || sep > max_sep) {
      ++out.rejected;
      continue;
    }
    const Direction gx = problem.gradient(x);
    const Direction gy = problem.gradient(y);
    SmoothnessSample s;
    s.sep = sep;
    s.gnorm = dual_norm(norm, gx);
    s.ratio = dual_norm(norm, subtract(gx, gy)) / sep;
    out.samples.push_back(s);
  }
  if (out.samples.size() < 10) {
    throw InsufficientDataError("smoothness_probe: " + std::to_string(out.samples.size()) +
                                " valid pairs, need at least 10");
  }
  const Fit fit = nnls_affine(out.samples);
  out.L0_hat = fit.a;
  out.L1_hat = fit.b;
  out.residual = std::sqrt(fit.sse / static_cast<double>(out.samples.size()));
  return out;
}

std::vector<PointPair> probe_pairs(const RunRecord& record, std::size_t random_pairs, double radius,
                                   std::uint64_t seed) {
  std::vector<PointPair> out;
  const auto& traj = record.trajectory;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) out.emplace_back(traj[i], traj[i + 1]);
  if (!traj.empty()) out.emplace_back(traj.back(), record.final_iterate);

  std::vector<ParamVector> anchors = traj;
  if (anchors.empty()) anchors.push_back(record.initial);
  Rng rng(seed);
  for (std::size_t i = 0; i < random_pairs; ++i) {
    const ParamVector& x = anchors[static_cast<std::size_t>(rng.below(anchors.size()))];
    ParamVector y = x;
    Vector noise(x.total_size());
    for (Eigen::Index j = 0; j < noise.size(); ++j) noise(j) = rng.normal();
    const double scale_to = radius * rng.uniform_open() / std::max(noise.norm(), 1e-300);
    for (Eigen::Index j = 0; j < noise.size(); ++j) y.coord(j) += scale_to * noise(j);
    out.emplace_back(x, std::move(y));
  }
  return out;
}

std::vector<std::int64_t> check_descent(const RunRecord& record) {
  std::vector<std::int64_t> violations;
  const auto& rows = record.rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double now = rows[i].f;
    const double next = i + 1 < rows.size() ? rows[i + 1].f : record.f_after_last;
    if (next > now + 1e-12 * std::max(1.0, std::abs(now))) violations.push_back(rows[i].k);
  }
  return violations;
}

namespace {

double min_grad_dual_norm(const RunRecord& record) {
  if (!record.summary.min_grad_dual_norm) {
    throw ConfigError("bound check needs true-gradient metrics in the record");
  }
  return *record.summary.min_grad_dual_norm;
}

double require_delta(const RunRecord& record, const char* who) {
  if (!record.summary.delta) throw ConfigError(std::string(who) + ": f* unknown, cannot evaluate Delta");
  return std::max(0.0, *record.summary.delta);
}

/// a / b with a/inf = 0.
double safe_div(double a, double b) { return std::isinf(b) ? 0.0 : a / b; }

BoundReport finish(BoundReport r) {
  r.pass = r.preconditions_met && r.lhs <= r.rhs * (1.0 + kBoundSlack);
  return r;
}

}  // namespace

BoundReport check_bound_det_ggnc(const RunRecord& record, double L0, double L1, double gamma, double rho) {
  BoundReport r;
  r.name = "det_ggnc";
  r.n = static_cast<std::int64_t>(record.rows.size());
  const double delta = require_delta(record, "check_bound_det_ggnc");
  r.lhs = min_grad_dual_norm(record);
  const double n = static_cast<double>(std::max<std::int64_t>(r.n, 1));
  r.rhs = std::sqrt(delta / (gamma * n)) + safe_div(2.0 * delta, gamma * rho * n);
  const double limit = 1.0 / (L0 + (std::isinf(rho) ? (L1 > 0.0 ? rho : 0.0) : rho * L1));
  r.preconditions_met = gamma <= limit * (1.0 + 1e-12);
  if (!r.preconditions_met) r.note = "gamma > 1/(L0 + rho L1)";
  return finish(r);
}

BoundReport check_bound_uscg_neighborhood(const RunRecord& record, double L, double gamma, double rho) {
  BoundReport r;
  r.name = "uscg_neighborhood";
  r.n = static_cast<std::int64_t>(record.rows.size());
  const double delta = require_delta(record, "check_bound_uscg_neighborhood");
  r.lhs = min_grad_dual_norm(record);
  const double n = static_cast<double>(std::max<std::int64_t>(r.n, 1));
  r.rhs = delta / (gamma * rho * n) + L * gamma * rho / 2.0;
  r.preconditions_met = std::isfinite(rho) && gamma > 0.0;
  return finish(r);
}

BoundReport check_bound_det_uscg(const RunRecord& record, double L0, double L1, double gamma, double rho) {
  BoundReport r;
  r.name = "det_uscg";
  r.n = static_cast<std::int64_t>(record.rows.size());
  const double delta = require_delta(record, "check_bound_det_uscg");
  r.lhs = min_grad_dual_norm(record);
  const double n = static_cast<double>(std::max<std::int64_t>(r.n, 1));
  r.rhs = 2.0 * delta / (gamma * rho * n) + 2.0 * L0 * gamma * rho;
  r.preconditions_met = std::isfinite(rho) && (L1 == 0.0 || gamma * rho < 1.0 / (2.0 * L1));
  if (!r.preconditions_met) r.note = "gamma rho >= 1/(2 L1)";
  return finish(r);
}

BoundReport check_bound_wolfe(const RunRecord& record, double L, double beta, double gamma, double rho) {
  BoundReport r;
  r.name = "wolfe_gap";
  r.n = static_cast<std::int64_t>(record.rows.size());
  const double delta = require_delta(record, "check_bound_wolfe");
  if (!record.summary.min_wolfe_gap) throw ConfigError("check_bound_wolfe: record has no Wolfe gaps");
  r.lhs = *record.summary.min_wolfe_gap;
  const double n = static_cast<double>(std::max<std::int64_t>(r.n, 1));
  r.rhs = 2.0 * beta * std::sqrt(delta / (gamma * n)) + safe_div(2.0 * delta, gamma * rho * n);
  r.preconditions_met = gamma <= (1.0 / L) * (1.0 + 1e-12) && rho <= L * (1.0 + 1e-12);
  if (!r.preconditions_met) r.note = "need gamma <= 1/L and rho <= L";
  return finish(r);
}

EstimatorStats estimator_error_stats(const Problem& problem, const OptimizerConfig& config,
                                     const std::vector<std::uint64_t>& seeds) {
  EstimatorStats out;
  const auto n = static_cast<std::size_t>(config.horizon);
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  RunOptions options;
  options.store_trajectory = false;
  for (std::uint64_t seed : seeds) {
    const RunRecord rec = run(problem, config, seed, options);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = rec.rows[i].lambda_sq.value_or(0.0);
      sum[i] += v;
      sum_sq[i] += v * v;
    }
  }
  const double s = static_cast<double>(seeds.size());
  out.seeds = seeds.size();
  out.mean_lambda_sq.resize(n);
  out.stderr_lambda_sq.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / s;
    const double var = s > 1 ? std::max(0.0, (sum_sq[i] - s * mean * mean) / (s - 1.0)) : 0.0;
    out.mean_lambda_sq[i] = mean;
    out.stderr_lambda_sq[i] = std::sqrt(var / s);
  }
  return out;
}

double ema_stationary_variance(double alpha, double sigma_sq) { return alpha * sigma_sq / (2.0 - alpha); }

double fit_horizon_constant(const std::vector<double>& mean_lambda_sq, double sigma_sq, std::int64_t n) {
  const double root_n = std::sqrt(static_cast<double>(n));
  double c = 0.0;
  for (double m : mean_lambda_sq) c = std::max(c, m * root_n / 2.0 - sigma_sq);
  return c;
}

}  // namespace nonclip
