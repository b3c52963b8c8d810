#include "nonclip/optimizers.hpp"

#include "nonclip/diagnostics.hpp"
#include "nonclip/errors.hpp"
#include "nonclip/log.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nonclip {

namespace {

constexpr double kFeasibilitySlack = 1e-9;

struct AlgorithmName {
  Algorithm algorithm;
  const char* name;
};

constexpr AlgorithmName kAlgorithmNames[] = {
    {Algorithm::ggnc, "GGNC"},
    {Algorithm::uscg, "uSCG"},
    {Algorithm::sd, "SD"},
    {Algorithm::cg_open_loop, "CG_open_loop"},
    {Algorithm::s3cg_v1, "S3CG_v1"},
    {Algorithm::s3cg_v2, "S3CG_v2"},
    {Algorithm::uclipped_scion, "uClippedScion"},
    {Algorithm::clipped_scion_v1, "ClippedScion_v1"},
    {Algorithm::clipped_scion_v2, "ClippedScion_v2"},
    {Algorithm::clipped_gd, "ClippedGD"},
};

bool is_clipped_scion(Algorithm a) {
  return a == Algorithm::uclipped_scion || a == Algorithm::clipped_scion_v1 || a == Algorithm::clipped_scion_v2;
}

/// x - scale * v
ParamVector move(const ParamVector& x, double scale, const Direction& v) { return axpy(-scale, v, x); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_simplicial(double gamma_k, double eta) {
  const double t = gamma_k * eta;
  if (!(t <= 1.0)) {
    throw ConfigError("gamma_k * eta_k = " + fmt(t) + " exceeds 1 (gamma_k = " + fmt(gamma_k) +
                      ", eta_k = " + fmt(eta) + "); need gamma * rho <= 1");
  }
}

/// min{rho, numerator / denominator} with 0/0 := 0 and a nonnegative numerator.
double short_step_eta(double numerator, double denominator, double rho, bool& clipped) {
  numerator = std::max(0.0, numerator);
  if (denominator <= 0.0) {
    clipped = false;
    return 0.0;
  }
  const double ratio = numerator / denominator;
  clipped = rho <= ratio;
  return clipped ? rho : ratio;
}

}  // namespace

std::string to_string(Algorithm a) {
  for (const auto& entry : kAlgorithmNames) {
    if (entry.algorithm == a) return entry.name;
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& entry : kAlgorithmNames) {
    if (name == entry.name) return entry.algorithm;
  }
  std::string valid;
  for (const auto& entry : kAlgorithmNames) valid += std::string(valid.empty() ? "" : ", ") + entry.name;
  throw ConfigError("unknown algorithm '" + name + "' (expected one of " + valid + ")");
}

bool is_constrained(Algorithm a) {
  switch (a) {
    case Algorithm::cg_open_loop:
    case Algorithm::s3cg_v1:
    case Algorithm::s3cg_v2:
    case Algorithm::clipped_scion_v1:
    case Algorithm::clipped_scion_v2:
      return true;
    default:
      return false;
  }
}

double StepsizeSchedule::at(std::int64_t k, std::int64_t n) const {
  const double frac = n > 0 ? static_cast<double>(k) / static_cast<double>(n) : 0.0;
  switch (kind) {
    case Kind::constant:
      return gamma;
    case Kind::linear_decay:
      return gamma * (1.0 - frac);
    case Kind::warmdown: {
      const double remaining = 1.0 - frac;
      if (warmdown_fraction <= 0.0 || remaining >= warmdown_fraction) return gamma;
      return gamma * remaining / warmdown_fraction;
    }
  }
  return gamma;
}

void OptimizerConfig::validate(const std::vector<Shape>& shapes) const {
  if (horizon < 1) throw ConfigError("optimizer.horizon must be >= 1");
  if (!(gamma.gamma >= 0.0) || !std::isfinite(gamma.gamma)) throw ConfigError("optimizer.gamma must be finite and >= 0");
  if (gamma.kind == StepsizeSchedule::Kind::warmdown &&
      !(gamma.warmdown_fraction > 0.0 && gamma.warmdown_fraction <= 1.0)) {
    throw ConfigError("optimizer.warmdown_fraction must lie in (0, 1]");
  }
  if (!(rho > 0.0)) throw ConfigError("optimizer.rho must be > 0 (use inf for no clipping)");
  if (algorithm == Algorithm::uscg && !std::isfinite(rho)) throw ConfigError("uSCG needs a finite rho");
  alpha.validate();
  const bool needs_beta = algorithm == Algorithm::cg_open_loop || algorithm == Algorithm::s3cg_v1 ||
                          algorithm == Algorithm::s3cg_v2;
  if (needs_beta && !(beta && *beta > 0.0 && std::isfinite(*beta))) {
    throw ConfigError(to_string(algorithm) + " needs optimizer.beta > 0");
  }
  if (is_clipped_scion(algorithm) && !norm.is_product()) {
    throw ConfigError(to_string(algorithm) + " needs a product norm");
  }
  const NormSpec geometry = algorithm == Algorithm::clipped_gd ? NormSpec::euclidean() : norm;
  try {
    geometry.validate_for(shapes);
  } catch (const StructuralError& e) {
    throw ConfigError(std::string("optimizer.norm: ") + e.what());
  }
}

OptimizerConfig from_theorem(TheoremPreset preset, double L0, double L1, double L, std::int64_t n, NormSpec norm) {
  if (n < 1) throw ConfigError("from_theorem: n must be >= 1");
  OptimizerConfig c;
  c.norm = std::move(norm);
  c.horizon = n;
  const double nd = static_cast<double>(n);
  switch (preset) {
    case TheoremPreset::det_ggnc:
      if (!(L0 > 0.0)) throw ConfigError("det_ggnc preset needs L0 > 0");
      c.algorithm = Algorithm::ggnc;
      c.gamma.gamma = 1.0 / L0;
      c.rho = L1 > 0.0 ? L0 / L1 : kNoClip;
      c.alpha = AlphaSchedule::constant(1.0);
      c.deterministic = true;
      break;
    case TheoremPreset::stoch_ggnc:
      if (!(L0 > 0.0)) throw ConfigError("stoch_ggnc preset needs L0 > 0");
      c.algorithm = Algorithm::ggnc;
      c.gamma.gamma = 1.0 / (std::sqrt(nd) * L0);
      c.rho = L1 > 0.0 ? L0 / (2.0 * std::pow(nd, 0.25) * L1) : kNoClip;
      c.alpha = AlphaSchedule::from_horizon(n);
      break;
    case TheoremPreset::stoch_s3cg:
      if (!(L > 0.0)) throw ConfigError("stoch_s3cg preset needs L > 0");
      c.algorithm = Algorithm::s3cg_v1;
      c.gamma.gamma = 1.0 / (L * std::sqrt(nd));
      c.rho = 1.0 / std::pow(nd, 0.25);
      c.alpha = AlphaSchedule::from_horizon(n);
      break;
  }
  return c;
}

// --- steps ------------------------------------------------------------------

StepOutcome ggnc_step(const ParamVector& x, const Direction& d, double gamma_k, double rho, const NormSpec& norm) {
  require_same_structure(x, d, "ggnc_step");
  StepOutcome out;
  out.v = scale(-1.0, lmo(norm, d));
  const double dv = inner(d, out.v);
  out.clipped = rho <= dv;
  out.eta = out.clipped ? rho : dv;
  out.x_next = move(x, gamma_k * out.eta, out.v);
  return out;
}

StepOutcome s3cg_step(const ParamVector& x, const Direction& d, double gamma_k, double rho, double beta,
                      const NormSpec& norm, ShortStepVariant variant, ShortStepDirection direction) {
  require_same_structure(x, d, "s3cg_step");
  const ParamVector extreme = scale(beta, lmo(norm, d));
  StepOutcome out;
  if (direction == ShortStepDirection::standard) {
    const double xn = primal_norm(norm, x);
    if (xn > beta * (1.0 + kFeasibilitySlack)) {
      throw ConfigError("s3cg_step: iterate norm " + fmt(xn) + " exceeds beta = " + fmt(beta));
    }
    out.v = subtract(x, extreme);
  } else {
    out.v = scale(-1.0, extreme);
  }
  const double dv = inner(d, out.v);
  double denom = 0.0;
  if (variant == ShortStepVariant::v1) {
    const double vn = primal_norm(norm, out.v);
    denom = vn * vn;
  } else {
    denom = 4.0 * beta * beta;
  }
  out.eta = short_step_eta(dv, denom, rho, out.clipped);
  if (direction == ShortStepDirection::standard) require_simplicial(gamma_k, out.eta);
  out.x_next = move(x, gamma_k * out.eta, out.v);
  return out;
}

namespace {

/// -r_l lmo_l(d_l) per block, through each child norm on its own block.
Direction scion_extreme(const Direction& d, const NormSpec& product_norm) {
  if (!product_norm.is_product()) throw StructuralError("ClippedScion needs a product norm");
  product_norm.validate_for(d.shapes());
  std::vector<ParamBlock> blocks;
  blocks.reserve(d.num_blocks());
  for (std::size_t l = 0; l < d.num_blocks(); ++l) {
    const auto& child = product_norm.children[l];
    const Direction block_lmo = lmo(child.norm, ParamVector{d.block(l)});
    blocks.push_back(block_lmo.block(0));
    blocks.back().data() *= child.radius;
  }
  return ParamVector(std::move(blocks));
}

}  // namespace

StepOutcome uclipped_scion_step(const ParamVector& x, const Direction& d, double gamma_k, double rho,
                                const NormSpec& product_norm) {
  require_same_structure(x, d, "uclipped_scion_step");
  StepOutcome out;
  out.v = scale(-1.0, scion_extreme(d, product_norm));
  double dv = 0.0;
  for (std::size_t l = 0; l < d.num_blocks(); ++l) dv += d.block(l).flat().dot(out.v.block(l).flat());
  out.clipped = rho <= dv;
  out.eta = out.clipped ? rho : dv;
  out.x_next = move(x, gamma_k * out.eta, out.v);
  return out;
}

StepOutcome clipped_scion_step(const ParamVector& x, const Direction& d, double gamma_k, double rho,
                               const NormSpec& product_norm, ShortStepVariant variant) {
  require_same_structure(x, d, "clipped_scion_step");
  const auto norms = block_norms(product_norm, x);
  for (std::size_t l = 0; l < norms.size(); ++l) {
    const double r = product_norm.children[l].radius;
    if (norms[l] > r * (1.0 + kFeasibilitySlack)) {
      throw ConfigError("clipped_scion_step: block " + std::to_string(l) + " norm " + fmt(norms[l]) +
                        " exceeds radius " + fmt(r));
    }
  }
  StepOutcome out;
  out.v = subtract(x, scion_extreme(d, product_norm));
  double dv = 0.0;
  for (std::size_t l = 0; l < d.num_blocks(); ++l) dv += d.block(l).flat().dot(out.v.block(l).flat());
  double denom = 4.0;
  if (variant == ShortStepVariant::v1) {
    denom = 0.0;
    for (double n : block_norms(product_norm, out.v)) denom = std::max(denom, n * n);
  }
  out.eta = short_step_eta(dv, denom, rho, out.clipped);
  require_simplicial(gamma_k, out.eta);
  out.x_next = move(x, gamma_k * out.eta, out.v);
  return out;
}

StepOutcome sd_step(const ParamVector& x, const Direction& d, double gamma_k, const NormSpec& norm) {
  require_same_structure(x, d, "sd_step");
  StepOutcome out;
  out.v = scale(-1.0, lmo(norm, d));
  out.eta = inner(d, out.v);
  out.x_next = axpy(-gamma_k, sharp(norm, d), x);
  return out;
}

StepOutcome uscg_step(const ParamVector& x, const Direction& d, double gamma_k, double rho, const NormSpec& norm) {
  require_same_structure(x, d, "uscg_step");
  StepOutcome out;
  const Direction l = lmo(norm, d);
  out.v = scale(-1.0, l);
  out.eta = rho;
  out.clipped = true;
  out.x_next = axpy(gamma_k * rho, l, x);
  return out;
}

StepOutcome cg_open_loop_step(const ParamVector& x, const Direction& d, std::int64_t k, double beta,
                              const NormSpec& norm) {
  require_same_structure(x, d, "cg_open_loop_step");
  const double gamma_k = 2.0 / (static_cast<double>(k) + 2.0);
  const ParamVector extreme = scale(beta, lmo(norm, d));
  StepOutcome out;
  out.v = subtract(x, extreme);
  out.eta = 1.0;
  if (gamma_k == 1.0) {
    out.x_next = extreme;
  } else {
    out.x_next = axpy(gamma_k, extreme, scale(1.0 - gamma_k, x));
  }
  return out;
}

StepOutcome clipped_gd_step(const ParamVector& x, const Direction& d, double gamma_k, double rho) {
  require_same_structure(x, d, "clipped_gd_step");
  const double gn = euclidean_norm(d);
  const double tau = gn == 0.0 ? 1.0 : std::min(1.0, rho / gn);
  StepOutcome out;
  out.clipped = tau < 1.0;
  out.eta = std::min(rho, gn);
  out.v = gn == 0.0 ? ParamVector::zeros_like(d) : scale(1.0 / gn, d);
  out.x_next = axpy(-gamma_k * tau, d, x);
  return out;
}

StepOutcome baseline_step(BaselineKind kind, const ParamVector& x, const Direction& d, double gamma_k, double rho,
                          std::optional<double> beta, const NormSpec& norm, std::int64_t k) {
  switch (kind) {
    case BaselineKind::sd:
      return sd_step(x, d, gamma_k, norm);
    case BaselineKind::uscg:
      return uscg_step(x, d, gamma_k, rho, norm);
    case BaselineKind::cg_open_loop:
      if (!beta) throw ConfigError("CG_open_loop needs beta");
      return cg_open_loop_step(x, d, k, *beta, norm);
    case BaselineKind::clipped_gd:
      return clipped_gd_step(x, d, gamma_k, rho);
  }
  throw ConfigError("baseline_step: unknown kind");
}

// --- run loop ---------------------------------------------------------------

IterationError::IterationError(std::int64_t iteration, const std::string& what)
    : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

ParamVector feasible_start(const ParamVector& x, const OptimizerConfig& config) {
  if (!is_constrained(config.algorithm)) return x;
  if (is_clipped_scion(config.algorithm)) {
    ParamVector out = x;
    const auto norms = block_norms(config.norm, x);
    for (std::size_t l = 0; l < norms.size(); ++l) {
      const double r = config.norm.children[l].radius;
      if (norms[l] > r) out.block(l).data() *= r / norms[l];
    }
    return out;
  }
  const double n = primal_norm(config.norm, x);
  const double beta = config.beta.value_or(1.0);
  return n > beta ? scale(beta / n, x) : x;
}

namespace {

/// Geometry a run's metrics are reported in.
NormSpec metric_norm(const OptimizerConfig& config) {
  return config.algorithm == Algorithm::clipped_gd ? NormSpec::euclidean() : config.norm;
}

/// Radius of the feasible set in metric_norm().
double constraint_radius(const OptimizerConfig& config) {
  if (is_clipped_scion(config.algorithm)) return 1.0;
  return config.beta.value_or(1.0);
}

StepOutcome dispatch_step(const OptimizerConfig& c, const ParamVector& x, const Direction& d, double gamma_k,
                          std::int64_t step_index) {
  switch (c.algorithm) {
    case Algorithm::ggnc:
      return ggnc_step(x, d, gamma_k, c.rho, c.norm);
    case Algorithm::uscg:
      return uscg_step(x, d, gamma_k, c.rho, c.norm);
    case Algorithm::sd:
      return sd_step(x, d, gamma_k, c.norm);
    case Algorithm::cg_open_loop:
      return cg_open_loop_step(x, d, step_index, *c.beta, c.norm);
    case Algorithm::s3cg_v1:
      return s3cg_step(x, d, gamma_k, c.rho, *c.beta, c.norm, ShortStepVariant::v1);
    case Algorithm::s3cg_v2:
      return s3cg_step(x, d, gamma_k, c.rho, *c.beta, c.norm, ShortStepVariant::v2);
    case Algorithm::uclipped_scion:
      return uclipped_scion_step(x, d, gamma_k, c.rho, c.norm);
    case Algorithm::clipped_scion_v1:
      return clipped_scion_step(x, d, gamma_k, c.rho, c.norm, ShortStepVariant::v1);
    case Algorithm::clipped_scion_v2:
      return clipped_scion_step(x, d, gamma_k, c.rho, c.norm, ShortStepVariant::v2);
    case Algorithm::clipped_gd:
      return clipped_gd_step(x, d, gamma_k, c.rho);
  }
  throw ConfigError("unknown algorithm");
}

constexpr std::uint64_t kOracleStream = 10;
constexpr std::uint64_t kOutputStream = 11;

}  // namespace

RunRecord run(const Problem& problem, const OptimizerConfig& config, std::uint64_t seed, const RunOptions& options) {
  config.validate(problem.shapes());
  const std::int64_t n = config.horizon;
  const NormSpec geometry = metric_norm(config);
  const bool constrained = is_constrained(config.algorithm);
  const double radius = constraint_radius(config);

  RunRecord rec;
  rec.problem = problem.name();
  rec.algorithm = to_string(config.algorithm);
  rec.seed = seed;
  rec.rows.reserve(static_cast<std::size_t>(n));
  if (options.store_trajectory) rec.trajectory.reserve(static_cast<std::size_t>(n));

  const Rng root(seed);
  Rng oracle = root.split(kOracleStream);
  Rng output = root.split(kOutputStream);
  // Drawn up front so the output iterate does not depend on store_trajectory.
  rec.summary.xbar_index = static_cast<std::int64_t>(output.below(static_cast<std::uint64_t>(n))) + 1;

  ParamVector x = feasible_start(options.initial_point.value_or(problem.initial_point(seed)), config);
  if (x.shapes() != problem.shapes()) throw StructuralError("run: initial point does not match problem layout");
  rec.initial = x;
  MomentumState momentum(problem.shapes());

  const auto f_star = problem.f_star();
  double f_x = problem.value(x);
  if (f_star) rec.summary.delta = f_x - *f_star;

  log_debug("run " + rec.problem + "/" + rec.algorithm + " seed " + std::to_string(seed) + " n " + std::to_string(n));

  for (std::int64_t k = 1; k <= n; ++k) {
    try {
      const std::int64_t step_index = k - 1;
      const double gamma_k = config.gamma.at(step_index, n);
      const Direction g = config.deterministic ? problem.gradient(x) : problem.stochastic_gradient(x, oracle);
      const Direction& d = momentum.update(g, config.alpha.at(k));

      IterationRow row;
      row.k = k;
      row.f = f_x;
      row.gamma_k = config.algorithm == Algorithm::cg_open_loop ? 2.0 / (static_cast<double>(step_index) + 2.0)
                                                                 : gamma_k;
      row.dual_norm = dual_norm(geometry, d);
      row.param_norm = primal_norm(geometry, x);
      if (options.true_gradient_metrics) {
        const Direction true_grad = config.deterministic ? g : problem.gradient(x);
        row.grad_dual_norm = dual_norm(geometry, true_grad);
        row.lambda_sq = squared_norm(subtract(d, true_grad));
        if (constrained) row.wolfe_gap = wolfe_gap(true_grad, x, radius, geometry);
      }

      StepOutcome step = dispatch_step(config, x, d, gamma_k, step_index);
      row.eta = step.eta;
      row.clipped = step.clipped;
      require_finite(step.x_next, "step");

      if (k == rec.summary.xbar_index) {
        rec.xbar = x;
        rec.summary.f_xbar = f_x;
      }
      if (options.store_trajectory) rec.trajectory.push_back(x);
      rec.rows.push_back(row);

      x = std::move(step.x_next);
      f_x = problem.value(x);
      if (!std::isfinite(f_x)) throw NumericalError("objective is not finite");
    } catch (const IterationError&) {
      throw;
    } catch (const std::exception& e) {
      throw IterationError(k, e.what());
    }
  }

  rec.final_iterate = x;
  rec.f_after_last = f_x;
  rec.summary.f_final = f_x;
  for (const auto& row : rec.rows) {
    if (row.grad_dual_norm) {
      rec.summary.min_grad_dual_norm = std::min(rec.summary.min_grad_dual_norm.value_or(*row.grad_dual_norm),
                                                *row.grad_dual_norm);
    }
    if (row.wolfe_gap) {
      rec.summary.min_wolfe_gap = std::min(rec.summary.min_wolfe_gap.value_or(*row.wolfe_gap), *row.wolfe_gap);
    }
  }
  return rec;
}

}  // namespace nonclip
