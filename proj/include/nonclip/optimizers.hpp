#pragma once

#include "nonclip/estimator.hpp"
#include "nonclip/geometry.hpp"
#include "nonclip/param_space.hpp"
#include "nonclip/problems.hpp"
#include "nonclip/record.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace nonclip {

enum class Algorithm {
  ggnc,
  uscg,
  sd,
  cg_open_loop,
  s3cg_v1,
  s3cg_v2,
  uclipped_scion,
  clipped_scion_v1,
  clipped_scion_v2,
  clipped_gd,
};

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);
/// Algorithms whose iterates stay in a ball (S3CG, ClippedScion, open-loop CG).
bool is_constrained(Algorithm a);

/// Never clip.
inline constexpr double kNoClip = std::numeric_limits<double>::infinity();

enum class ShortStepVariant { v1, v2 };

/// `ggnc_bridge` replaces v^k = x^k - beta lmo(d^k) by -beta lmo(d^k), which turns the
/// variant-1 short step into a GGNC step with threshold beta * rho. Test-only.
enum class ShortStepDirection { standard, ggnc_bridge };

struct StepsizeSchedule {
  enum class Kind { constant, linear_decay, warmdown };

  Kind kind = Kind::constant;
  double gamma = 0.1;
  /// Fraction of the horizon spent in the final linear decay (warmdown only).
  double warmdown_fraction = 0.2;

  /// Step size for the 0-based step index k out of n steps.
  double at(std::int64_t k, std::int64_t n) const;

  friend bool operator==(const StepsizeSchedule&, const StepsizeSchedule&) = default;
};

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::ggnc;
  StepsizeSchedule gamma;
  double rho = kNoClip;
  std::optional<double> beta;
  AlphaSchedule alpha = AlphaSchedule::constant(1.0);
  NormSpec norm = NormSpec::euclidean();
  std::int64_t horizon = 100;
  /// Use the exact gradient instead of the stochastic oracle.
  bool deterministic = false;

  /// Throws ConfigError when the config cannot drive a run on `shapes`.
  void validate(const std::vector<Shape>& shapes) const;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

enum class TheoremPreset { det_ggnc, stoch_ggnc, stoch_s3cg };

/// (gamma, rho, alpha) from the theorem parameter choices:
///   det_ggnc:   rho = L0 / L1, gamma = 1 / L0, d^k = grad f(x^k)
///               (with L1 > 0 this gamma is twice the 1/(L0 + rho L1) the bound assumes)
///   stoch_ggnc: alpha = 1/sqrt(n), gamma = 1/(sqrt(n) L0), rho = L0 / (2 n^{1/4} L1)
///   stoch_s3cg: alpha = 1/sqrt(n), gamma = 1/(L sqrt(n)), rho = 1 / n^{1/4}  (variant 1)
/// L1 = 0 gives rho = infinity. `beta` is left unset for the caller.
OptimizerConfig from_theorem(TheoremPreset preset, double L0, double L1, double L, std::int64_t n,
                             NormSpec norm = NormSpec::euclidean());

struct StepOutcome {
  ParamVector x_next;
  double eta = 0.0;
  bool clipped = false;
  /// Movement direction before scaling: x_next = x - gamma_k * eta * v.
  Direction v;
};

StepOutcome ggnc_step(const ParamVector& x, const Direction& d, double gamma_k, double rho, const NormSpec& norm);

StepOutcome s3cg_step(const ParamVector& x, const Direction& d, double gamma_k, double rho, double beta,
                      const NormSpec& norm, ShortStepVariant variant,
                      ShortStepDirection direction = ShortStepDirection::standard);

StepOutcome uclipped_scion_step(const ParamVector& x, const Direction& d, double gamma_k, double rho,
                                const NormSpec& product_norm);

StepOutcome clipped_scion_step(const ParamVector& x, const Direction& d, double gamma_k, double rho,
                               const NormSpec& product_norm, ShortStepVariant variant);

/// x - gamma d#.
StepOutcome sd_step(const ParamVector& x, const Direction& d, double gamma_k, const NormSpec& norm);
/// x + gamma rho lmo(d); moves exactly gamma * rho in the primal norm when d != 0.
StepOutcome uscg_step(const ParamVector& x, const Direction& d, double gamma_k, double rho, const NormSpec& norm);
/// (1 - gamma_k) x + gamma_k beta lmo(d) with gamma_k = 2 / (k + 2), k 0-based.
StepOutcome cg_open_loop_step(const ParamVector& x, const Direction& d, std::int64_t k, double beta,
                              const NormSpec& norm);
/// x - gamma min{1, rho / ||d||_2} d, evaluated literally.
StepOutcome clipped_gd_step(const ParamVector& x, const Direction& d, double gamma_k, double rho);

enum class BaselineKind { sd, uscg, cg_open_loop, clipped_gd };

StepOutcome baseline_step(BaselineKind kind, const ParamVector& x, const Direction& d, double gamma_k, double rho,
                          std::optional<double> beta, const NormSpec& norm, std::int64_t k);

/// Step failure inside run(), tagged with the 1-based iteration.
class IterationError : public std::runtime_error {
 public:
  IterationError(std::int64_t iteration, const std::string& what);
  std::int64_t iteration() const { return iteration_; }

 private:
  std::int64_t iteration_;
};

struct RunOptions {
  bool store_trajectory = true;
  /// Record f*, lambda and Wolfe-gap metrics from the exact gradient.
  bool true_gradient_metrics = true;
  /// Overrides the starting point (default: problem.initial_point(seed)).
  std::optional<ParamVector> initial_point;
};

/// Executes config.horizon steps. Same (problem, config, seed) gives a bitwise-identical record.
RunRecord run(const Problem& problem, const OptimizerConfig& config, std::uint64_t seed,
              const RunOptions& options = {});

/// Scales x (per block for product norms) into the feasible set of a constrained algorithm.
ParamVector feasible_start(const ParamVector& x, const OptimizerConfig& config);

}  // namespace nonclip
