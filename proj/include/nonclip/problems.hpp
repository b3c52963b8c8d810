#pragma once

#include "nonclip/geometry.hpp"
#include "nonclip/param_space.hpp"
#include "nonclip/rng.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nonclip {

/// (L0, L1)-smoothness constants for one geometry:
///   ||grad f(x) - grad f(y)||_* <= (L0 + L1 ||grad f(x)||_*) ||x - y||  when ||x - y|| <= 1/L1.
/// `L` is a global Lipschitz constant of the gradient when one exists.
struct SmoothnessConstants {
  double L0 = 0.0;
  double L1 = 0.0;
  std::optional<double> L;
};

/// Objective with exact and stochastic first-order oracles. Immutable after construction.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual std::vector<Shape> shapes() const = 0;
  virtual double value(const ParamVector& x) const = 0;
  virtual Direction gradient(const ParamVector& x) const = 0;
  /// Unbiased sample of the gradient; all randomness comes from `rng`.
  virtual Direction stochastic_gradient(const ParamVector& x, Rng& rng) const = 0;
  /// Canonical deterministic starting point for `seed`.
  virtual ParamVector initial_point(std::uint64_t seed) const = 0;

  /// Unconstrained infimum, when known.
  virtual std::optional<double> f_star() const { return std::nullopt; }
  /// Global bound sigma^2 on E||g - grad f||_2^2.
  virtual std::optional<double> variance_bound() const { return std::nullopt; }
  /// Bound valid at `x`; defaults to the global bound.
  virtual std::optional<double> variance_bound_at(const ParamVector& x) const;
  virtual std::optional<SmoothnessConstants> constants(NormKind geometry) const;
  /// Lipschitz constant of the gradient over the ball of radius `beta` in `geometry`.
  virtual std::optional<double> smoothness_on_ball(NormKind geometry, double beta) const;
};

using ProblemPtr = std::shared_ptr<const Problem>;

/// f(x) = 1/2 x^T A x - b^T x with additive isotropic Gaussian gradient noise, E||noise||^2 = sigma^2.
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(Matrix a, Vector b, double sigma, double init_scale = 1.0);
  /// Random rotation of log-spaced eigenvalues in [mu, L]; b drawn from `data_seed`.
  static std::shared_ptr<QuadraticProblem> random(Eigen::Index dim, double mu, double L, double sigma,
                                                  std::uint64_t data_seed, double init_scale = 1.0);

  std::string name() const override { return "quadratic"; }
  std::vector<Shape> shapes() const override { return {Shape::vec(b_.size())}; }
  double value(const ParamVector& x) const override;
  Direction gradient(const ParamVector& x) const override;
  Direction stochastic_gradient(const ParamVector& x, Rng& rng) const override;
  ParamVector initial_point(std::uint64_t seed) const override;
  std::optional<double> f_star() const override { return f_star_; }
  std::optional<double> variance_bound() const override { return sigma_ * sigma_; }
  std::optional<SmoothnessConstants> constants(NormKind geometry) const override;
  std::optional<double> smoothness_on_ball(NormKind geometry, double beta) const override;

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const Vector& minimizer() const { return x_star_; }
  double lambda_max() const { return lambda_max_; }

 private:
  Matrix a_;
  Vector b_;
  Vector x_star_;
  double sigma_;
  double init_scale_;
  double lambda_max_ = 0.0;
  double f_star_ = 0.0;
};

/// f(x) = sum_i exp(c_i x_i); (L0, L1)-smooth with L0 = 0, L1 = (e - 1) max|c_i|.
class ExpFamilyProblem final : public Problem {
 public:
  ExpFamilyProblem(Vector c, double sigma, double init_scale = 1.0);
  static std::shared_ptr<ExpFamilyProblem> random(Eigen::Index dim, double sigma, std::uint64_t data_seed,
                                                  double init_scale = 1.0);

  std::string name() const override { return "exp"; }
  std::vector<Shape> shapes() const override { return {Shape::vec(c_.size())}; }
  double value(const ParamVector& x) const override;
  Direction gradient(const ParamVector& x) const override;
  Direction stochastic_gradient(const ParamVector& x, Rng& rng) const override;
  ParamVector initial_point(std::uint64_t seed) const override;
  /// Infimum 0, not attained.
  std::optional<double> f_star() const override { return 0.0; }
  std::optional<double> variance_bound() const override { return sigma_ * sigma_; }
  std::optional<SmoothnessConstants> constants(NormKind geometry) const override;
  std::optional<double> smoothness_on_ball(NormKind geometry, double beta) const override;

  const Vector& coefficients() const { return c_; }

 private:
  Vector c_;
  double sigma_;
  double init_scale_;
};

/// Ridge-regularized logistic regression on seeded synthetic data; minibatch oracle.
class LogisticProblem final : public Problem {
 public:
  LogisticProblem(Eigen::Index samples, Eigen::Index features, double ridge, Eigen::Index batch,
                  std::uint64_t data_seed, double init_scale = 1.0);

  std::string name() const override { return "logistic"; }
  std::vector<Shape> shapes() const override { return {Shape::vec(features_.cols())}; }
  double value(const ParamVector& x) const override;
  Direction gradient(const ParamVector& x) const override;
  Direction stochastic_gradient(const ParamVector& x, Rng& rng) const override;
  ParamVector initial_point(std::uint64_t seed) const override;
  /// Computed by Newton's method at construction.
  std::optional<double> f_star() const override { return f_star_; }
  std::optional<double> variance_bound() const override;
  std::optional<SmoothnessConstants> constants(NormKind geometry) const override;
  std::optional<double> smoothness_on_ball(NormKind geometry, double beta) const override;

 private:
  Vector full_gradient(const Vector& w) const;

  Matrix features_;  // m x p
  Vector labels_;    // +-1
  double ridge_;
  Eigen::Index batch_;
  double init_scale_;
  double f_star_ = 0.0;
};

/// Two-layer tanh network y = W2 tanh(W1 a) with squared loss; parameters (W1: h x p, W2: 1 x h).
class MlpProblem final : public Problem {
 public:
  MlpProblem(Eigen::Index samples, Eigen::Index inputs, Eigen::Index hidden, Eigen::Index batch,
             double label_noise, std::uint64_t data_seed);

  std::string name() const override { return "mlp"; }
  std::vector<Shape> shapes() const override;
  double value(const ParamVector& x) const override;
  Direction gradient(const ParamVector& x) const override;
  Direction stochastic_gradient(const ParamVector& x, Rng& rng) const override;
  ParamVector initial_point(std::uint64_t seed) const override;
  /// Exact minibatch variance at x (no global bound exists).
  std::optional<double> variance_bound_at(const ParamVector& x) const override;

 private:
  /// Loss gradient over the rows listed in `rows` (all rows when empty).
  Direction gradient_over(const ParamVector& x, const std::vector<Eigen::Index>& rows) const;

  Matrix inputs_;  // m x p
  Vector targets_;
  Eigen::Index hidden_;
  Eigen::Index batch_;
};

/// Chained Rosenbrock with additive Gaussian gradient noise; f* = 0 at (1, ..., 1).
class RosenbrockProblem final : public Problem {
 public:
  RosenbrockProblem(Eigen::Index dim, double sigma, double init_scale = 1.0);

  std::string name() const override { return "rosenbrock"; }
  std::vector<Shape> shapes() const override { return {Shape::vec(dim_)}; }
  double value(const ParamVector& x) const override;
  Direction gradient(const ParamVector& x) const override;
  Direction stochastic_gradient(const ParamVector& x, Rng& rng) const override;
  ParamVector initial_point(std::uint64_t seed) const override;
  std::optional<double> f_star() const override { return 0.0; }
  std::optional<double> variance_bound() const override { return sigma_ * sigma_; }

 private:
  Eigen::Index dim_;
  double sigma_;
  double init_scale_;
};

/// Construction parameters shared by every catalog entry; unused fields are ignored.
struct ProblemParams {
  std::string name = "quadratic";
  std::int64_t dim = 10;
  double sigma = 0.0;
  double mu = 1.0;
  double L = 10.0;
  std::int64_t samples = 200;
  std::int64_t hidden = 8;
  std::int64_t batch = 16;
  double ridge = 1e-2;
  double label_noise = 0.1;
  double init_scale = 1.0;
  std::uint64_t data_seed = 7;

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

/// Throws ConfigError for unknown names or invalid parameters.
ProblemPtr make_problem(const ProblemParams& params);

/// Default instance of every registered problem: quadratic, exp, logistic, mlp, rosenbrock.
std::vector<ProblemPtr> catalog();

/// Central differences with per-coordinate step h * max(1, |x_i|).
Direction finite_diff_grad(const Problem& problem, const ParamVector& x, double h = 1e-6);

/// Additive isotropic Gaussian noise with E||noise||_2^2 = sigma^2.
Direction add_isotropic_noise(const Direction& g, double sigma, Rng& rng);

}  // namespace nonclip
