#include "nonclip/problems.hpp"

#include "nonclip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nonclip {

namespace {

// Streams split off a seed; documented in docs/rng.md.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kDataStream = 2;

Vector normal_vector(Eigen::Index n, Rng& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

Matrix normal_matrix(Eigen::Index m, Eigen::Index n, Rng& rng) {
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

Eigen::Map<const Vector> single_vector(const ParamVector& x, Eigen::Index n, const char* who) {
  if (x.num_blocks() != 1 || x.block(0).shape() != Shape::vec(n)) {
    throw StructuralError(std::string(who) + ": expected one vector block of size " + std::to_string(n));
  }
  return x.block(0).flat();
}

ParamVector wrap(const Vector& v) { return ParamVector{ParamBlock::vector(v)}; }

double log1p_exp(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<Eigen::Index> sample_rows(Eigen::Index m, Eigen::Index batch, Rng& rng) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(batch));
  for (auto& r : rows) r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)));
  return rows;
}

}  // namespace

std::optional<double> Problem::variance_bound_at(const ParamVector&) const { return variance_bound(); }
std::optional<SmoothnessConstants> Problem::constants(NormKind) const { return std::nullopt; }
std::optional<double> Problem::smoothness_on_ball(NormKind, double) const { return std::nullopt; }

Direction add_isotropic_noise(const Direction& g, double sigma, Rng& rng) {
  if (sigma == 0.0) return g;
  Direction out = g;
  const double per_coord = sigma / std::sqrt(static_cast<double>(g.total_size()));
  for (std::size_t l = 0; l < out.num_blocks(); ++l) {
    auto flat = out.block(l).flat();
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) += per_coord * rng.normal();
  }
  return out;
}

// --- quadratic --------------------------------------------------------------

QuadraticProblem::QuadraticProblem(Matrix a, Vector b, double sigma, double init_scale)
    : a_(std::move(a)), b_(std::move(b)), sigma_(sigma), init_scale_(init_scale) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size() || b_.size() == 0) {
    throw ConfigError("quadratic: A must be square and match b");
  }
  if (!(sigma_ >= 0.0)) throw ConfigError("quadratic: sigma must be >= 0");
  const Eigen::MatrixXd sym = 0.5 * (a_ + a_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw ConfigError("quadratic: A must be positive definite");
  lambda_max_ = eig.eigenvalues().maxCoeff();
  x_star_ = Eigen::MatrixXd(a_).ldlt().solve(b_);
  f_star_ = -0.5 * b_.dot(x_star_);
}

std::shared_ptr<QuadraticProblem> QuadraticProblem::random(Eigen::Index dim, double mu, double L, double sigma,
                                                           std::uint64_t data_seed, double init_scale) {
  if (dim < 1 || !(mu > 0.0) || !(L >= mu)) throw ConfigError("quadratic: need dim >= 1 and 0 < mu <= L");
  Rng rng = Rng(data_seed).split(kDataStream);
  const Eigen::MatrixXd g = normal_matrix(dim, dim, rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Vector lambdas(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double t = dim == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(dim - 1);
    lambdas(i) = mu * std::pow(L / mu, t);
  }
  Matrix a = q * lambdas.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose()).eval();
  Vector b = normal_vector(dim, rng);
  return std::make_shared<QuadraticProblem>(std::move(a), std::move(b), sigma, init_scale);
}

double QuadraticProblem::value(const ParamVector& x) const {
  const auto v = single_vector(x, b_.size(), "quadratic");
  return 0.5 * v.dot(a_ * v) - b_.dot(v);
}

Direction QuadraticProblem::gradient(const ParamVector& x) const {
  const auto v = single_vector(x, b_.size(), "quadratic");
  return wrap(a_ * v - b_);
}

Direction QuadraticProblem::stochastic_gradient(const ParamVector& x, Rng& rng) const {
  return add_isotropic_noise(gradient(x), sigma_, rng);
}

ParamVector QuadraticProblem::initial_point(std::uint64_t seed) const {
  Rng rng = Rng(seed).split(kInitStream);
  return wrap(x_star_ + init_scale_ * normal_vector(b_.size(), rng));
}

std::optional<SmoothnessConstants> QuadraticProblem::constants(NormKind geometry) const {
  switch (geometry) {
    case NormKind::euclidean:
      return SmoothnessConstants{lambda_max_, 0.0, lambda_max_};
    case NormKind::max_norm: {
      // ||A d||_1 <= sum_ij |A_ij| ||d||_inf
      const double l = a_.cwiseAbs().sum();
      return SmoothnessConstants{l, 0.0, l};
    }
    default:
      return std::nullopt;
  }
}

std::optional<double> QuadraticProblem::smoothness_on_ball(NormKind geometry, double) const {
  const auto c = constants(geometry);
  if (!c) return std::nullopt;
  return c->L;
}

// --- exp family -------------------------------------------------------------

ExpFamilyProblem::ExpFamilyProblem(Vector c, double sigma, double init_scale)
    : c_(std::move(c)), sigma_(sigma), init_scale_(init_scale) {
  if (c_.size() == 0 || c_.cwiseAbs().minCoeff() == 0.0) throw ConfigError("exp: coefficients must be nonzero");
  if (!(sigma_ >= 0.0)) throw ConfigError("exp: sigma must be >= 0");
}

std::shared_ptr<ExpFamilyProblem> ExpFamilyProblem::random(Eigen::Index dim, double sigma, std::uint64_t data_seed,
                                                           double init_scale) {
  if (dim < 1) throw ConfigError("exp: dim must be >= 1");
  Rng rng = Rng(data_seed).split(kDataStream);
  Vector c(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double mag = 0.5 + rng.uniform();
    c(i) = rng.uniform() < 0.5 ? -mag : mag;
  }
  return std::make_shared<ExpFamilyProblem>(std::move(c), sigma, init_scale);
}

double ExpFamilyProblem::value(const ParamVector& x) const {
  const auto v = single_vector(x, c_.size(), "exp");
  return c_.cwiseProduct(v).array().exp().sum();
}

Direction ExpFamilyProblem::gradient(const ParamVector& x) const {
  const auto v = single_vector(x, c_.size(), "exp");
  return wrap(c_.cwiseProduct(c_.cwiseProduct(v).array().exp().matrix()));
}

Direction ExpFamilyProblem::stochastic_gradient(const ParamVector& x, Rng& rng) const {
  return add_isotropic_noise(gradient(x), sigma_, rng);
}

ParamVector ExpFamilyProblem::initial_point(std::uint64_t seed) const {
  Rng rng = Rng(seed).split(kInitStream);
  return wrap(init_scale_ * normal_vector(c_.size(), rng));
}

std::optional<SmoothnessConstants> ExpFamilyProblem::constants(NormKind geometry) const {
  // |g_i(x) - g_i(y)| = |g_i(x)| |exp(c_i (y_i - x_i)) - 1| <= (e - 1) |c_i| |g_i(x)| |x_i - y_i|
  // whenever |c_i| |x_i - y_i| <= 1; summing gives the same constant for (l2, l2) and (linf, l1).
  if (geometry != NormKind::euclidean && geometry != NormKind::max_norm) return std::nullopt;
  return SmoothnessConstants{0.0, (std::numbers::e - 1.0) * c_.cwiseAbs().maxCoeff(), std::nullopt};
}

std::optional<double> ExpFamilyProblem::smoothness_on_ball(NormKind geometry, double beta) const {
  const Vector curv = c_.cwiseAbs2().cwiseProduct((c_.cwiseAbs() * beta).array().exp().matrix());
  switch (geometry) {
    case NormKind::euclidean:
      return curv.maxCoeff();
    case NormKind::max_norm:
      return curv.sum();
    default:
      return std::nullopt;
  }
}

// --- logistic ---------------------------------------------------------------

LogisticProblem::LogisticProblem(Eigen::Index samples, Eigen::Index features, double ridge, Eigen::Index batch,
                                 std::uint64_t data_seed, double init_scale)
    : ridge_(ridge), batch_(batch), init_scale_(init_scale) {
  if (samples < 1 || features < 1 || batch < 1) throw ConfigError("logistic: sizes must be >= 1");
  if (!(ridge > 0.0)) throw ConfigError("logistic: ridge must be > 0");
  Rng rng = Rng(data_seed).split(kDataStream);
  features_ = normal_matrix(samples, features, rng);
  const Vector truth = normal_vector(features, rng);
  labels_.resize(samples);
  for (Eigen::Index i = 0; i < samples; ++i) {
    const double margin = features_.row(i).dot(truth) + 0.5 * rng.normal();
    labels_(i) = margin >= 0.0 ? 1.0 : -1.0;
  }

  Vector w = Vector::Zero(features);
  const double m = static_cast<double>(samples);
  for (int it = 0; it < 100; ++it) {
    const Vector g = full_gradient(w);
    if (g.norm() <= 1e-15) break;
    Eigen::MatrixXd h = ridge_ * Eigen::MatrixXd::Identity(features, features);
    for (Eigen::Index i = 0; i < samples; ++i) {
      const double s = sigmoid(labels_(i) * features_.row(i).dot(w));
      h.noalias() += (s * (1.0 - s) / m) * features_.row(i).transpose() * features_.row(i);
    }
    w -= h.ldlt().solve(g);
  }
  f_star_ = value(wrap(w));
}

Vector LogisticProblem::full_gradient(const Vector& w) const {
  const Vector margins = labels_.cwiseProduct(features_ * w);
  Vector weights(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) weights(i) = -labels_(i) * sigmoid(-margins(i));
  return features_.transpose() * weights / static_cast<double>(margins.size()) + ridge_ * w;
}

double LogisticProblem::value(const ParamVector& x) const {
  const auto w = single_vector(x, features_.cols(), "logistic");
  const Vector margins = labels_.cwiseProduct(features_ * w);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) loss += log1p_exp(-margins(i));
  return loss / static_cast<double>(margins.size()) + 0.5 * ridge_ * w.squaredNorm();
}

Direction LogisticProblem::gradient(const ParamVector& x) const {
  return wrap(full_gradient(single_vector(x, features_.cols(), "logistic")));
}

Direction LogisticProblem::stochastic_gradient(const ParamVector& x, Rng& rng) const {
  const auto w = single_vector(x, features_.cols(), "logistic");
  Vector g = ridge_ * w;
  const auto rows = sample_rows(features_.rows(), batch_, rng);
  for (Eigen::Index r : rows) {
    const double margin = labels_(r) * features_.row(r).dot(w);
    g += (-labels_(r) * sigmoid(-margin) / static_cast<double>(batch_)) * features_.row(r).transpose();
  }
  return wrap(g);
}

ParamVector LogisticProblem::initial_point(std::uint64_t seed) const {
  Rng rng = Rng(seed).split(kInitStream);
  return wrap(init_scale_ * normal_vector(features_.cols(), rng));
}

std::optional<double> LogisticProblem::variance_bound() const {
  // Per-sample loss gradients have norm <= ||a_i||; a minibatch mean divides the variance by B.
  return features_.rowwise().squaredNorm().maxCoeff() / static_cast<double>(batch_);
}

std::optional<SmoothnessConstants> LogisticProblem::constants(NormKind geometry) const {
  const double m = static_cast<double>(features_.rows());
  const Eigen::MatrixXd gram = features_.transpose() * features_;
  double l = 0.0;
  switch (geometry) {
    case NormKind::euclidean:
      l = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff() / (4.0 * m) + ridge_;
      break;
    case NormKind::max_norm:
      l = gram.cwiseAbs().sum() / (4.0 * m) + ridge_ * static_cast<double>(features_.cols());
      break;
    default:
      return std::nullopt;
  }
  return SmoothnessConstants{l, 0.0, l};
}

std::optional<double> LogisticProblem::smoothness_on_ball(NormKind geometry, double) const {
  const auto c = constants(geometry);
  if (!c) return std::nullopt;
  return c->L;
}

// --- MLP --------------------------------------------------------------------

MlpProblem::MlpProblem(Eigen::Index samples, Eigen::Index inputs, Eigen::Index hidden, Eigen::Index batch,
                       double label_noise, std::uint64_t data_seed)
    : hidden_(hidden), batch_(batch) {
  if (samples < 1 || inputs < 1 || hidden < 1 || batch < 1) throw ConfigError("mlp: sizes must be >= 1");
  Rng rng = Rng(data_seed).split(kDataStream);
  inputs_ = normal_matrix(samples, inputs, rng);
  const Matrix teacher_w1 = normal_matrix(hidden, inputs, rng) / std::sqrt(static_cast<double>(inputs));
  const Matrix teacher_w2 = normal_matrix(1, hidden, rng) / std::sqrt(static_cast<double>(hidden));
  const Matrix h = (inputs_ * teacher_w1.transpose()).array().tanh().matrix();
  targets_ = h * teacher_w2.transpose();
  for (Eigen::Index i = 0; i < samples; ++i) targets_(i) += label_noise * rng.normal();
}

std::vector<Shape> MlpProblem::shapes() const {
  return {Shape::mat(hidden_, inputs_.cols()), Shape::mat(1, hidden_)};
}

namespace {

void check_mlp_layout(const ParamVector& x, const std::vector<Shape>& shapes) {
  if (x.shapes() != shapes) throw StructuralError("mlp: parameter layout mismatch");
}

}  // namespace

double MlpProblem::value(const ParamVector& x) const {
  check_mlp_layout(x, shapes());
  const Matrix& w1 = x.block(0).data();
  const Matrix& w2 = x.block(1).data();
  const Matrix h = (inputs_ * w1.transpose()).array().tanh().matrix();
  const Vector residual = h * w2.transpose() - targets_;
  return 0.5 * residual.squaredNorm() / static_cast<double>(targets_.size());
}

Direction MlpProblem::gradient_over(const ParamVector& x, const std::vector<Eigen::Index>& rows) const {
  check_mlp_layout(x, shapes());
  const Matrix& w1 = x.block(0).data();
  const Matrix& w2 = x.block(1).data();
  Matrix a;
  Vector y;
  if (rows.empty()) {
    a = inputs_;
    y = targets_;
  } else {
    a.resize(static_cast<Eigen::Index>(rows.size()), inputs_.cols());
    y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      a.row(static_cast<Eigen::Index>(i)) = inputs_.row(rows[i]);
      y(static_cast<Eigen::Index>(i)) = targets_(rows[i]);
    }
  }
  const double count = static_cast<double>(a.rows());
  const Matrix h = (a * w1.transpose()).array().tanh().matrix();  // count x hidden
  const Vector r = h * w2.transpose() - y;
  // d/dW2 = r^T H / count;  d/dW1 = ((r W2) .* (1 - H^2))^T A / count
  Matrix g2 = r.transpose() * h / count;
  const Matrix back = (r * w2).cwiseProduct((1.0 - h.array().square()).matrix());
  Matrix g1 = back.transpose() * a / count;
  return ParamVector{ParamBlock::matrix(std::move(g1)), ParamBlock::matrix(std::move(g2))};
}

Direction MlpProblem::gradient(const ParamVector& x) const { return gradient_over(x, {}); }

Direction MlpProblem::stochastic_gradient(const ParamVector& x, Rng& rng) const {
  return gradient_over(x, sample_rows(inputs_.rows(), batch_, rng));
}

ParamVector MlpProblem::initial_point(std::uint64_t seed) const {
  Rng rng = Rng(seed).split(kInitStream);
  const Eigen::Index p = inputs_.cols();
  Matrix w1 = normal_matrix(hidden_, p, rng) / std::sqrt(static_cast<double>(p));
  Matrix w2 = normal_matrix(1, hidden_, rng) / std::sqrt(static_cast<double>(hidden_));
  return ParamVector{ParamBlock::matrix(std::move(w1)), ParamBlock::matrix(std::move(w2))};
}

std::optional<double> MlpProblem::variance_bound_at(const ParamVector& x) const {
  // Variance of one uniformly drawn sample gradient, divided by the batch size.
  const Direction mean = gradient(x);
  double second_moment = 0.0;
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) second_moment += squared_norm(gradient_over(x, {i}));
  second_moment /= static_cast<double>(inputs_.rows());
  return std::max(0.0, second_moment - squared_norm(mean)) / static_cast<double>(batch_);
}

// --- Rosenbrock -------------------------------------------------------------

RosenbrockProblem::RosenbrockProblem(Eigen::Index dim, double sigma, double init_scale)
    : dim_(dim), sigma_(sigma), init_scale_(init_scale) {
  if (dim < 2) throw ConfigError("rosenbrock: dim must be >= 2");
  if (!(sigma_ >= 0.0)) throw ConfigError("rosenbrock: sigma must be >= 0");
}

double RosenbrockProblem::value(const ParamVector& x) const {
  const auto v = single_vector(x, dim_, "rosenbrock");
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < dim_; ++i) {
    const double a = v(i + 1) - v(i) * v(i);
    const double b = 1.0 - v(i);
    f += 100.0 * a * a + b * b;
  }
  return f;
}

Direction RosenbrockProblem::gradient(const ParamVector& x) const {
  const auto v = single_vector(x, dim_, "rosenbrock");
  Vector g = Vector::Zero(dim_);
  for (Eigen::Index i = 0; i + 1 < dim_; ++i) {
    const double a = v(i + 1) - v(i) * v(i);
    g(i) += -400.0 * v(i) * a - 2.0 * (1.0 - v(i));
    g(i + 1) += 200.0 * a;
  }
  return wrap(g);
}

Direction RosenbrockProblem::stochastic_gradient(const ParamVector& x, Rng& rng) const {
  return add_isotropic_noise(gradient(x), sigma_, rng);
}

ParamVector RosenbrockProblem::initial_point(std::uint64_t seed) const {
  Rng rng = Rng(seed).split(kInitStream);
  Vector v(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) v(i) = (i % 2 == 0 ? -1.2 : 1.0) + 0.1 * init_scale_ * rng.normal();
  return wrap(v);
}

// --- registry ---------------------------------------------------------------

ProblemPtr make_problem(const ProblemParams& p) {
  if (p.name == "quadratic") {
    return QuadraticProblem::random(p.dim, p.mu, p.L, p.sigma, p.data_seed, p.init_scale);
  }
  if (p.name == "exp") return ExpFamilyProblem::random(p.dim, p.sigma, p.data_seed, p.init_scale);
  if (p.name == "logistic") {
    return std::make_shared<LogisticProblem>(p.samples, p.dim, p.ridge, p.batch, p.data_seed, p.init_scale);
  }
  if (p.name == "mlp") {
    return std::make_shared<MlpProblem>(p.samples, p.dim, p.hidden, p.batch, p.label_noise, p.data_seed);
  }
  if (p.name == "rosenbrock") return std::make_shared<RosenbrockProblem>(p.dim, p.sigma, p.init_scale);
  throw ConfigError("unknown problem '" + p.name + "'");
}

std::vector<ProblemPtr> catalog() {
  std::vector<ProblemPtr> out;
  ProblemParams q;
  q.sigma = 0.5;
  out.push_back(make_problem(q));
  ProblemParams e;
  e.name = "exp";
  e.dim = 5;
  e.sigma = 0.5;
  out.push_back(make_problem(e));
  ProblemParams lg;
  lg.name = "logistic";
  lg.dim = 5;
  out.push_back(make_problem(lg));
  ProblemParams mlp;
  mlp.name = "mlp";
  mlp.dim = 4;
  out.push_back(make_problem(mlp));
  ProblemParams r;
  r.name = "rosenbrock";
  r.dim = 4;
  r.sigma = 0.5;
  out.push_back(make_problem(r));
  return out;
}

Direction finite_diff_grad(const Problem& problem, const ParamVector& x, double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_grad: h must be > 0");
  Direction g = ParamVector::zeros_like(x);
  ParamVector probe = x;
  for (Eigen::Index i = 0; i < x.total_size(); ++i) {
    const double xi = x.coord(i);
    const double step = h * std::max(1.0, std::abs(xi));
    probe.coord(i) = xi + step;
    const double up = problem.value(probe);
    probe.coord(i) = xi - step;
    const double down = problem.value(probe);
    probe.coord(i) = xi;
    g.coord(i) = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace nonclip
