#include "nonclip/diagnostics.hpp"
#include "nonclip/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nonclip;

namespace {

ParamVector vec(std::initializer_list<double> v) { return ParamVector{ParamBlock::vector(v)}; }

ProblemPtr identity_quadratic(int n, double sigma = 0.0) {
  return std::make_shared<QuadraticProblem>(Matrix::Identity(n, n), Vector::Ones(n), sigma);
}

// f(x) = <c, x>: constant gradient.
class LinearProblem final : public Problem {
 public:
  std::string name() const override { return "linear"; }
  std::vector<Shape> shapes() const override { return {Shape::vec(3)}; }
  double value(const ParamVector& x) const override { return x.flatten().sum(); }
  Direction gradient(const ParamVector&) const override { return vec({1, 1, 1}); }
  Direction stochastic_gradient(const ParamVector& x, Rng&) const override { return gradient(x); }
  ParamVector initial_point(std::uint64_t) const override { return vec({0, 0, 0}); }
};

std::vector<PointPair> random_pairs(int count, int dim, double radius, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PointPair> out;
  for (int i = 0; i < count; ++i) {
    Vector x(dim), y(dim);
    for (int j = 0; j < dim; ++j) {
      x(j) = rng.normal();
      y(j) = x(j) + radius * rng.normal();
    }
    out.emplace_back(ParamVector{ParamBlock::vector(x)}, ParamVector{ParamBlock::vector(y)});
  }
  return out;
}

}  // namespace

TEST(WolfeGap, Examples) {
  EXPECT_DOUBLE_EQ(wolfe_gap(vec({3, 4}), vec({0, 0}), 1.0, NormSpec::euclidean()), 5.0);
  EXPECT_EQ(wolfe_gap(vec({0, 0}), vec({0.3, 0.1}), 1.0, NormSpec::euclidean()), 0.0);
  EXPECT_DOUBLE_EQ(wolfe_gap(vec({1, 0}), vec({1, 0}), 1.0, NormSpec::euclidean()), 2.0);
}

TEST(WolfeGap, MatchesSphereSearch) {
  // max over the unit circle of <g, x - u>.
  const ParamVector g = vec({0.7, -1.3});
  const ParamVector x = vec({0.2, 0.5});
  double best = -1e300;
  for (int i = 0; i < 100000; ++i) {
    const double t = 2.0 * M_PI * i / 100000.0;
    best = std::max(best, inner(g, subtract(x, vec({std::cos(t), std::sin(t)}))));
  }
  EXPECT_NEAR(wolfe_gap(g, x, 1.0, NormSpec::euclidean()), best, 1e-8);
}

TEST(SmoothnessProbe, QuadraticIdentity) {
  const auto q = identity_quadratic(5);
  const ProbeResult r = smoothness_probe(*q, random_pairs(50, 5, 0.3, 1), NormSpec::euclidean());
  EXPECT_NEAR(r.L0_hat, 1.0, 1e-10);
  EXPECT_NEAR(r.L1_hat, 0.0, 1e-10);
  EXPECT_LT(r.residual, 1e-10);
  EXPECT_EQ(r.samples.size(), 50u);
}

TEST(SmoothnessProbe, LinearHasZeroRatios) {
  const LinearProblem p;
  const ProbeResult r = smoothness_probe(p, random_pairs(20, 3, 0.3, 2), NormSpec::max_norm());
  for (const auto& s : r.samples) EXPECT_EQ(s.ratio, 0.0);
  EXPECT_EQ(r.L0_hat, 0.0);
  EXPECT_EQ(r.L1_hat, 0.0);
}

TEST(SmoothnessProbe, TooFewPairsThrows) {
  const auto q = identity_quadratic(3);
  EXPECT_THROW(smoothness_probe(*q, random_pairs(9, 3, 0.3, 3), NormSpec::euclidean()), InsufficientDataError);
  // Separation 100 exceeds 1 / L1 = 0.01 for every pair.
  EXPECT_THROW(smoothness_probe(*q, random_pairs(30, 3, 100.0, 4), NormSpec::euclidean(), 100.0),
               InsufficientDataError);
}

TEST(SmoothnessProbe, RejectsIdenticalPoints) {
  const auto q = identity_quadratic(3);
  auto pairs = random_pairs(12, 3, 0.1, 5);
  pairs.emplace_back(vec({1, 2, 3}), vec({1, 2, 3}));
  const ProbeResult r = smoothness_probe(*q, pairs, NormSpec::euclidean());
  EXPECT_EQ(r.rejected, 1u);
  EXPECT_EQ(r.samples.size(), 12u);
}

TEST(ProbePairs, CountAndDeterminism) {
  const auto q = identity_quadratic(4);
  OptimizerConfig c;
  c.horizon = 10;
  c.deterministic = true;
  const RunRecord rec = run(*q, c, 0);
  const auto a = probe_pairs(rec, 25, 0.1, 3);
  const auto b = probe_pairs(rec, 25, 0.1, 3);
  EXPECT_EQ(a.size(), 10u + 25u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].first, b[i].first);
    EXPECT_EQ(a[i].second, b[i].second);
  }
  for (std::size_t i = 10; i < a.size(); ++i) EXPECT_LE(distance(a[i].first, a[i].second), 0.1 + 1e-15);
}

TEST(CheckDescent, GgncOnQuadraticDescends) {
  const auto q = identity_quadratic(6);
  OptimizerConfig c;
  c.gamma.gamma = 0.5;
  c.rho = 1.0;
  c.horizon = 100;
  c.deterministic = true;
  EXPECT_TRUE(check_descent(run(*q, c, 1)).empty());
}

TEST(CheckDescent, LongUscgStepsAscend) {
  const auto q = identity_quadratic(6);
  OptimizerConfig c;
  c.algorithm = Algorithm::uscg;
  c.gamma.gamma = 1.0;
  c.rho = 3.0;
  c.horizon = 50;
  c.deterministic = true;
  EXPECT_FALSE(check_descent(run(*q, c, 1)).empty());
}

TEST(CheckDescent, SingleIterate) {
  RunRecord rec;
  rec.rows.push_back(IterationRow{});
  rec.f_after_last = 0.0;
  EXPECT_TRUE(check_descent(rec).empty());
}

TEST(Bounds, SingleClippedStepPasses) {
  const auto q = identity_quadratic(3);
  OptimizerConfig c;
  c.gamma.gamma = 1.0;
  c.rho = 0.1;
  c.horizon = 1;
  c.deterministic = true;
  const RunRecord rec = run(*q, c, 0);
  ASSERT_TRUE(rec.rows[0].clipped);
  const BoundReport r = check_bound_det_ggnc(rec, 1.0, 0.0, 1.0, 0.1);
  EXPECT_TRUE(r.preconditions_met);
  EXPECT_TRUE(r.pass) << r.lhs << " > " << r.rhs;
  EXPECT_EQ(r.n, 1);
}

TEST(Bounds, UnclippedSingleStepExceedsLiteralConstant) {
  // Plain GD with gamma = 1/L on 1/2 ||x - b||^2: ||g|| = sqrt(2 Delta), while the literal
  // right-hand side is sqrt(Delta / gamma). The checker reports the literal form.
  const auto q = identity_quadratic(3);
  OptimizerConfig c;
  c.gamma.gamma = 1.0;
  c.horizon = 1;
  c.deterministic = true;
  const RunRecord rec = run(*q, c, 0);
  const BoundReport r = check_bound_det_ggnc(rec, 1.0, 0.0, 1.0, kNoClip);
  EXPECT_TRUE(r.preconditions_met);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.lhs, std::sqrt(2.0) * r.rhs, 1e-12);
}

TEST(Bounds, PreconditionViolationFails) {
  const auto q = identity_quadratic(3);
  OptimizerConfig c;
  c.gamma.gamma = 1.5;
  c.horizon = 20;
  c.deterministic = true;
  const BoundReport r = check_bound_det_ggnc(run(*q, c, 0), 1.0, 0.0, 1.5, kNoClip);
  EXPECT_FALSE(r.preconditions_met);
  EXPECT_FALSE(r.pass);
}

TEST(Bounds, MissingDeltaThrows) {
  RunRecord rec;
  rec.rows.push_back(IterationRow{});
  EXPECT_THROW(check_bound_det_ggnc(rec, 1.0, 0.0, 1.0, 1.0), ConfigError);
}

TEST(EstimatorStats, AlphaOneGivesNoiseVariance) {
  const auto q = identity_quadratic(4, 0.8);
  OptimizerConfig c;
  c.gamma.gamma = 0.0;
  c.alpha = AlphaSchedule::constant(1.0);
  c.horizon = 5;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 4000; ++s) seeds.push_back(s);
  const EstimatorStats st = estimator_error_stats(*q, c, seeds);
  ASSERT_EQ(st.mean_lambda_sq.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(st.mean_lambda_sq[k], 0.64, 4.0 * st.stderr_lambda_sq[k]);
}

TEST(EstimatorStats, HelperFormulas) {
  EXPECT_DOUBLE_EQ(ema_stationary_variance(1.0, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(ema_stationary_variance(0.5, 3.0), 1.0);
  // 2 (1 + C) / sqrt(4) = 1 + C must cover 3, so C = 2.
  EXPECT_DOUBLE_EQ(fit_horizon_constant({0.5, 3.0, 1.0}, 1.0, 4), 2.0);
  EXPECT_EQ(fit_horizon_constant({0.1}, 1.0, 4), 0.0);
}

TEST(WolfeGap, ShrinksWithHorizonOnLogistic) {
  const auto p = make_problem(ProblemParams{.name = "logistic", .dim = 10, .sigma = 0.0, .samples = 100});
  double prev = 1e300;
  for (std::int64_t n : {100, 1000, 10000}) {
    double total = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      OptimizerConfig c = from_theorem(TheoremPreset::stoch_s3cg, 0.0, 0.0, 1.0, n);
      c.beta = 1.0;
      RunOptions opts;
      opts.store_trajectory = false;
      total += *run(*p, c, s, opts).summary.min_wolfe_gap;
    }
    const double mean = total / 10.0;
    EXPECT_LT(mean, prev) << "n = " << n;
    prev = mean;
  }
}
