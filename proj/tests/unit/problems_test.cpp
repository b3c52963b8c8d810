#include "nonclip/errors.hpp"
#include "nonclip/problems.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nonclip;

namespace {

ParamVector perturbed_start(const Problem& p, std::uint64_t seed) {
  Rng rng(seed + 1000);
  ParamVector x = p.initial_point(seed);
  for (Eigen::Index i = 0; i < x.total_size(); ++i) x.coord(i) += 0.5 * rng.normal();
  return x;
}

}  // namespace

TEST(Problems, CatalogGradientsMatchFiniteDifferences) {
  for (const auto& p : catalog()) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const ParamVector x = perturbed_start(*p, s);
      const Direction g = p->gradient(x);
      const Direction fd = finite_diff_grad(*p, x);
      const double scale = std::max(1.0, euclidean_norm(g));
      EXPECT_LE(euclidean_norm(subtract(g, fd)) / scale, 1e-5) << p->name() << " seed " << s;
    }
  }
}

TEST(Problems, CatalogNamesAndShapes) {
  const auto all = catalog();
  std::vector<std::string> names;
  for (const auto& p : all) {
    names.push_back(p->name());
    EXPECT_EQ(p->initial_point(3).shapes(), p->shapes());
  }
  EXPECT_EQ(names, (std::vector<std::string>{"quadratic", "exp", "logistic", "mlp", "rosenbrock"}));
  const auto mlp_shapes = all[3]->shapes();
  ASSERT_EQ(mlp_shapes.size(), 2u);
  EXPECT_TRUE(mlp_shapes[0].is_matrix());
}

TEST(Problems, InitialPointIsDeterministic) {
  for (const auto& p : catalog()) {
    EXPECT_EQ(p->initial_point(5), p->initial_point(5)) << p->name();
    EXPECT_NE(p->initial_point(5), p->initial_point(6)) << p->name();
  }
}

TEST(Problems, StochasticGradientIsSeededAndUnbiased) {
  for (const auto& p : catalog()) {
    const ParamVector x = p->initial_point(0);
    Rng a(9), b(9);
    EXPECT_EQ(p->stochastic_gradient(x, a), p->stochastic_gradient(x, b)) << p->name();

    const int draws = 4000;
    Rng rng(17);
    Vector mean = Vector::Zero(x.total_size());
    for (int i = 0; i < draws; ++i) mean += p->stochastic_gradient(x, rng).flatten();
    mean /= draws;
    const Vector g = p->gradient(x).flatten();
    const double sd = std::sqrt(p->variance_bound_at(x).value_or(1.0) / draws);
    EXPECT_LE((mean - g).norm(), 5.0 * sd + 1e-12) << p->name();
  }
}

TEST(Problems, QuadraticClosedForm) {
  Matrix a(2, 2);
  a << 2, 0, 0, 4;
  const Vector b = (Vector(2) << 2, 4).finished();
  const QuadraticProblem q(a, b, 0.0);
  EXPECT_DOUBLE_EQ(*q.f_star(), -3.0);
  EXPECT_NEAR((q.minimizer() - Vector::Ones(2)).norm(), 0.0, 1e-14);
  const ParamVector x{ParamBlock::vector({0, 0})};
  EXPECT_DOUBLE_EQ(q.value(x), 0.0);
  EXPECT_EQ(q.gradient(x), (ParamVector{ParamBlock::vector({-2, -4})}));
  const auto c = q.constants(NormKind::euclidean);
  ASSERT_TRUE(c.has_value());
  EXPECT_DOUBLE_EQ(c->L0, 4.0);
  EXPECT_EQ(c->L1, 0.0);
}

TEST(Problems, QuadraticNoiseVariance) {
  const auto q = QuadraticProblem::random(6, 1.0, 10.0, 0.7, 3);
  const ParamVector x = q->initial_point(0);
  const Vector g = q->gradient(x).flatten();
  Rng rng(2);
  double acc = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) acc += (q->stochastic_gradient(x, rng).flatten() - g).squaredNorm();
  EXPECT_NEAR(acc / draws, 0.49, 0.02);
}

TEST(Problems, ExpFamilyInfimum) {
  const ExpFamilyProblem e((Vector(2) << 1.0, -2.0).finished(), 0.0);
  EXPECT_EQ(*e.f_star(), 0.0);
  const ParamVector far{ParamBlock::vector({-40, 20})};
  EXPECT_LT(e.value(far), 1e-16);
  EXPECT_GT(e.value(far), 0.0);
}

TEST(Problems, RosenbrockMinimizer) {
  const RosenbrockProblem r(4, 0.0);
  const ParamVector ones{ParamBlock::vector({1, 1, 1, 1})};
  EXPECT_EQ(r.value(ones), 0.0);
  EXPECT_EQ(euclidean_norm(r.gradient(ones)), 0.0);
}

TEST(Problems, LogisticFstarIsStationary) {
  const auto p = make_problem(ProblemParams{.name = "logistic", .dim = 5});
  ASSERT_TRUE(p->f_star().has_value());
  EXPECT_LE(*p->f_star(), p->value(p->initial_point(0)));
}

TEST(Problems, MakeProblemErrors) {
  EXPECT_THROW(make_problem(ProblemParams{.name = "nope"}), ConfigError);
  EXPECT_THROW(make_problem(ProblemParams{.name = "quadratic", .dim = 0}), ConfigError);
  EXPECT_THROW(make_problem(ProblemParams{.name = "quadratic", .sigma = -1.0}), ConfigError);
  EXPECT_THROW(make_problem(ProblemParams{.name = "quadratic", .mu = 5.0, .L = 1.0}), ConfigError);
  EXPECT_NO_THROW(make_problem(ProblemParams{.name = "rosenbrock", .dim = 3}));
}

TEST(Problems, SmoothnessOnBall) {
  const auto q = QuadraticProblem::random(4, 1.0, 9.0, 0.0, 1);
  EXPECT_NEAR(*q->smoothness_on_ball(NormKind::euclidean, 1.0), q->lambda_max(), 1e-10);
}
