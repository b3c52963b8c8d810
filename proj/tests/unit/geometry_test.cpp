#include "nonclip/errors.hpp"
#include "nonclip/geometry.hpp"
#include "nonclip/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace nonclip;

namespace {

ParamVector vec(std::initializer_list<double> v) { return ParamVector{ParamBlock::vector(v)}; }
ParamVector mat(std::initializer_list<std::initializer_list<double>> rows) {
  return ParamVector{ParamBlock::matrix(rows)};
}

void expect_near(const ParamVector& a, const ParamVector& b, double tol) {
  ASSERT_EQ(a.shapes(), b.shapes());
  EXPECT_LE(max_abs_diff(a, b), tol);
}

Matrix random_matrix(Eigen::Index m, Eigen::Index n, Rng& rng) {
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a;
}

ParamVector random_like(const std::vector<Shape>& shapes, Rng& rng) {
  ParamVector x = ParamVector::zeros(shapes);
  for (Eigen::Index i = 0; i < x.total_size(); ++i) x.coord(i) = rng.normal();
  return x;
}

std::vector<std::pair<NormSpec, std::vector<Shape>>> all_norms() {
  return {
      {NormSpec::euclidean(), {Shape::vec(6)}},
      {NormSpec::max_norm(), {Shape::vec(6)}},
      {NormSpec::spectral(), {Shape::mat(4, 3)}},
      {NormSpec::product({{NormSpec::spectral(), 0.5}, {NormSpec::max_norm(), 2.0}, {NormSpec::euclidean(), 1.5}}),
       {Shape::mat(3, 5), Shape::vec(4), Shape::vec(2)}},
  };
}

}  // namespace

TEST(Lmo, TableExamples) {
  expect_near(lmo(NormSpec::euclidean(), vec({3, 4})), vec({-0.6, -0.8}), 1e-15);
  expect_near(lmo(NormSpec::max_norm(), vec({1, -2, 0})), vec({-1, 1, 0}), 0.0);
  expect_near(lmo(NormSpec::spectral(), mat({{2, 0}, {0, 3}})), mat({{-1, 0}, {0, -1}}), 1e-12);
}

TEST(Lmo, SpectralOffDiagonalMatchesO2Grid) {
  const ParamVector d = mat({{0, 1}, {1, 0}});
  const ParamVector l = lmo(NormSpec::spectral(), d);
  expect_near(l, mat({{0, -1}, {-1, 0}}), 1e-12);
  double best = 1e300;
  for (int a = 0; a < 7200; ++a) {
    const double th = 2 * std::numbers::pi * a / 7200;
    const double c = std::cos(th), s = std::sin(th);
    best = std::min({best, inner(d, mat({{c, -s}, {s, c}})), inner(d, mat({{c, s}, {s, -c}}))});
  }
  EXPECT_NEAR(inner(d, l), best, 1e-6);
}

TEST(Lmo, ProductScalesBlocksByRadius) {
  const NormSpec p = NormSpec::product({{NormSpec::euclidean(), 1.0}, {NormSpec::euclidean(), 2.0}});
  const ParamVector d{ParamBlock::vector({3, 4}), ParamBlock::vector({0, 5})};
  const ParamVector expected{ParamBlock::vector({-0.6, -0.8}), ParamBlock::vector({0, -2})};
  expect_near(lmo(p, d), expected, 1e-15);

  // Grid search over the product ball, 2 angles.
  double best = 1e300;
  for (int a = 0; a < 720; ++a) {
    for (int b = 0; b < 720; ++b) {
      const double ta = 2 * std::numbers::pi * a / 720, tb = 2 * std::numbers::pi * b / 720;
      const ParamVector u{ParamBlock::vector({std::cos(ta), std::sin(ta)}),
                          ParamBlock::vector({2 * std::cos(tb), 2 * std::sin(tb)})};
      best = std::min(best, inner(d, u));
    }
  }
  EXPECT_NEAR(inner(d, lmo(p, d)), best, 1e-3);
}

TEST(Lmo, ZeroDirectionGivesZero) {
  for (const auto& [norm, shapes] : all_norms()) {
    const ParamVector z = ParamVector::zeros(shapes);
    EXPECT_TRUE(lmo(norm, z).is_zero()) << norm.to_string();
    EXPECT_EQ(dual_norm(norm, z), 0.0);
    EXPECT_TRUE(sharp(norm, z).is_zero());
  }
}

TEST(DualNorm, Examples) {
  EXPECT_DOUBLE_EQ(dual_norm(NormSpec::max_norm(), vec({1, -2, 0})), 3.0);
  EXPECT_NEAR(dual_norm(NormSpec::spectral(), mat({{2, 0}, {0, 3}})), 5.0, 1e-12);
  EXPECT_NEAR(dual_norm(NormSpec::euclidean(), vec({3, 4})), 5.0, 1e-15);
}

TEST(Sharp, Examples) {
  expect_near(sharp(NormSpec::euclidean(), vec({3, 4})), vec({3, 4}), 1e-14);
  expect_near(sharp(NormSpec::max_norm(), vec({1, -2})), vec({3, -3}), 0.0);
}

TEST(Sharp, MaxNormMatchesGridArgmax) {
  // argmax <d,x> - |x|_inf^2 / 2 over a grid in [-4, 4]^2.
  const ParamVector d = vec({1, -2});
  double best = -1e300;
  double bx = 0, by = 0;
  for (int i = -400; i <= 400; ++i) {
    for (int j = -400; j <= 400; ++j) {
      const double x = i / 100.0, y = j / 100.0;
      const double m = std::max(std::abs(x), std::abs(y));
      const double v = x - 2 * y - 0.5 * m * m;
      if (v > best) {
        best = v;
        bx = x;
        by = y;
      }
    }
  }
  EXPECT_NEAR(bx, 3.0, 1e-9);
  EXPECT_NEAR(by, -3.0, 1e-9);
}

TEST(PrimalNorm, Examples) {
  EXPECT_DOUBLE_EQ(primal_norm(NormSpec::max_norm(), vec({1, -2, 0})), 2.0);
  EXPECT_NEAR(primal_norm(NormSpec::spectral(), mat({{2, 0}, {0, 3}})), 3.0, 1e-12);
  const NormSpec p = NormSpec::product({{NormSpec::euclidean(), 1.0}, {NormSpec::euclidean(), 2.0}});
  const ParamVector x{ParamBlock::vector({3, 4}), ParamBlock::vector({0, 5})};
  EXPECT_DOUBLE_EQ(primal_norm(p, x), 5.0);
  const auto bn = block_norms(p, x);
  ASSERT_EQ(bn.size(), 2u);
  EXPECT_DOUBLE_EQ(bn[0], 5.0);
  EXPECT_DOUBLE_EQ(bn[1], 5.0);
}

TEST(GeometryProperties, DualityBallMembershipAndScaling) {
  Rng rng(5);
  for (const auto& [norm, shapes] : all_norms()) {
    for (int i = 0; i < 100; ++i) {
      const ParamVector d = random_like(shapes, rng);
      const ParamVector l = lmo(norm, d);
      const double dn = dual_norm(norm, d);
      EXPECT_LE(max_abs_diff(sharp(norm, d), scale(-dn, l)), 1e-10 * std::max(1.0, dn));
      EXPECT_NEAR(primal_norm(norm, l), 1.0, 1e-10) << norm.to_string();
      EXPECT_NEAR(-inner(d, l), dn, 1e-12 * std::max(1.0, dn));
      const double a = 0.1 + 3.0 * rng.uniform();
      EXPECT_LE(max_abs_diff(lmo(norm, scale(a, d)), l), 1e-10);
      EXPECT_LE(max_abs_diff(sharp(norm, scale(-a, d)), scale(-a, sharp(norm, d))), 1e-9 * std::max(1.0, a * dn));
      // Generalized Cauchy-Schwarz: <d, x> <= |d|_* |x|.
      const ParamVector x = random_like(shapes, rng);
      EXPECT_LE(inner(d, x), dn * primal_norm(norm, x) * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST(Spectral, RankDeficientLmoIsMinimumNorm) {
  // Rank 1: lmo = -u v^T, Frobenius norm 1.
  const ParamVector d = mat({{1, 2}, {2, 4}});
  const ParamVector l = lmo(NormSpec::spectral(), d);
  EXPECT_NEAR(euclidean_norm(l), 1.0, 1e-12);
  EXPECT_NEAR(-inner(d, l), 5.0, 1e-12);
}

TEST(Svd, Examples) {
  const SvdResult eye = svd_reduced(Matrix::Identity(3, 3));
  EXPECT_EQ(eye.rank(), 3);
  EXPECT_LE((eye.sigma - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((eye.reconstruct() - Matrix::Identity(3, 3)).norm(), 1e-14);

  Eigen::VectorXd u(3), v(2);
  u << 1, 2, 2;
  v << 3, 4;
  u /= 3;
  v /= 5;
  const Matrix outer = u * v.transpose();
  const SvdResult r1 = svd_reduced(outer);
  EXPECT_EQ(r1.rank(), 1);
  EXPECT_NEAR(r1.sigma(0), 1.0, 1e-14);

  Rng rng(8);
  const Matrix m = random_matrix(5, 3, rng);
  const SvdResult s = svd_reduced(m);
  EXPECT_LE((s.reconstruct() - m).norm(), 1e-9 * m.norm());
  EXPECT_LE((s.u.transpose() * s.u - Matrix::Identity(s.rank(), s.rank())).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((s.v.transpose() * s.v - Matrix::Identity(s.rank(), s.rank())).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index i = 1; i < s.rank(); ++i) EXPECT_GE(s.sigma(i - 1), s.sigma(i));
}

TEST(Svd, ZeroMatrixHasRankZero) {
  EXPECT_EQ(svd_reduced(Matrix::Zero(3, 2)).rank(), 0);
}

TEST(PowerIteration, Examples) {
  Matrix d(2, 2);
  d << 2, 0, 0, 3;
  EXPECT_NEAR(spectral_norm_power(d), 3.0, 1e-8);
  EXPECT_NEAR(spectral_norm_power(Matrix::Identity(5, 5)), 1.0, 1e-12);
  EXPECT_EQ(spectral_norm_power(Matrix::Zero(3, 4)), 0.0);
  Rng rng(13);
  for (int i = 0; i < 5; ++i) {
    const Matrix m = random_matrix(8, 8, rng);
    EXPECT_NEAR(spectral_norm_power(m), svd_reduced(m).sigma(0), 1e-6 * svd_reduced(m).sigma(0));
  }
}

TEST(PowerIteration, ThrowsWhenCapIsHit) {
  Matrix d(2, 2);
  d << 1.0, 0, 0, 1.0 - 1e-7;
  EXPECT_THROW(spectral_norm_power(d, 1e-16, 3), NumericalError);
}

TEST(NormSpec, ParseAndPrintRoundTrip) {
  for (const std::string text : {"euclidean", "max", "spectral", "product(spectral:1, max:0.5)"}) {
    EXPECT_EQ(NormSpec::parse(text).to_string(), text);
  }
  EXPECT_EQ(NormSpec::parse("l2"), NormSpec::euclidean());
  EXPECT_EQ(NormSpec::parse("sign"), NormSpec::max_norm());
  const NormSpec p = NormSpec::parse("product(spectral:0.1, euclidean:3)");
  EXPECT_EQ(NormSpec::parse(p.to_string()), p);
  EXPECT_THROW(NormSpec::parse("nuclear"), StructuralError);
  EXPECT_THROW(NormSpec::parse("product(max:-1)"), StructuralError);
  EXPECT_THROW(NormSpec::parse("product(max:x)"), StructuralError);
}

TEST(NormSpec, ValidateForShapes) {
  EXPECT_THROW(NormSpec::spectral().validate_for({Shape::vec(3)}), StructuralError);
  EXPECT_THROW(NormSpec::spectral().validate_for({Shape::mat(2, 2), Shape::mat(2, 2)}), StructuralError);
  EXPECT_NO_THROW(NormSpec::euclidean().validate_for({Shape::mat(2, 2), Shape::vec(3)}));
  const NormSpec p = NormSpec::product({{NormSpec::spectral(), 1.0}});
  EXPECT_THROW(p.validate_for({Shape::mat(2, 2), Shape::vec(2)}), StructuralError);
  EXPECT_THROW(p.validate_for({Shape::vec(2)}), StructuralError);
  EXPECT_THROW(NormSpec::product({}), StructuralError);
  EXPECT_THROW(NormSpec::product({{p, 1.0}}), StructuralError);
}

TEST(NormSpec, SpectralOnVectorThrowsAtUse) {
  EXPECT_THROW(lmo(NormSpec::spectral(), vec({1, 2})), StructuralError);
}
