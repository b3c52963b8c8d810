#include "nonclip/errors.hpp"
#include "nonclip/param_space.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace nonclip;

TEST(ParamSpace, FlattenRoundTrip) {
  const ParamVector x{ParamBlock::matrix({{1, 2, 3}, {4, 5, 6}}), ParamBlock::vector({7, 8})};
  EXPECT_EQ(x.total_size(), 8);
  const Vector flat = x.flatten();
  for (int i = 0; i < 8; ++i) EXPECT_EQ(flat(i), i + 1);
  EXPECT_EQ(ParamVector::unflatten(x.shapes(), flat), x);
  EXPECT_EQ(x.coord(5), 6.0);
}

TEST(ParamSpace, UnflattenRejectsWrongLength) {
  EXPECT_THROW(ParamVector::unflatten({Shape::vec(3)}, Vector::Zero(4)), StructuralError);
}

TEST(ParamSpace, ArithmeticAndNorms) {
  const ParamVector x{ParamBlock::vector({3, 4})};
  const ParamVector y{ParamBlock::vector({1, -1})};
  EXPECT_DOUBLE_EQ(euclidean_norm(x), 5.0);
  EXPECT_DOUBLE_EQ(squared_norm(x), 25.0);
  EXPECT_DOUBLE_EQ(inner(x, y), -1.0);
  EXPECT_EQ(add(x, y), (ParamVector{ParamBlock::vector({4, 3})}));
  EXPECT_EQ(subtract(x, y), (ParamVector{ParamBlock::vector({2, 5})}));
  EXPECT_EQ(axpy(2.0, y, x), (ParamVector{ParamBlock::vector({5, 2})}));
  EXPECT_EQ(scale(-1.0, x), (ParamVector{ParamBlock::vector({-3, -4})}));
  EXPECT_DOUBLE_EQ(max_abs_diff(x, y), 5.0);
  EXPECT_DOUBLE_EQ(distance(x, x), 0.0);
}

TEST(ParamSpace, StructureMismatchThrows) {
  const ParamVector a{ParamBlock::vector({1, 2})};
  const ParamVector b{ParamBlock::vector({1, 2, 3})};
  const ParamVector c{ParamBlock::matrix({{1, 2}})};
  EXPECT_FALSE(same_structure(a, b));
  EXPECT_FALSE(same_structure(a, c));
  EXPECT_THROW(add(a, b), StructuralError);
  EXPECT_THROW(inner(a, c), StructuralError);
}

TEST(ParamSpace, NonFiniteResultsAreRejected) {
  const double big = std::numeric_limits<double>::max();
  const ParamVector x{ParamBlock::vector({big})};
  EXPECT_THROW(add(x, x), NumericalError);
  const ParamVector n{ParamBlock::vector({std::nan("")})};
  EXPECT_FALSE(n.all_finite());
  EXPECT_THROW(require_finite(n, "test"), NumericalError);
}

TEST(ParamSpace, ZerosLike) {
  const ParamVector x{ParamBlock::matrix({{1, 2}, {3, 4}}), ParamBlock::vector({5})};
  const ParamVector z = ParamVector::zeros_like(x);
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.shapes(), x.shapes());
  EXPECT_FALSE(x.is_zero());
}

TEST(ParamSpace, ShapeToString) {
  EXPECT_EQ(Shape::vec(3).to_string(), "vector(3)");
  EXPECT_EQ(Shape::mat(2, 5).to_string(), "matrix(2x5)");
}
