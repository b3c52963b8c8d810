#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace nonclip {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Shape of one parameter block. Vector blocks are stored as n x 1.
struct Shape {
  enum class Kind { vector, matrix };

  Kind kind = Kind::vector;
  Eigen::Index rows = 0;
  Eigen::Index cols = 1;

  static Shape vec(Eigen::Index n) { return {Kind::vector, n, 1}; }
  static Shape mat(Eigen::Index m, Eigen::Index n) { return {Kind::matrix, m, n}; }

  Eigen::Index size() const { return rows * cols; }
  bool is_matrix() const { return kind == Kind::matrix; }
  std::string to_string() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// A single dense tensor (vector or row-major matrix) of the parameter space.
class ParamBlock {
 public:
  ParamBlock() = default;
  explicit ParamBlock(Shape shape);
  ParamBlock(Shape shape, Matrix data);

  static ParamBlock vector(std::initializer_list<double> values);
  static ParamBlock vector(const Vector& values);
  static ParamBlock matrix(std::initializer_list<std::initializer_list<double>> rows);
  static ParamBlock matrix(Matrix values);

  const Shape& shape() const { return shape_; }
  const Matrix& data() const { return data_; }
  /// Mutable access for single-threaded builders. The shape cannot change.
  Matrix& data() { return data_; }

  double& operator[](Eigen::Index i) { return data_.data()[i]; }
  double operator[](Eigen::Index i) const { return data_.data()[i]; }
  Eigen::Index size() const { return data_.size(); }

  /// Flattened row-major view.
  Eigen::Map<const Vector> flat() const { return {data_.data(), data_.size()}; }
  Eigen::Map<Vector> flat() { return {data_.data(), data_.size()}; }

  friend bool operator==(const ParamBlock& a, const ParamBlock& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  Matrix data_;
};

/// Ordered list of blocks; the space iterates, gradients and momentum live in.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<ParamBlock> blocks);
  ParamVector(std::initializer_list<ParamBlock> blocks);

  static ParamVector zeros(const std::vector<Shape>& shapes);
  static ParamVector zeros_like(const ParamVector& other);

  std::size_t num_blocks() const { return blocks_.size(); }
  const ParamBlock& block(std::size_t l) const { return blocks_.at(l); }
  ParamBlock& block(std::size_t l) { return blocks_.at(l); }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  std::vector<Shape> shapes() const;
  Eigen::Index total_size() const;

  /// All coordinates in block order, row-major within blocks.
  Vector flatten() const;
  /// Inverse of flatten for a given layout.
  static ParamVector unflatten(const std::vector<Shape>& shapes, const Vector& flat);

  /// Coordinate access across all blocks, in flatten() order.
  double coord(Eigen::Index i) const;
  double& coord(Eigen::Index i);

  bool all_finite() const;
  bool is_zero() const;

  friend bool operator==(const ParamVector& a, const ParamVector& b) { return a.blocks_ == b.blocks_; }

 private:
  std::vector<ParamBlock> blocks_;
};

/// Gradients, momentum estimates and movement directions share the container.
using Direction = ParamVector;

bool same_structure(const ParamVector& x, const ParamVector& y);
void require_same_structure(const ParamVector& x, const ParamVector& y, const char* where);
/// Throws NumericalError naming `where` if any entry is NaN or infinite.
void require_finite(const ParamVector& x, const char* where);

/// a*x + y, blockwise.
ParamVector axpy(double a, const ParamVector& x, const ParamVector& y);
ParamVector scale(double a, const ParamVector& x);
ParamVector add(const ParamVector& x, const ParamVector& y);
ParamVector subtract(const ParamVector& x, const ParamVector& y);

/// Sum over blocks of the Frobenius inner product.
double inner(const ParamVector& x, const ParamVector& y);
double euclidean_norm(const ParamVector& x);
double squared_norm(const ParamVector& x);
/// Euclidean distance; max |x_i - y_i| is `max_abs_diff`.
double distance(const ParamVector& x, const ParamVector& y);
double max_abs_diff(const ParamVector& x, const ParamVector& y);

}  // namespace nonclip
