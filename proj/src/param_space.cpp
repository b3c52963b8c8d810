#include "nonclip/param_space.hpp"

#include "nonclip/errors.hpp"

#include <cmath>
#include <sstream>

namespace nonclip {

std::string Shape::to_string() const {
  std::ostringstream os;
  if (is_matrix()) {
    os << "matrix(" << rows << "x" << cols << ")";
  } else {
    os << "vector(" << rows << ")";
  }
  return os.str();
}

ParamBlock::ParamBlock(Shape shape) : shape_(shape), data_(Matrix::Zero(shape.rows, shape.cols)) {}

ParamBlock::ParamBlock(Shape shape, Matrix data) : shape_(shape), data_(std::move(data)) {
  if (data_.rows() != shape_.rows || data_.cols() != shape_.cols) {
    throw StructuralError("ParamBlock: data is " + std::to_string(data_.rows()) + "x" +
                          std::to_string(data_.cols()) + " but shape is " + shape_.to_string());
  }
}

ParamBlock ParamBlock::vector(std::initializer_list<double> values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  Matrix m(n, 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return ParamBlock(Shape::vec(n), std::move(m));
}

ParamBlock ParamBlock::vector(const Vector& values) {
  Matrix m = values;
  return ParamBlock(Shape::vec(values.size()), std::move(m));
}

ParamBlock ParamBlock::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = m == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.begin()->size());
  Matrix data(m, n);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n) {
      throw StructuralError("ParamBlock::matrix: ragged rows");
    }
    Eigen::Index j = 0;
    for (double v : row) data(i, j++) = v;
    ++i;
  }
  return ParamBlock(Shape::mat(m, n), std::move(data));
}

ParamBlock ParamBlock::matrix(Matrix values) {
  const Shape s = Shape::mat(values.rows(), values.cols());
  return ParamBlock(s, std::move(values));
}

ParamVector::ParamVector(std::vector<ParamBlock> blocks) : blocks_(std::move(blocks)) {}

ParamVector::ParamVector(std::initializer_list<ParamBlock> blocks) : blocks_(blocks) {}

ParamVector ParamVector::zeros(const std::vector<Shape>& shapes) {
  std::vector<ParamBlock> blocks;
  blocks.reserve(shapes.size());
  for (const auto& s : shapes) blocks.emplace_back(s);
  return ParamVector(std::move(blocks));
}

ParamVector ParamVector::zeros_like(const ParamVector& other) { return zeros(other.shapes()); }

std::vector<Shape> ParamVector::shapes() const {
  std::vector<Shape> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.shape());
  return out;
}

Eigen::Index ParamVector::total_size() const {
  Eigen::Index n = 0;
  for (const auto& b : blocks_) n += b.size();
  return n;
}

Vector ParamVector::flatten() const {
  Vector out(total_size());
  Eigen::Index offset = 0;
  for (const auto& b : blocks_) {
    out.segment(offset, b.size()) = b.flat();
    offset += b.size();
  }
  return out;
}

ParamVector ParamVector::unflatten(const std::vector<Shape>& shapes, const Vector& flat) {
  ParamVector out = zeros(shapes);
  if (out.total_size() != flat.size()) {
    throw StructuralError("unflatten: " + std::to_string(flat.size()) + " values for " +
                          std::to_string(out.total_size()) + " coordinates");
  }
  Eigen::Index offset = 0;
  for (auto& b : out.blocks_) {
    b.flat() = flat.segment(offset, b.size());
    offset += b.size();
  }
  return out;
}

double ParamVector::coord(Eigen::Index i) const {
  for (const auto& b : blocks_) {
    if (i < b.size()) return b[i];
    i -= b.size();
  }
  throw StructuralError("ParamVector::coord: index out of range");
}

double& ParamVector::coord(Eigen::Index i) {
  for (auto& b : blocks_) {
    if (i < b.size()) return b[i];
    i -= b.size();
  }
  throw StructuralError("ParamVector::coord: index out of range");
}

bool ParamVector::all_finite() const {
  for (const auto& b : blocks_) {
    if (!b.data().allFinite()) return false;
  }
  return true;
}

bool ParamVector::is_zero() const {
  for (const auto& b : blocks_) {
    if (!b.data().isZero(0.0)) return false;
  }
  return true;
}

bool same_structure(const ParamVector& x, const ParamVector& y) {
  if (x.num_blocks() != y.num_blocks()) return false;
  for (std::size_t l = 0; l < x.num_blocks(); ++l) {
    if (!(x.block(l).shape() == y.block(l).shape())) return false;
  }
  return true;
}

void require_same_structure(const ParamVector& x, const ParamVector& y, const char* where) {
  if (x.num_blocks() != y.num_blocks()) {
    throw StructuralError(std::string(where) + ": block count " + std::to_string(x.num_blocks()) +
                          " vs " + std::to_string(y.num_blocks()));
  }
  for (std::size_t l = 0; l < x.num_blocks(); ++l) {
    if (!(x.block(l).shape() == y.block(l).shape())) {
      throw StructuralError(std::string(where) + ": block " + std::to_string(l) + " is " +
                            x.block(l).shape().to_string() + " vs " + y.block(l).shape().to_string());
    }
  }
}

void require_finite(const ParamVector& x, const char* where) {
  if (!x.all_finite()) {
    throw NumericalError(std::string(where) + ": non-finite value produced");
  }
}

ParamVector axpy(double a, const ParamVector& x, const ParamVector& y) {
  require_same_structure(x, y, "axpy");
  ParamVector out = y;
  if (a != 0.0) {
    for (std::size_t l = 0; l < out.num_blocks(); ++l) {
      out.block(l).data() += a * x.block(l).data();
    }
  }
  require_finite(out, "axpy");
  return out;
}

ParamVector scale(double a, const ParamVector& x) {
  ParamVector out = x;
  for (std::size_t l = 0; l < out.num_blocks(); ++l) out.block(l).data() *= a;
  require_finite(out, "scale");
  return out;
}

ParamVector add(const ParamVector& x, const ParamVector& y) { return axpy(1.0, x, y); }

ParamVector subtract(const ParamVector& x, const ParamVector& y) {
  require_same_structure(x, y, "subtract");
  ParamVector out = x;
  for (std::size_t l = 0; l < out.num_blocks(); ++l) out.block(l).data() -= y.block(l).data();
  require_finite(out, "subtract");
  return out;
}

double inner(const ParamVector& x, const ParamVector& y) {
  require_same_structure(x, y, "inner");
  double s = 0.0;
  for (std::size_t l = 0; l < x.num_blocks(); ++l) {
    s += x.block(l).flat().dot(y.block(l).flat());
  }
  if (!std::isfinite(s)) throw NumericalError("inner: non-finite result");
  return s;
}

double squared_norm(const ParamVector& x) {
  double s = 0.0;
  for (const auto& b : x.blocks()) s += b.flat().squaredNorm();
  if (!std::isfinite(s)) throw NumericalError("squared_norm: non-finite result");
  return s;
}

double euclidean_norm(const ParamVector& x) { return std::sqrt(squared_norm(x)); }

double distance(const ParamVector& x, const ParamVector& y) { return euclidean_norm(subtract(x, y)); }

double max_abs_diff(const ParamVector& x, const ParamVector& y) {
  require_same_structure(x, y, "max_abs_diff");
  double m = 0.0;
  for (std::size_t l = 0; l < x.num_blocks(); ++l) {
    m = std::max(m, (x.block(l).data() - y.block(l).data()).cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace nonclip
