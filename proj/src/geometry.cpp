#include "nonclip/geometry.hpp"

#include "nonclip/errors.hpp"
#include "nonclip/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace nonclip {

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::euclidean:
      return "euclidean";
    case NormKind::max_norm:
      return "max";
    case NormKind::spectral:
      return "spectral";
    case NormKind::product_max:
      return "product";
  }
  return "?";
}

NormSpec NormSpec::euclidean() { return {NormKind::euclidean, {}}; }
NormSpec NormSpec::max_norm() { return {NormKind::max_norm, {}}; }
NormSpec NormSpec::spectral() { return {NormKind::spectral, {}}; }

NormSpec NormSpec::product(std::vector<ProductChild> children) {
  if (children.empty()) throw StructuralError("product norm needs at least one block");
  for (const auto& c : children) {
    if (c.norm.is_product()) throw StructuralError("product norm children must be atomic");
    if (!(c.radius > 0.0) || !std::isfinite(c.radius)) {
      throw StructuralError("product norm radius must be positive and finite");
    }
  }
  return {NormKind::product_max, std::move(children)};
}

bool operator==(const NormSpec& a, const NormSpec& b) {
  return a.kind == b.kind && a.children == b.children;
}

bool operator==(const ProductChild& a, const ProductChild& b) {
  return a.radius == b.radius && a.norm == b.norm;
}

namespace {

void validate_atomic_block(NormKind kind, const Shape& shape, std::size_t l) {
  if (kind == NormKind::spectral && !shape.is_matrix()) {
    throw StructuralError("spectral norm applied to vector block " + std::to_string(l));
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void NormSpec::validate_for(const std::vector<Shape>& shapes) const {
  if (shapes.empty()) throw StructuralError("norm applied to empty parameter space");
  switch (kind) {
    case NormKind::euclidean:
    case NormKind::max_norm:
      return;
    case NormKind::spectral:
      if (shapes.size() != 1) {
        throw StructuralError("spectral norm needs exactly one matrix block, got " +
                              std::to_string(shapes.size()) + " blocks");
      }
      validate_atomic_block(kind, shapes[0], 0);
      return;
    case NormKind::product_max:
      if (children.size() != shapes.size()) {
        throw StructuralError("product norm has " + std::to_string(children.size()) +
                              " children for " + std::to_string(shapes.size()) + " blocks");
      }
      for (std::size_t l = 0; l < shapes.size(); ++l) validate_atomic_block(children[l].norm.kind, shapes[l], l);
      return;
  }
}

std::string NormSpec::to_string() const {
  if (!is_product()) return nonclip::to_string(kind);
  std::string out = "product(";
  for (std::size_t l = 0; l < children.size(); ++l) {
    if (l) out += ", ";
    out += nonclip::to_string(children[l].norm.kind) + ":" + format_double(children[l].radius);
  }
  return out + ")";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

NormSpec parse_atomic(const std::string& name) {
  if (name == "euclidean" || name == "l2") return NormSpec::euclidean();
  if (name == "max" || name == "linf" || name == "sign") return NormSpec::max_norm();
  if (name == "spectral") return NormSpec::spectral();
  throw StructuralError("unknown norm '" + name + "'");
}

}  // namespace

NormSpec NormSpec::parse(const std::string& text) {
  const std::string t = trim(text);
  if (t.rfind("product(", 0) != 0) return parse_atomic(t);
  if (t.back() != ')') throw StructuralError("product norm missing ')': " + t);
  const std::string body = t.substr(8, t.size() - 9);
  std::vector<ProductChild> children;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    ProductChild child;
    if (colon == std::string::npos) {
      child.norm = parse_atomic(item);
    } else {
      child.norm = parse_atomic(trim(item.substr(0, colon)));
      const std::string r = trim(item.substr(colon + 1));
      auto res = std::from_chars(r.data(), r.data() + r.size(), child.radius);
      if (res.ec != std::errc{} || res.ptr != r.data() + r.size()) {
        throw StructuralError("bad product radius '" + r + "'");
      }
    }
    children.push_back(child);
  }
  return product(std::move(children));
}

// --- block-level primitives -------------------------------------------------

namespace {

Matrix spectral_lmo(const Matrix& d) {
  const SvdResult svd = svd_reduced(d);
  if (svd.rank() == 0) return Matrix::Zero(d.rows(), d.cols());
  return -(svd.u * svd.v.transpose());
}

Matrix sign_lmo(const Matrix& d) {
  return d.unaryExpr([](double v) { return v > 0.0 ? -1.0 : (v < 0.0 ? 1.0 : 0.0); });
}

/// lmo of a single atomic norm on one block, treated on its own.
Matrix atomic_block_lmo(NormKind kind, const Matrix& d) {
  switch (kind) {
    case NormKind::euclidean: {
      const double n = d.norm();
      if (n == 0.0) return Matrix::Zero(d.rows(), d.cols());
      return -d / n;
    }
    case NormKind::max_norm:
      return sign_lmo(d);
    case NormKind::spectral:
      return spectral_lmo(d);
    case NormKind::product_max:
      break;
  }
  throw StructuralError("atomic_block_lmo: product norm");
}

double atomic_block_norm(NormKind kind, const Matrix& x) {
  switch (kind) {
    case NormKind::euclidean:
      return x.norm();
    case NormKind::max_norm:
      return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    case NormKind::spectral: {
      if (x.isZero(0.0)) return 0.0;
      const SvdResult svd = svd_reduced(x);
      return svd.rank() == 0 ? 0.0 : svd.sigma(0);
    }
    case NormKind::product_max:
      break;
  }
  throw StructuralError("atomic_block_norm: product norm");
}

}  // namespace

Direction lmo(const NormSpec& norm, const Direction& d) {
  norm.validate_for(d.shapes());
  require_finite(d, "lmo input");
  Direction out = ParamVector::zeros_like(d);
  switch (norm.kind) {
    case NormKind::euclidean: {
      const double n = euclidean_norm(d);
      if (n == 0.0) return out;
      for (std::size_t l = 0; l < d.num_blocks(); ++l) out.block(l).data() = -d.block(l).data() / n;
      break;
    }
    case NormKind::max_norm:
      for (std::size_t l = 0; l < d.num_blocks(); ++l) out.block(l).data() = sign_lmo(d.block(l).data());
      break;
    case NormKind::spectral:
      out.block(0).data() = spectral_lmo(d.block(0).data());
      break;
    case NormKind::product_max:
      for (std::size_t l = 0; l < d.num_blocks(); ++l) {
        const auto& child = norm.children[l];
        out.block(l).data() = child.radius * atomic_block_lmo(child.norm.kind, d.block(l).data());
      }
      break;
  }
  require_finite(out, "lmo");
  return out;
}

double dual_norm(const NormSpec& norm, const Direction& d) { return -inner(d, lmo(norm, d)); }

Direction sharp(const NormSpec& norm, const Direction& d) {
  const Direction l = lmo(norm, d);
  return scale(inner(d, l), l);
}

double primal_norm(const NormSpec& norm, const ParamVector& x) {
  norm.validate_for(x.shapes());
  switch (norm.kind) {
    case NormKind::euclidean:
      return euclidean_norm(x);
    case NormKind::max_norm: {
      double m = 0.0;
      for (const auto& b : x.blocks()) m = std::max(m, atomic_block_norm(NormKind::max_norm, b.data()));
      return m;
    }
    case NormKind::spectral:
      return atomic_block_norm(NormKind::spectral, x.block(0).data());
    case NormKind::product_max: {
      double m = 0.0;
      for (std::size_t l = 0; l < x.num_blocks(); ++l) {
        const auto& child = norm.children[l];
        m = std::max(m, atomic_block_norm(child.norm.kind, x.block(l).data()) / child.radius);
      }
      return m;
    }
  }
  return 0.0;
}

std::vector<double> block_norms(const NormSpec& product, const ParamVector& x) {
  if (!product.is_product()) throw StructuralError("block_norms needs a product norm");
  product.validate_for(x.shapes());
  std::vector<double> out;
  out.reserve(x.num_blocks());
  for (std::size_t l = 0; l < x.num_blocks(); ++l) {
    out.push_back(atomic_block_norm(product.children[l].norm.kind, x.block(l).data()));
  }
  return out;
}

// --- spectral machinery -----------------------------------------------------

Matrix SvdResult::reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }

SvdResult svd_reduced(const Matrix& m) {
  if (!m.allFinite()) throw NumericalError("svd_reduced: non-finite input");
  SvdResult out;
  if (m.size() == 0) return out;
  const Eigen::MatrixXd dense = m;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("svd_reduced: Jacobi SVD did not converge");
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s.size() > 0 && s(0) > 0.0) {
    const double cutoff = kSvdRankTolerance * s(0);
    while (r < s.size() && s(r) > cutoff) ++r;
  }
  out.sigma = s.head(r);
  out.u = svd.matrixU().leftCols(r);
  out.v = svd.matrixV().leftCols(r);
  return out;
}

double spectral_norm_power(const Matrix& m, double tol, int max_iter) {
  if (!m.allFinite()) throw NumericalError("spectral_norm_power: non-finite input");
  if (m.size() == 0 || m.isZero(0.0)) return 0.0;

  Rng rng(Rng::mix(static_cast<std::uint64_t>(m.rows()) * 0x100000001B3ULL ^
                   static_cast<std::uint64_t>(m.cols())));
  Eigen::VectorXd v(m.cols());
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = 2.0 * rng.uniform() - 1.0;
  v.normalize();

  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd w = m * v;
    const double next = w.norm();
    Eigen::VectorXd u = m.transpose() * w;
    const double un = u.norm();
    if (un == 0.0) {
      // Start vector fell in the null space; restart from a coordinate vector.
      v.setZero();
      v(it % v.size()) = 1.0;
      continue;
    }
    v = u / un;
    if (it > 0 && std::abs(next - sigma) <= tol * next) return next;
    sigma = next;
  }
  throw NumericalError("spectral_norm_power: no convergence after " + std::to_string(max_iter) +
                       " iterations");
}

}  // namespace nonclip
