#pragma once

#include "nonclip/param_space.hpp"

#include <string>
#include <vector>

namespace nonclip {

enum class NormKind { euclidean, max_norm, spectral, product_max };

std::string to_string(NormKind kind);

struct ProductChild;

/// Norm geometry over a ParamVector.
///
/// Atomic kinds act on the whole parameter vector: Euclidean and MaxNorm on the
/// concatenation of all blocks, Spectral on a single matrix block. ProductMax
/// holds one atomic child per block with radius r_l and realizes
/// ||x|| = max_l ||x_l||_l / r_l. Its dual is sum_l r_l ||d_l||_{l,*}.
struct NormSpec {
  NormKind kind = NormKind::euclidean;
  std::vector<ProductChild> children;

  static NormSpec euclidean();
  static NormSpec max_norm();
  static NormSpec spectral();
  static NormSpec product(std::vector<ProductChild> children);

  bool is_product() const { return kind == NormKind::product_max; }
  /// Throws StructuralError unless the norm can be applied to vectors of this layout.
  void validate_for(const std::vector<Shape>& shapes) const;

  /// Text form: "euclidean", "max", "spectral", "product(spectral:1, max:0.5)".
  std::string to_string() const;
  static NormSpec parse(const std::string& text);
};

struct ProductChild {
  NormSpec norm;
  double radius = 1.0;
};

bool operator==(const NormSpec& a, const NormSpec& b);
bool operator==(const ProductChild& a, const ProductChild& b);

/// Minimizer of <d, x> over the unit ball of `norm`; zero for d = 0.
/// MaxNorm uses sign(0) = 0. Spectral keeps singular triplets above 1e-12 * sigma_max.
Direction lmo(const NormSpec& norm, const Direction& d);

/// Always -<d, lmo(d)>.
double dual_norm(const NormSpec& norm, const Direction& d);

/// d# = -||d||_* lmo(d).
Direction sharp(const NormSpec& norm, const Direction& d);

double primal_norm(const NormSpec& norm, const ParamVector& x);

/// Per-block norms for a ProductMax norm, unscaled by the radii: ||x_l||_l.
std::vector<double> block_norms(const NormSpec& product, const ParamVector& x);

struct SvdResult {
  Matrix u;             // m x r
  Eigen::VectorXd sigma;  // r, nonincreasing
  Matrix v;             // n x r

  Eigen::Index rank() const { return sigma.size(); }
  Matrix reconstruct() const;
};

inline constexpr double kSvdRankTolerance = 1e-12;

/// Thin SVD with singular values below kSvdRankTolerance * sigma_max dropped.
SvdResult svd_reduced(const Matrix& m);

inline constexpr double kPowerTolerance = 1e-10;
inline constexpr int kPowerMaxIterations = 1000;

/// Largest singular value by power iteration on M^T M. The start vector is
/// derived from the matrix shape. Returns 0 for the zero matrix; throws
/// NumericalError when the relative change stays above `tol` after `max_iter` steps.
double spectral_norm_power(const Matrix& m, double tol = kPowerTolerance,
                           int max_iter = kPowerMaxIterations);

}  // namespace nonclip
