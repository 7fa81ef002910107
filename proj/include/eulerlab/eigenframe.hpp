#pragma once

#include <array>

#include "eulerlab/linalg.hpp"

namespace eulerlab {

enum class FrameSource { strain, hessian, other };

/// Eigen-decomposition of a symmetric 3x3 tensor.
///
/// Eigenvalues are sorted descending. Eigenvectors form a right-handed
/// orthonormal set: the first two follow the sign convention "largest-magnitude
/// component positive, ties to the lowest index", the third is their cross product.
struct EigenFrame {
  std::array<double, 3> eigenvalues{};
  std::array<Vec3, 3> eigenvectors{};
  FrameSource source = FrameSource::other;
  /// True when the Jacobi fallback handled a (near-)degenerate spectrum.
  bool used_fallback = false;
};

/// Geometry of a vector w against the eigenframe of M.
struct AlignmentMetrics {
  std::array<double, 3> cosines{};  // |cos angle(w, e_i)|
  int best_index = 0;
  double rayleigh = 0.0;  // (w . M w) / |w|^2
  double residual = 0.0;  // ||M w - rayleigh w|| / ||M w||, 0 when M w = 0

  double best_cosine() const { return cosines[static_cast<std::size_t>(best_index)]; }
};

/// Alignment thresholds: measured flows and exactly constructed data.
inline constexpr double kAlignToleranceMeasured = 1e-3;
inline constexpr double kAlignToleranceSynthetic = 1e-10;

/// Relative eigenvalue gap below which the Jacobi fallback is used.
inline constexpr double kDegeneracyGap = 1e-9;

EigenFrame decompose(const Sym3& m, FrameSource source = FrameSource::other);

/// Checks symmetry to 1e-12 relative (ContractViolation otherwise), then decomposes.
EigenFrame decompose(const Mat3& m, FrameSource source = FrameSource::other);

/// Throws ContractViolation for a zero (or non-finite) vector.
AlignmentMetrics alignment(const Sym3& m, const Vec3& w);
AlignmentMetrics alignment(const EigenFrame& frame, const Sym3& m, const Vec3& w);

/// Alignment is declared when the best cosine reaches 1 - eps_align.
inline bool is_aligned(const AlignmentMetrics& a, double eps_align) {
  return a.best_cosine() >= 1.0 - eps_align;
}

/// max |mu_i|.
double mu_max(const EigenFrame& frame);

/// Smallest gap between consecutive eigenvalues divided by max |mu_i| (0 for a zero tensor).
double relative_gap(const EigenFrame& frame);

/// Reassemble sum_i lambda_i e_i e_i^T.
Sym3 reconstruct(const EigenFrame& frame);

}  // namespace eulerlab
