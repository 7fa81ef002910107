#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "eulerlab/linalg.hpp"

namespace eulerlab {

using Complex = std::complex<double>;

namespace detail {
void* aligned_allocate(std::size_t bytes);
void aligned_free(void* p) noexcept;
}  // namespace detail

/// Allocator returning SIMD-aligned storage suitable for the FFT backend.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(detail::aligned_allocate(n * sizeof(T))); }
  void deallocate(T* p, std::size_t) noexcept { detail::aligned_free(p); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/**
 * Cubic periodic box with n points per axis.
 *
 * Physical points are stored row-major with x1 slowest: index (i*n + j)*n + k
 * holds x = (i, j, k) * box_length / n.
 *
 * Fourier modes use the real-to-complex half spectrum: index
 * (i*n + j)*(n/2+1) + kz. Axis indices map to integer wavenumbers
 * 0, 1, ..., n/2, -(n/2-1), ..., -1 (index n/2 is the Nyquist mode).
 *
 * Transform convention (unnormalised forward):
 *   F(k) = sum_x f(x) exp(-i k.x),   f(x) = n^-3 sum_k F(k) exp(+i k.x).
 * A constant field c therefore has F(0) = c n^3.
 */
class Grid {
 public:
  static std::shared_ptr<const Grid> create(int n, double box_length = 2.0 * std::numbers::pi);

  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;
  ~Grid();

  int n() const { return n_; }
  int half() const { return n_ / 2 + 1; }
  double box_length() const { return box_length_; }
  double spacing() const { return box_length_ / n_; }
  double cell_volume() const;
  std::size_t point_count() const { return point_count_; }
  std::size_t mode_count() const { return mode_count_; }

  /// Signed integer wavenumber for a full-length axis index.
  int wavenumber(int index) const { return index <= n_ / 2 ? index : index - n_; }
  bool is_nyquist(int index) const { return index == n_ / 2; }
  /// Physical wavenumber 2*pi/L * m.
  double k_of(int index) const { return k_unit_ * wavenumber(index); }
  double k_unit() const { return k_unit_; }

  /// Largest |m| kept by the 2/3 dealiasing rule.
  int dealias_cutoff() const { return (n_ - 1) / 3; }
  bool keeps_mode(int i, int j, int kz) const;

  std::size_t point_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  std::size_t mode_index(int i, int j, int kz) const {
    return (static_cast<std::size_t>(i) * n_ + j) * half() + kz;
  }
  Vec3 point(int i, int j, int k) const { return {i * spacing(), j * spacing(), k * spacing()}; }

  /// Unnormalised forward transform of one scalar component.
  void forward(const double* in, Complex* out) const;
  /// Inverse transform including the 1/n^3 factor. Does not modify `in`.
  void inverse(const Complex* in, double* out) const;

 private:
  Grid(int n, double box_length);
  struct Plans;
  int n_;
  double box_length_;
  double k_unit_;
  std::size_t point_count_;
  std::size_t mode_count_;
  std::unique_ptr<Plans> plans_;
};

using GridPtr = std::shared_ptr<const Grid>;

/**
 * Scalar (1 component) or vector/tensor (3 or 6 components) field holding both
 * the physical-grid values and the Fourier modes. Each representation carries a
 * currency flag; read access to a stale representation is a contract violation,
 * write access marks the other representation stale.
 */
class SpectralField {
 public:
  SpectralField(GridPtr grid, int components);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int components() const { return components_; }

  bool physical_current() const { return physical_current_; }
  bool fourier_current() const { return fourier_current_; }

  std::span<const double> physical(int c) const;
  std::span<const Complex> fourier(int c) const;
  /// Writable physical data; syncs it first if stale, then invalidates Fourier.
  std::span<double> edit_physical(int c);
  /// Writable Fourier data; syncs it first if stale, then invalidates physical.
  std::span<Complex> edit_fourier(int c);

  /// Populate the Fourier representation. Throws NumericalFault on non-finite data.
  SpectralField& sync_fourier();
  /// Populate the physical representation. Throws NumericalFault on non-finite modes.
  SpectralField& sync_physical();

  /// max |f| over all components (physical representation is synced on a copy if needed).
  double max_abs() const;

 private:
  void check_component(int c) const;
  GridPtr grid_;
  int components_;
  AlignedVector<double> physical_;
  AlignedVector<Complex> fourier_;
  bool physical_current_ = true;
  bool fourier_current_ = true;
};

SpectralField to_fourier(SpectralField f);
SpectralField to_physical(SpectralField f);

/// d f / d x_axis for axis in 1..3 (all components). Nyquist modes of the
/// differentiated axis are set to zero. Result has its Fourier data current.
SpectralField spectral_derivative(const SpectralField& f, int axis);

/// Second derivative d^2 f / dx_a dx_b (axes 1..3). For a == b the Nyquist mode
/// is kept (-k^2 is real and even); for a != b it is zeroed like two first derivatives.
SpectralField spectral_second_derivative(const SpectralField& f, int axis_a, int axis_b);

/// -Laplacian of every component.
SpectralField negative_laplacian(const SpectralField& f);

/**
 * Solve -Laplacian(phi) = rhs for a scalar rhs on the periodic box.
 * rhs must have zero mean: |F(0)| <= 1e-10 * ||F|| (else ConservationViolation).
 * The returned phi has zero mean.
 */
SpectralField solve_poisson(const SpectralField& rhs);

/// Zero every mode outside the 2/3-rule band.
void apply_dealias(SpectralField& f);

/// Leray projection of a 3-component field onto divergence-free fields (in Fourier space).
void project_solenoidal(SpectralField& f);

/// Grid sum of f_c^2 (physical space, compensated).
double grid_sum_squares(const SpectralField& f, int c);
/// n^-3 * sum over the full spectrum of |F_c(k)|^2 (equals grid_sum_squares by Parseval).
double spectral_sum_squares(const SpectralField& f, int c);
/// Physical-space integral of f_a * f_b over the box.
double integrate_product(const SpectralField& f, int a, const SpectralField& g, int b);
/// Same integral evaluated from Fourier modes.
double integrate_product_spectral(const SpectralField& f, int a, const SpectralField& g, int b);

/// Trigonometric interpolant of all components at an arbitrary point
/// (Nyquist modes enter as cosines).
std::vector<double> evaluate_at(const SpectralField& f, const Vec3& x);

/// Band-limited prolongation onto a grid refined by an integer factor.
SpectralField zero_pad(const SpectralField& f, int factor);

}  // namespace eulerlab
