#include "eulerlab/spectral_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <new>
#include <optional>
#include <sstream>

#include "eulerlab/errors.hpp"
#include "eulerlab/summation.hpp"

namespace eulerlab {

namespace detail {
void* aligned_allocate(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}
void aligned_free(void* p) noexcept { fftw_free(p); }
}  // namespace detail

struct Grid::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~Plans() {
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
}  // namespace

std::shared_ptr<const Grid> Grid::create(int n, double box_length) {
  if (!is_power_of_two(n) || n < 16) {
    std::ostringstream msg;
    msg << "grid size n=" << n << " must be a power of two >= 16";
    throw ConfigError(msg.str());
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw ConfigError("box_length must be positive and finite");
  return std::shared_ptr<const Grid>(new Grid(n, box_length));
}

Grid::Grid(int n, double box_length)
    : n_(n),
      box_length_(box_length),
      k_unit_(2.0 * std::numbers::pi / box_length),
      point_count_(static_cast<std::size_t>(n) * n * n),
      mode_count_(static_cast<std::size_t>(n) * n * (n / 2 + 1)),
      plans_(std::make_unique<Plans>()) {
  // FFTW_ESTIMATE never touches the arrays and always picks the same
  // algorithm, so transforms are bit-reproducible across runs.
  AlignedVector<double> real(point_count_);
  AlignedVector<Complex> modes(mode_count_);
  plans_->r2c = fftw_plan_dft_r2c_3d(n, n, n, real.data(), as_fftw(modes.data()), FFTW_ESTIMATE);
  plans_->c2r = fftw_plan_dft_c2r_3d(n, n, n, as_fftw(modes.data()), real.data(), FFTW_ESTIMATE);
  if (!plans_->r2c || !plans_->c2r) throw NumericalFault("FFT plan creation failed");
}

Grid::~Grid() = default;

double Grid::cell_volume() const {
  const double h = spacing();
  return h * h * h;
}

bool Grid::keeps_mode(int i, int j, int kz) const {
  const int cut = dealias_cutoff();
  return std::abs(wavenumber(i)) <= cut && std::abs(wavenumber(j)) <= cut && kz <= cut;
}

void Grid::forward(const double* in, Complex* out) const {
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in), as_fftw(out));
}

void Grid::inverse(const Complex* in, double* out) const {
  // c2r destroys its input.
  AlignedVector<Complex> scratch(in, in + mode_count_);
  fftw_execute_dft_c2r(plans_->c2r, as_fftw(scratch.data()), out);
  const double scale = 1.0 / static_cast<double>(point_count_);
  for (std::size_t p = 0; p < point_count_; ++p) out[p] *= scale;
}

// ---------------------------------------------------------------------------

SpectralField::SpectralField(GridPtr grid, int components)
    : grid_(std::move(grid)), components_(components) {
  if (!grid_) throw ContractViolation("SpectralField requires a grid");
  if (components_ < 1) throw ContractViolation("SpectralField needs at least one component");
  physical_.assign(grid_->point_count() * components_, 0.0);
  fourier_.assign(grid_->mode_count() * components_, Complex{});
}

void SpectralField::check_component(int c) const {
  if (c < 0 || c >= components_) {
    std::ostringstream msg;
    msg << "component " << c << " out of range [0," << components_ << ")";
    throw ContractViolation(msg.str());
  }
}

std::span<const double> SpectralField::physical(int c) const {
  check_component(c);
  if (!physical_current_) throw ContractViolation("physical representation is stale");
  const std::size_t np = grid_->point_count();
  return {physical_.data() + c * np, np};
}

std::span<const Complex> SpectralField::fourier(int c) const {
  check_component(c);
  if (!fourier_current_) throw ContractViolation("Fourier representation is stale");
  const std::size_t nm = grid_->mode_count();
  return {fourier_.data() + c * nm, nm};
}

std::span<double> SpectralField::edit_physical(int c) {
  check_component(c);
  sync_physical();
  fourier_current_ = false;
  const std::size_t np = grid_->point_count();
  return {physical_.data() + c * np, np};
}

std::span<Complex> SpectralField::edit_fourier(int c) {
  check_component(c);
  sync_fourier();
  physical_current_ = false;
  const std::size_t nm = grid_->mode_count();
  return {fourier_.data() + c * nm, nm};
}

SpectralField& SpectralField::sync_fourier() {
  if (fourier_current_) return *this;
  const Grid& g = *grid_;
  const std::size_t np = g.point_count();
  const int n = g.n();
  for (int c = 0; c < components_; ++c) {
    const double* src = physical_.data() + c * np;
    for (std::size_t p = 0; p < np; ++p) {
      if (!std::isfinite(src[p])) {
        const int i = static_cast<int>(p / (static_cast<std::size_t>(n) * n));
        const int j = static_cast<int>((p / n) % n);
        const int k = static_cast<int>(p % n);
        std::ostringstream msg;
        msg << "non-finite value " << src[p] << " at point (" << i << "," << j << "," << k
            << ") component " << c;
        throw NumericalFault(msg.str());
      }
    }
    g.forward(src, fourier_.data() + c * g.mode_count());
  }
  fourier_current_ = true;
  return *this;
}

SpectralField& SpectralField::sync_physical() {
  if (physical_current_) return *this;
  const Grid& g = *grid_;
  const std::size_t nm = g.mode_count();
  const int n = g.n();
  const int h = g.half();
  for (int c = 0; c < components_; ++c) {
    const Complex* src = fourier_.data() + c * nm;
    for (std::size_t m = 0; m < nm; ++m) {
      if (!std::isfinite(src[m].real()) || !std::isfinite(src[m].imag())) {
        const int i = static_cast<int>(m / (static_cast<std::size_t>(n) * h));
        const int j = static_cast<int>((m / h) % n);
        const int kz = static_cast<int>(m % h);
        std::ostringstream msg;
        msg << "non-finite Fourier mode (" << g.wavenumber(i) << "," << g.wavenumber(j) << ","
            << kz << ") component " << c;
        throw NumericalFault(msg.str());
      }
    }
    g.inverse(src, physical_.data() + c * g.point_count());
  }
  physical_current_ = true;
  return *this;
}

double SpectralField::max_abs() const {
  if (!physical_current_) {
    SpectralField copy = *this;
    copy.sync_physical();
    return copy.max_abs();
  }
  double m = 0.0;
  for (double x : physical_) m = std::max(m, std::abs(x));
  return m;
}

SpectralField to_fourier(SpectralField f) {
  f.sync_fourier();
  return f;
}

SpectralField to_physical(SpectralField f) {
  f.sync_physical();
  return f;
}

// ---------------------------------------------------------------------------

namespace {

const SpectralField& with_fourier(const SpectralField& f, std::optional<SpectralField>& storage) {
  if (f.fourier_current()) return f;
  storage = f;
  storage->sync_fourier();
  return *storage;
}

const SpectralField& with_physical(const SpectralField& f, std::optional<SpectralField>& storage) {
  if (f.physical_current()) return f;
  storage = f;
  storage->sync_physical();
  return *storage;
}

template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const int n = g.n();
  const int h = g.half();
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int kz = 0; kz < h; ++kz, ++idx) fn(i, j, kz, idx);
}

// Signed integer wavenumber along an axis (0..2) for mode (i, j, kz).
int axis_index(int axis, int i, int j, int kz) { return axis == 0 ? i : (axis == 1 ? j : kz); }

double axis_k(const Grid& g, int axis, int i, int j, int kz) {
  const int idx = axis_index(axis, i, j, kz);
  return axis == 2 ? g.k_unit() * idx : g.k_of(idx);
}

void check_axis(int axis) {
  if (axis < 1 || axis > 3) {
    std::ostringstream msg;
    msg << "axis " << axis << " outside 1..3";
    throw ContractViolation(msg.str());
  }
}

}  // namespace

SpectralField spectral_derivative(const SpectralField& f, int axis) {
  check_axis(axis);
  std::optional<SpectralField> storage;
  const SpectralField& src = with_fourier(f, storage);
  const Grid& g = f.grid();
  const int a = axis - 1;
  SpectralField out(f.grid_ptr(), f.components());
  for (int c = 0; c < f.components(); ++c) {
    auto in = src.fourier(c);
    auto dst = out.edit_fourier(c);
    for_each_mode(g, [&](int i, int j, int kz, std::size_t idx) {
      if (g.is_nyquist(axis_index(a, i, j, kz))) {
        dst[idx] = Complex{};
        return;
      }
      const double k = axis_k(g, a, i, j, kz);
      dst[idx] = Complex{-k * in[idx].imag(), k * in[idx].real()};
    });
  }
  return out;
}

SpectralField spectral_second_derivative(const SpectralField& f, int axis_a, int axis_b) {
  check_axis(axis_a);
  check_axis(axis_b);
  std::optional<SpectralField> storage;
  const SpectralField& src = with_fourier(f, storage);
  const Grid& g = f.grid();
  const int a = axis_a - 1;
  const int b = axis_b - 1;
  SpectralField out(f.grid_ptr(), f.components());
  for (int c = 0; c < f.components(); ++c) {
    auto in = src.fourier(c);
    auto dst = out.edit_fourier(c);
    for_each_mode(g, [&](int i, int j, int kz, std::size_t idx) {
      if (a != b && (g.is_nyquist(axis_index(a, i, j, kz)) || g.is_nyquist(axis_index(b, i, j, kz)))) {
        dst[idx] = Complex{};
        return;
      }
      dst[idx] = -axis_k(g, a, i, j, kz) * axis_k(g, b, i, j, kz) * in[idx];
    });
  }
  return out;
}

SpectralField negative_laplacian(const SpectralField& f) {
  std::optional<SpectralField> storage;
  const SpectralField& src = with_fourier(f, storage);
  const Grid& g = f.grid();
  SpectralField out(f.grid_ptr(), f.components());
  for (int c = 0; c < f.components(); ++c) {
    auto in = src.fourier(c);
    auto dst = out.edit_fourier(c);
    for_each_mode(g, [&](int i, int j, int kz, std::size_t idx) {
      const double kx = g.k_of(i), ky = g.k_of(j), kk = g.k_unit() * kz;
      dst[idx] = (kx * kx + ky * ky + kk * kk) * in[idx];
    });
  }
  return out;
}

SpectralField solve_poisson(const SpectralField& rhs) {
  std::optional<SpectralField> storage;
  const SpectralField& src = with_fourier(rhs, storage);
  const Grid& g = rhs.grid();
  SpectralField out(rhs.grid_ptr(), rhs.components());
  for (int c = 0; c < rhs.components(); ++c) {
    auto in = src.fourier(c);
    // ||F|| over the full spectrum from the half spectrum.
    CompensatedSum energy;
    for_each_mode(g, [&](int, int, int kz, std::size_t idx) {
      const double w = (kz == 0 || kz == g.n() / 2) ? 1.0 : 2.0;
      energy.add(w * std::norm(in[idx]));
    });
    const double total = std::sqrt(energy.value());
    if (std::abs(in[0]) > 1e-10 * total) {
      std::ostringstream msg;
      msg << "Poisson right-hand side has non-zero mean (|F(0)| = " << std::abs(in[0])
          << ", ||F|| = " << total << ")";
      throw ConservationViolation(msg.str());
    }
    auto dst = out.edit_fourier(c);
    for_each_mode(g, [&](int i, int j, int kz, std::size_t idx) {
      if (idx == 0) {
        dst[idx] = Complex{};
        return;
      }
      const double kx = g.k_of(i), ky = g.k_of(j), kk = g.k_unit() * kz;
      dst[idx] = in[idx] / (kx * kx + ky * ky + kk * kk);
    });
  }
  return out;
}

void apply_dealias(SpectralField& f) {
  const Grid& g = f.grid();
  for (int c = 0; c < f.components(); ++c) {
    auto modes = f.edit_fourier(c);
    for_each_mode(g, [&](int i, int j, int kz, std::size_t idx) {
      if (!g.keeps_mode(i, j, kz)) modes[idx] = Complex{};
    });
  }
}

void project_solenoidal(SpectralField& f) {
  if (f.components() != 3) throw ContractViolation("projection needs a 3-component field");
  const Grid& g = f.grid();
  auto m0 = f.edit_fourier(0);
  auto m1 = f.edit_fourier(1);
  auto m2 = f.edit_fourier(2);
  for_each_mode(g, [&](int i, int j, int kz, std::size_t idx) {
    // Nyquist components cannot be represented consistently; drop them.
    if (g.is_nyquist(i) || g.is_nyquist(j) || g.is_nyquist(kz)) {
      if (idx != 0) m0[idx] = m1[idx] = m2[idx] = Complex{};
      return;
    }
    const double kx = g.k_of(i), ky = g.k_of(j), kk = g.k_unit() * kz;
    const double k2 = kx * kx + ky * ky + kk * kk;
    if (k2 == 0.0) return;
    const Complex kdotu = kx * m0[idx] + ky * m1[idx] + kk * m2[idx];
    m0[idx] -= kx * kdotu / k2;
    m1[idx] -= ky * kdotu / k2;
    m2[idx] -= kk * kdotu / k2;
  });
}

double grid_sum_squares(const SpectralField& f, int c) {
  std::optional<SpectralField> storage;
  CompensatedSum s;
  for (double x : with_physical(f, storage).physical(c)) s.add(x * x);
  return s.value();
}

double spectral_sum_squares(const SpectralField& f, int c) {
  std::optional<SpectralField> storage;
  const SpectralField& src = with_fourier(f, storage);
  const Grid& g = f.grid();
  auto modes = src.fourier(c);
  CompensatedSum s;
  for_each_mode(g, [&](int, int, int kz, std::size_t idx) {
    const double w = (kz == 0 || kz == g.n() / 2) ? 1.0 : 2.0;
    s.add(w * std::norm(modes[idx]));
  });
  return s.value() / static_cast<double>(g.point_count());
}

double integrate_product(const SpectralField& f, int a, const SpectralField& g, int b) {
  std::optional<SpectralField> sf, sg;
  auto x = with_physical(f, sf).physical(a);
  auto y = with_physical(g, sg).physical(b);
  CompensatedSum s;
  for (std::size_t p = 0; p < x.size(); ++p) s.add(x[p] * y[p]);
  return s.value() * f.grid().cell_volume();
}

double integrate_product_spectral(const SpectralField& f, int a, const SpectralField& g, int b) {
  std::optional<SpectralField> sf, sg;
  const SpectralField& pf = with_fourier(f, sf);
  const SpectralField& pg = with_fourier(g, sg);
  const Grid& grid = f.grid();
  auto x = pf.fourier(a);
  auto y = pg.fourier(b);
  CompensatedSum s;
  for_each_mode(grid, [&](int, int, int kz, std::size_t idx) {
    const double w = (kz == 0 || kz == grid.n() / 2) ? 1.0 : 2.0;
    s.add(w * (x[idx].real() * y[idx].real() + x[idx].imag() * y[idx].imag()));
  });
  return s.value() / static_cast<double>(grid.point_count()) * grid.cell_volume();
}

std::vector<double> evaluate_at(const SpectralField& f, const Vec3& x) {
  const Grid& g = f.grid();
  const int n = g.n();
  const int h = g.half();
  std::vector<Complex> bx(n), by(n), bz(h);
  for (int m = 0; m < n; ++m) {
    const double kx = g.k_of(m);
    if (g.is_nyquist(m)) {
      bx[m] = std::cos(kx * x[0]);
      by[m] = std::cos(kx * x[1]);
    } else {
      bx[m] = std::polar(1.0, kx * x[0]);
      by[m] = std::polar(1.0, kx * x[1]);
    }
  }
  for (int m = 0; m < h; ++m) {
    const double kz = g.k_unit() * m;
    if (m == 0)
      bz[m] = 1.0;
    else if (g.is_nyquist(m))
      bz[m] = std::cos(kz * x[2]);
    else
      bz[m] = 2.0 * std::polar(1.0, kz * x[2]);
  }
  std::optional<SpectralField> storage;
  const SpectralField& src = with_fourier(f, storage);
  std::vector<double> out(f.components());
  const double scale = 1.0 / static_cast<double>(g.point_count());
  for (int c = 0; c < f.components(); ++c) {
    auto modes = src.fourier(c);
    Complex total{};
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      Complex plane{};
      for (int j = 0; j < n; ++j) {
        Complex line{};
        for (int kz = 0; kz < h; ++kz, ++idx) line += modes[idx] * bz[kz];
        plane += line * by[j];
      }
      total += plane * bx[i];
    }
    out[c] = total.real() * scale;
  }
  return out;
}

SpectralField zero_pad(const SpectralField& f, int factor) {
  if (factor < 1) throw ContractViolation("refinement factor must be >= 1");
  std::optional<SpectralField> storage;
  const SpectralField& src = with_fourier(f, storage);
  const Grid& coarse = f.grid();
  const int n = coarse.n();
  GridPtr fine = factor == 1 ? f.grid_ptr() : Grid::create(n * factor, coarse.box_length());
  const int nf = fine->n();

  struct Target {
    int index;
    double weight;
  };
  auto map_full = [&](int m, std::vector<Target>& out) {
    out.clear();
    if (m < n / 2) {
      out.push_back({m, 1.0});
    } else if (m > n / 2) {
      out.push_back({m + (nf - n), 1.0});
    } else if (factor == 1) {
      out.push_back({m, 1.0});
    } else {
      out.push_back({n / 2, 0.5});
      out.push_back({nf - n / 2, 0.5});
    }
  };

  const double scale = static_cast<double>(fine->point_count()) / coarse.point_count();
  SpectralField out(fine, f.components());
  std::vector<Target> ti, tj;
  for (int c = 0; c < f.components(); ++c) {
    auto in = src.fourier(c);
    auto dst = out.edit_fourier(c);
    for (int i = 0; i < n; ++i) {
      map_full(i, ti);
      for (int j = 0; j < n; ++j) {
        map_full(j, tj);
        for (int kz = 0; kz < coarse.half(); ++kz) {
          const double wz = (kz == n / 2 && factor > 1) ? 0.5 : 1.0;
          const Complex v = in[coarse.mode_index(i, j, kz)] * (scale * wz);
          for (const Target& a : ti)
            for (const Target& b : tj) dst[fine->mode_index(a.index, b.index, kz)] += a.weight * b.weight * v;
        }
      }
    }
  }
  return out;
}

}  // namespace eulerlab
