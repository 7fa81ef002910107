#include "eulerlab/euler_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "eulerlab/errors.hpp"

namespace eulerlab {

namespace {

constexpr int kSymI[6] = {0, 1, 2, 0, 0, 1};
constexpr int kSymJ[6] = {0, 1, 2, 1, 2, 2};

template <class Fn>
void for_each_point(const Grid& g, Fn&& fn) {
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.n(); ++k) fn(g.point(i, j, k), g.point_index(i, j, k));
}

template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  std::size_t idx = 0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int kz = 0; kz < g.half(); ++kz, ++idx) fn(i, j, kz, idx);
}

// Curl of a Fourier-current 3-component field, computed mode by mode.
SpectralField curl(const SpectralField& u) {
  const Grid& g = u.grid();
  SpectralField w(u.grid_ptr(), 3);
  auto u0 = u.fourier(0), u1 = u.fourier(1), u2 = u.fourier(2);
  auto w0 = w.edit_fourier(0), w1 = w.edit_fourier(1), w2 = w.edit_fourier(2);
  const Complex I{0.0, 1.0};
  for_each_mode(g, [&](int i, int j, int kz, std::size_t idx) {
    const double kx = g.is_nyquist(i) ? 0.0 : g.k_of(i);
    const double ky = g.is_nyquist(j) ? 0.0 : g.k_of(j);
    const double kk = g.is_nyquist(kz) ? 0.0 : g.k_unit() * kz;
    w0[idx] = I * (ky * u2[idx] - kk * u1[idx]);
    w1[idx] = I * (kk * u0[idx] - kx * u2[idx]);
    w2[idx] = I * (kx * u1[idx] - ky * u0[idx]);
  });
  return w;
}

// Projected, dealiased nonlinear term u x w in Fourier space.
SpectralField nonlinear_term(const SpectralField& u_hat) {
  const Grid& g = u_hat.grid();
  SpectralField u = u_hat;
  u.sync_physical();
  SpectralField w = curl(u_hat);
  w.sync_physical();
  SpectralField out(u_hat.grid_ptr(), 3);
  {
    auto a0 = u.physical(0), a1 = u.physical(1), a2 = u.physical(2);
    auto b0 = w.physical(0), b1 = w.physical(1), b2 = w.physical(2);
    auto o0 = out.edit_physical(0), o1 = out.edit_physical(1), o2 = out.edit_physical(2);
    for (std::size_t p = 0; p < g.point_count(); ++p) {
      o0[p] = a1[p] * b2[p] - a2[p] * b1[p];
      o1[p] = a2[p] * b0[p] - a0[p] * b2[p];
      o2[p] = a0[p] * b1[p] - a1[p] * b0[p];
    }
  }
  out.sync_fourier();
  apply_dealias(out);
  project_solenoidal(out);
  return out;
}

// base + scale * incr, Fourier representation only.
SpectralField combine(const SpectralField& base, double scale, const SpectralField& incr) {
  SpectralField out(base.grid_ptr(), base.components());
  for (int c = 0; c < base.components(); ++c) {
    auto a = base.fourier(c);
    auto b = incr.fourier(c);
    auto o = out.edit_fourier(c);
    for (std::size_t m = 0; m < o.size(); ++m) o[m] = a[m] + scale * b[m];
  }
  return out;
}

Vec3 velocity_at(const SpectralField& u_hat, const Vec3& x) {
  const std::vector<double> v = evaluate_at(u_hat, x);
  return {v[0], v[1], v[2]};
}

Vec3 wrap(const Vec3& x, double box) {
  Vec3 out;
  for (std::size_t a = 0; a < 3; ++a) {
    double r = std::fmod(x[a], box);
    if (r < 0.0) r += box;
    if (r >= box) r = 0.0;
    out[a] = r;
  }
  return out;
}

// Uniform double in [0,1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
  double u1 = unit_uniform(rng);
  while (u1 <= 0.0) u1 = unit_uniform(rng);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SpectralField random_solenoidal(const GridPtr& grid, const PresetParams& p) {
  const Grid& g = *grid;
  if (!(p.cutoff >= 1.0)) throw ConfigError("random_solenoidal: cutoff must be >= 1");
  std::mt19937_64 rng(p.seed);
  SpectralField u(grid, 3);
  for (int c = 0; c < 3; ++c) {
    auto d = u.edit_physical(c);
    for (double& x : d) x = standard_normal(rng);
  }
  u.sync_fourier();
  for (int c = 0; c < 3; ++c) {
    auto m = u.edit_fourier(c);
    for_each_mode(g, [&](int i, int j, int kz, std::size_t idx) {
      const double k = std::sqrt(double(g.wavenumber(i)) * g.wavenumber(i) +
                                 double(g.wavenumber(j)) * g.wavenumber(j) + double(kz) * kz);
      // Shell energy E(k) ~ k^slope spread over ~k^2 modes.
      m[idx] = (k < 1.0 || k > p.cutoff) ? Complex{} : m[idx] * std::pow(k, 0.5 * p.slope - 1.0);
    });
  }
  apply_dealias(u);
  project_solenoidal(u);
  u.sync_physical();
  double mean_sq = 0.0;
  for (int c = 0; c < 3; ++c) mean_sq += grid_sum_squares(u, c);
  mean_sq /= static_cast<double>(g.point_count());
  if (!(mean_sq > 0.0)) throw ConfigError("random_solenoidal: no modes inside the cutoff");
  const double scale = p.amplitude / std::sqrt(mean_sq);
  for (int c = 0; c < 3; ++c)
    for (double& x : u.edit_physical(c)) x *= scale;
  return u;
}

double max_abs_of(std::span<const double> d) {
  double m = 0.0;
  for (double x : d) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"taylor_green", "abc", "random_solenoidal", "uniform", "shear", "zero"};
  return names;
}

bool is_known_preset(std::string_view name) {
  const auto& n = preset_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

FlowState::FlowState(GridPtr grid, double t) : grid_(std::move(grid)), t_(t), u_(grid_, 3) {}

void FlowState::set_velocity(SpectralField u) {
  if (u.components() != 3) throw ContractViolation("velocity must have 3 components");
  if (u.grid_ptr() != grid_) throw ContractViolation("velocity lives on a different grid");
  u.sync_fourier();
  apply_dealias(u);
  project_solenoidal(u);
  u.sync_physical();
  u_ = std::move(u);
  drop_caches();
}

void FlowState::drop_caches() {
  vorticity_.reset();
  strain_.reset();
  pressure_.reset();
  hessian_.reset();
}

const SpectralField& FlowState::vorticity() const {
  if (!vorticity_) {
    SpectralField w = curl(u_);
    w.sync_physical();
    vorticity_ = std::move(w);
  }
  return *vorticity_;
}

const SpectralField& FlowState::strain() const {
  if (!strain_) {
    const SpectralField grad = velocity_gradient(*this);
    SpectralField s(grid_, 6);
    for (int c = 0; c < 6; ++c) {
      auto a = grad.fourier(3 * kSymI[c] + kSymJ[c]);
      auto b = grad.fourier(3 * kSymJ[c] + kSymI[c]);
      auto o = s.edit_fourier(c);
      for (std::size_t m = 0; m < o.size(); ++m) o[m] = 0.5 * (a[m] + b[m]);
    }
    s.sync_physical();
    strain_ = std::move(s);
  }
  return *strain_;
}

const SpectralField& FlowState::pressure() const {
  if (!pressure_) {
    const SpectralField& w = vorticity();
    const SpectralField& s = strain();
    SpectralField rhs(grid_, 1);
    auto r = rhs.edit_physical(0);
    for (std::size_t p = 0; p < grid_->point_count(); ++p) {
      const Vec3 wv = vector_at(w, p);
      const Sym3 sv = tensor_at(s, p);
      r[p] = contract(sv, sv) - 0.5 * dot(wv, wv);
    }
    SpectralField p = solve_poisson(rhs);
    p.sync_physical();
    pressure_ = std::move(p);
  }
  return *pressure_;
}

const SpectralField& FlowState::hessian() const {
  if (!hessian_) {
    const SpectralField& p = pressure();
    SpectralField h(grid_, 6);
    for (int c = 0; c < 6; ++c) {
      const SpectralField d = spectral_second_derivative(p, kSymI[c] + 1, kSymJ[c] + 1);
      auto src = d.fourier(0);
      auto dst = h.edit_fourier(c);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    h.sync_physical();
    hessian_ = std::move(h);
  }
  return *hessian_;
}

FlowState init_flow(std::string_view preset, const GridPtr& grid, const PresetParams& params) {
  if (!is_known_preset(preset)) throw ConfigError("unknown preset '" + std::string(preset) + "'");
  const Grid& g = *grid;
  const double k = g.k_unit();
  const double a = params.amplitude;
  FlowState state(grid);
  if (preset == "random_solenoidal") {
    state.set_velocity(random_solenoidal(grid, params));
    return state;
  }
  SpectralField u(grid, 3);
  if (preset != "zero") {
    auto u0 = u.edit_physical(0), u1 = u.edit_physical(1), u2 = u.edit_physical(2);
    for_each_point(g, [&](const Vec3& x, std::size_t p) {
      const double X = k * x[0], Y = k * x[1], Z = k * x[2];
      if (preset == "taylor_green") {
        u0[p] = a * std::sin(X) * std::cos(Y) * std::cos(Z);
        u1[p] = -a * std::cos(X) * std::sin(Y) * std::cos(Z);
        u2[p] = 0.0;
      } else if (preset == "abc") {
        u0[p] = params.abc_a * std::sin(Z) + params.abc_c * std::cos(Y);
        u1[p] = params.abc_b * std::sin(X) + params.abc_a * std::cos(Z);
        u2[p] = params.abc_c * std::sin(Y) + params.abc_b * std::cos(X);
      } else if (preset == "uniform") {
        u0[p] = params.velocity[0];
        u1[p] = params.velocity[1];
        u2[p] = params.velocity[2];
      } else {  // shear
        u0[p] = a * std::sin(Y);
        u1[p] = 0.0;
        u2[p] = 0.0;
      }
    });
  }
  state.set_velocity(std::move(u));
  return state;
}

double courant_number(const FlowState& s, double dt) {
  return s.velocity().max_abs() * dt * s.grid().n() / s.grid().box_length();
}

double max_stable_dt(const FlowState& s, double cfl) {
  const double umax = s.velocity().max_abs();
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return cfl * s.grid().box_length() / (umax * s.grid().n());
}

void step(FlowState& s, double dt, std::span<Vec3> passengers) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("time step must be positive and finite");
  const double limit = max_stable_dt(s, kCflLimit);
  if (dt > limit) {
    std::ostringstream msg;
    msg << "dt=" << dt << " exceeds the CFL limit (Courant " << courant_number(s, dt) << " > " << kCflLimit
        << "); suggested dt=" << limit;
    throw CflViolation(msg.str(), limit);
  }

  const double box = s.grid().box_length();
  try {
    const SpectralField& u1 = s.velocity();
    const SpectralField k1 = nonlinear_term(u1);
    const SpectralField u2 = combine(u1, 0.5 * dt, k1);
    const SpectralField k2 = nonlinear_term(u2);
    const SpectralField u3 = combine(u1, 0.5 * dt, k2);
    const SpectralField k3 = nonlinear_term(u3);
    const SpectralField u4 = combine(u1, dt, k3);
    const SpectralField k4 = nonlinear_term(u4);

    for (Vec3& x : passengers) {
      const Vec3 v1 = velocity_at(u1, x);
      const Vec3 v2 = velocity_at(u2, x + (0.5 * dt) * v1);
      const Vec3 v3 = velocity_at(u3, x + (0.5 * dt) * v2);
      const Vec3 v4 = velocity_at(u4, x + dt * v3);
      const Vec3 next = x + (dt / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
      for (std::size_t a = 0; a < 3; ++a)
        if (!std::isfinite(next[a])) throw NumericalFault("non-finite probe position");
      x = wrap(next, box);
    }

    SpectralField next(s.grid_ptr(), 3);
    for (int c = 0; c < 3; ++c) {
      auto a = u1.fourier(c);
      auto b1 = k1.fourier(c), b2 = k2.fourier(c), b3 = k3.fourier(c), b4 = k4.fourier(c);
      auto o = next.edit_fourier(c);
      for (std::size_t m = 0; m < o.size(); ++m) o[m] = a[m] + (dt / 6.0) * (b1[m] + 2.0 * b2[m] + 2.0 * b3[m] + b4[m]);
    }
    s.set_velocity(std::move(next));
  } catch (const NumericalFault& e) {
    std::ostringstream msg;
    msg << e.what() << " during the step starting at t=" << s.time();
    throw NumericalFault(msg.str());
  }
  s.set_time(s.time() + dt);
}

PressureFields pressure_and_hessian(const FlowState& s) { return {s.pressure(), s.hessian()}; }
SpectralField strain_field(const FlowState& s) { return s.strain(); }
SpectralField vorticity_field(const FlowState& s) { return s.vorticity(); }

SpectralField velocity_gradient(const FlowState& s) {
  SpectralField grad(s.grid_ptr(), 9);
  for (int j = 0; j < 3; ++j) {
    const SpectralField d = spectral_derivative(s.velocity(), j + 1);
    for (int i = 0; i < 3; ++i) {
      auto src = d.fourier(i);
      auto dst = grad.edit_fourier(3 * i + j);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  grad.sync_physical();
  return grad;
}

double kinetic_energy(const FlowState& s) {
  double e = 0.0;
  for (int c = 0; c < 3; ++c) e += integrate_product(s.velocity(), c, s.velocity(), c);
  return 0.5 * e;
}

double helicity(const FlowState& s) {
  double h = 0.0;
  for (int c = 0; c < 3; ++c) h += integrate_product(s.velocity(), c, s.vorticity(), c);
  return h;
}

double max_divergence(const FlowState& s) {
  const SpectralField grad = velocity_gradient(s);
  auto g0 = grad.physical(0), g4 = grad.physical(4), g8 = grad.physical(8);
  double m = 0.0;
  for (std::size_t p = 0; p < g0.size(); ++p) m = std::max(m, std::abs(g0[p] + g4[p] + g8[p]));
  return m;
}

double max_velocity_gradient(const FlowState& s) {
  const SpectralField grad = velocity_gradient(s);
  double m = 0.0;
  for (int c = 0; c < 9; ++c) m = std::max(m, max_abs_of(grad.physical(c)));
  return m;
}

double max_vorticity(const FlowState& s) {
  const SpectralField& w = s.vorticity();
  double m = 0.0;
  for (std::size_t p = 0; p < s.grid().point_count(); ++p) m = std::max(m, norm(vector_at(w, p)));
  return m;
}

double enstrophy(const FlowState& s) {
  double e = 0.0;
  for (int c = 0; c < 3; ++c) e += integrate_product(s.vorticity(), c, s.vorticity(), c);
  return e;
}

Sym3 tensor_at(const SpectralField& t, std::size_t p) {
  Sym3 out;
  for (int c = 0; c < 6; ++c) out.c[c] = t.physical(c)[p];
  return out;
}

Vec3 vector_at(const SpectralField& v, std::size_t p) {
  return {v.physical(0)[p], v.physical(1)[p], v.physical(2)[p]};
}

TraceCheck trace_identity_check(const FlowState& s) {
  const SpectralField& w = s.vorticity();
  const SpectralField& st = s.strain();
  const SpectralField& h = s.hessian();
  TraceCheck out;
  for (std::size_t p = 0; p < s.grid().point_count(); ++p) {
    const Vec3 wv = vector_at(w, p);
    const Sym3 sv = tensor_at(st, p);
    const Sym3 hv = tensor_at(h, p);
    out.max_error = std::max(out.max_error, std::abs(hv.trace() - (0.5 * dot(wv, wv) - contract(sv, sv))));
    for (double c : hv.c) out.max_hessian = std::max(out.max_hessian, std::abs(c));
  }
  return out;
}

double taylor_green_pressure(const Vec3& x) {
  return (std::cos(2.0 * x[0]) + std::cos(2.0 * x[1])) * (std::cos(2.0 * x[2]) + 2.0) / 16.0;
}

}  // namespace eulerlab
