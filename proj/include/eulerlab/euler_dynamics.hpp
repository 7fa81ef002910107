#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eulerlab/linalg.hpp"
#include "eulerlab/spectral_grid.hpp"

namespace eulerlab {

/// Parameters shared by the initial-condition presets. Each preset reads only
/// the fields it needs.
struct PresetParams {
  double amplitude = 1.0;
  // abc
  double abc_a = 1.0, abc_b = 1.0, abc_c = 1.0;
  // random_solenoidal: energy spectrum ~ |k|^slope on 1 <= |k| <= cutoff
  std::uint64_t seed = 1;
  double slope = -5.0 / 3.0;
  double cutoff = 4.0;
  // uniform
  Vec3 velocity{1.0, 0.0, 0.0};
};

/// Known preset names: taylor_green, abc, random_solenoidal, uniform, shear, zero.
const std::vector<std::string>& preset_names();
bool is_known_preset(std::string_view name);

/**
 * Velocity field plus lazily computed derived fields.
 *
 * The velocity is kept in Fourier space, dealiased and divergence-free.
 * Vorticity, strain (6 components, order 11,22,33,12,13,23), pressure and
 * pressure Hessian (same 6-component order) are cached until the velocity changes.
 *
 * Pressure convention: the rotational-form momentum equation
 *   du/dt = u x w - grad(p + |u|^2/2)
 * with p solving -Laplacian p = S:S - |w|^2/2, mean zero.
 */
class FlowState {
 public:
  explicit FlowState(GridPtr grid, double t = 0.0);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  double time() const { return t_; }
  void set_time(double t) { t_ = t; }

  const SpectralField& velocity() const { return u_; }
  /// Replaces the velocity; it is projected and dealiased, caches are dropped.
  void set_velocity(SpectralField u);

  const SpectralField& vorticity() const;
  const SpectralField& strain() const;
  const SpectralField& pressure() const;
  const SpectralField& hessian() const;

 private:
  void drop_caches();
  GridPtr grid_;
  double t_;
  SpectralField u_;
  mutable std::optional<SpectralField> vorticity_, strain_, pressure_, hessian_;
};

/// Builds a preset flow. Unknown names raise ConfigError.
FlowState init_flow(std::string_view preset, const GridPtr& grid, const PresetParams& params = {});

/// Courant number max|u| * dt * n / box_length.
double courant_number(const FlowState& s, double dt);
/// Largest dt satisfying the CFL limit (infinity for a fluid at rest).
double max_stable_dt(const FlowState& s, double cfl = 0.5);

inline constexpr double kCflLimit = 0.5;

/**
 * One classical RK4 step of the projected, dealiased Euler equations.
 *
 * Passengers are Lagrangian positions advanced with the same four stages,
 * using the spectral interpolant of each stage velocity; they are wrapped
 * back into the box afterwards.
 *
 * Throws CflViolation (carrying a suggested dt) when dt exceeds the CFL
 * limit, ContractViolation for dt <= 0, and NumericalFault stamped with the
 * time when a stage produces non-finite data.
 */
void step(FlowState& s, double dt, std::span<Vec3> passengers = {});

struct PressureFields {
  SpectralField pressure;
  SpectralField hessian;
};
PressureFields pressure_and_hessian(const FlowState& s);
SpectralField strain_field(const FlowState& s);
SpectralField vorticity_field(const FlowState& s);

/// Velocity gradient du_i/dx_j as a 9-component field, index 3*i + j.
SpectralField velocity_gradient(const FlowState& s);

/// Kinetic energy 1/2 * integral |u|^2.
double kinetic_energy(const FlowState& s);
/// Helicity integral u . w.
double helicity(const FlowState& s);
/// max |div u| over the grid.
double max_divergence(const FlowState& s);
/// max |du_i/dx_j| over the grid and all components.
double max_velocity_gradient(const FlowState& s);
/// Grid maximum of |w|.
double max_vorticity(const FlowState& s);
/// Whole-box enstrophy integral |w|^2.
double enstrophy(const FlowState& s);

/// Point values of a 6-component symmetric tensor field or a vector field at grid index p.
Sym3 tensor_at(const SpectralField& t, std::size_t p);
Vec3 vector_at(const SpectralField& v, std::size_t p);

/// max over grid points of |tr(P) - (|w|^2/2 - S:S)|, and max |P| for scaling.
struct TraceCheck {
  double max_error = 0.0;
  double max_hessian = 0.0;
};
TraceCheck trace_identity_check(const FlowState& s);

/// Closed-form Taylor-Green pressure at t = 0 for unit amplitude:
/// p = (cos 2x + cos 2y)(cos 2z + 2) / 16.
double taylor_green_pressure(const Vec3& x);

}  // namespace eulerlab
