#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "eulerlab/euler_dynamics.hpp"
#include "eulerlab/lagrangian_probes.hpp"
#include "eulerlab/linalg.hpp"

namespace eulerlab {

/// One quadrature point of the material region: its volume weight and the
/// local vorticity, strain and pressure Hessian. Along the flow,
/// Dw/Dt = S w and D^2w/Dt^2 = -P w.
struct MaterialPoint {
  double weight = 0.0;
  Vec3 omega;
  Sym3 strain;
  Sym3 hessian;
};

struct MaterialSnapshot {
  double t = 0.0;
  std::vector<MaterialPoint> points;
};

enum class Region { whole_box, probe_volume };

/// Every grid point weighted by the cell volume.
MaterialSnapshot whole_box_snapshot(const FlowState& state);
/// Sample `index` of every probe, weighted by the probe set's cell volume.
MaterialSnapshot probe_volume_snapshot(const ProbeSet& probes, std::size_t index);
/// One snapshot per recorded probe sample.
std::vector<MaterialSnapshot> probe_volume_series(const ProbeSet& probes);

/// Integrals over a snapshot that every functional is built from.
struct RegionIntegrals {
  double enstrophy = 0.0;     // int |w|^2
  double stretching = 0.0;    // int w . S w
  double stretching_sq = 0.0; // int |S w|^2
  double hessian = 0.0;       // int w . P w
};
RegionIntegrals region_integrals(const MaterialSnapshot& snap);

/// Enstrophy below this aborts the series with a HypothesisViolation.
inline constexpr double kEnstrophyFloor = 1e-14;

struct FunctionalSample {
  double t = 0.0;
  double enstrophy = 0.0;
  double phi_n = 0.0;        // 1 / (2 enstrophy^(1/n))
  double v = 0.0;            // (1/enstrophy^2) int w . Dw/Dt
  double v_from_phi = 0.0;   // -d/dt [1/(2 enstrophy)] by finite differences
  double vprime_fd = 0.0;    // finite-difference derivative of v
  double vprime = 0.0;       // closed expression with D^2w/Dt^2 = -P w
  double dwdt_l2 = 0.0;      // ||Dw/Dt||
  double cs_lhs = 0.0;       // v enstrophy^(3/2)
  double cs_rhs = 0.0;       // ||Dw/Dt||
  double second_lhs = 0.0;   // vprime enstrophy^2
  double second_rhs = 0.0;   // int w . D^2w/Dt^2 - 3 int |Dw/Dt|^2
  double dominance_fraction = 0.0;
  double dominance_margin_min = 0.0;
};

struct FunctionalSeries {
  int exponent = 1;
  Region region = Region::whole_box;
  std::vector<FunctionalSample> samples;
};

/// Needs at least 3 snapshots with increasing times. eps_align gates the
/// pointwise lambda > 3 mu_m^2 condition reported per sample.
FunctionalSeries enstrophy_functionals(const std::vector<MaterialSnapshot>& snapshots, int exponent = 1,
                                       Region region = Region::whole_box, double eps_align = 1e-3);

/// Per-sample margins of the Cauchy-Schwarz bound and the lower bound on v'.
struct InequalityRow {
  double t = 0.0;
  double cs_margin = 0.0;          // cs_rhs - cs_lhs, never negative on valid data
  double second_margin = 0.0;      // second_lhs - second_rhs using the closed v'
  double second_margin_fd = 0.0;   // same with the finite-difference v'
  bool second_holds = false;
  bool second_holds_fd = false;
};

/// Throws QuadratureBug if the Cauchy-Schwarz bound fails beyond roundoff.
std::vector<InequalityRow> check_inequalities(const FunctionalSeries& series);

/// Roundoff allowance for the Cauchy-Schwarz comparison, relative to its right side.
inline constexpr double kCauchySchwarzSlack = 64 * 2.220446049250313e-16;

struct MonitorVerdict {
  std::string condition;  // "theorem21" or "theorem22"
  std::string verdict;
  double t0 = 0.0;
  double t_end = 0.0;
  double c0 = 0.0;        // NaN for theorem21
  double c = 0.0;
  double varpi0 = 0.0;
  double v0 = 0.0;
  double T0 = 0.0;        // NaN when no prediction is made
  double A = 0.0;
  double B = 0.0;
  bool applicable = false;
  double satisfied_fraction_min = 0.0;
  bool relaxed_satisfied = false;  // fraction >= 0.99 on every window sample (diagnostic only)
  double margin_min = 0.0;
  double margin_mean = 0.0;
  double max_relative_deviation = 0.0;  // theorem22: max |lambda - c0 mu^2| / (c0 mu^2)
  std::vector<double> fractions;
  std::vector<double> times;
};

/// Blow-up time bound and lower-bound curve constants:
/// T0 = t0 + 1/(c varpi0 v0), A = 1/(c varpi0), B = sqrt(varpi0)/c.
struct BoundCurves {
  double T0, A, B;
};
BoundCurves bound_curves(double t0, double c, double varpi0, double v0);

/// lambda = -(w . P w)/|w|^2 wherever the P-w alignment residual is at most eps_align;
/// the pointwise condition is lambda > 3 mu_m^2.
MonitorVerdict hessian_dominance_monitor(const std::vector<MaterialSnapshot>& snapshots, double t0, double eps_align = 1e-3);

/// Requires both alignments within eps_align and lambda = c0 mu^2 to relative eps_align.
/// c0 <= 3 is a ConfigError.
MonitorVerdict proportional_hessian_monitor(const std::vector<MaterialSnapshot>& snapshots, double t0, double c0,
                                 double eps_align = 1e-3);

/// CSV columns t,enstrophy,phi_n,v_eq23,v_eq22,vprime_fd,vprime_eq24,dwdt_l2,
/// eq25_lhs,eq25_rhs,eq26_lhs,eq26_rhs,thm21_fraction,thm21_margin_min.
void write_functional_csv(std::ostream& out, const FunctionalSeries& series);

/// JSON object with keys condition,t0,c0,c,varpi0,v0,T0,A,B,applicable,satisfied_fraction_min
/// (plus verdict and diagnostics).
std::string monitor_json(const MonitorVerdict& verdict);

}  // namespace eulerlab
