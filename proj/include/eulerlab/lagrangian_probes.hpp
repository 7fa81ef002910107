#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "eulerlab/eigenframe.hpp"
#include "eulerlab/euler_dynamics.hpp"
#include "eulerlab/linalg.hpp"

namespace eulerlab {

enum class Interpolation {
  /// Exact trigonometric interpolant of the resolved modes.
  spectral,
  /// Zero-pad to a 2x refined grid, then trilinear interpolation.
  padded_trilinear,
};

/// Field values needed by the probe diagnostics at one point.
struct PointValues {
  Vec3 velocity;
  Vec3 vorticity;
  Sym3 strain;
  Sym3 hessian;
};

/// Interpolates velocity, vorticity, strain and pressure Hessian of one state.
class FieldSampler {
 public:
  FieldSampler(const FlowState& state, Interpolation mode);
  PointValues at(const Vec3& x) const;

 private:
  Interpolation mode_;
  GridPtr grid_;
  SpectralField fields_;  // 18 components: u(3), w(3), S(6), P(6)
};

struct ProbeSample {
  double t = 0.0;
  Vec3 position;
  PointValues values;
  Vec3 stretching;         // S w
  Vec3 hessian_action;     // P w
  Vec3 invariant;          // w x S w
  Vec3 hessian_torque;     // w x P w
  EigenFrame strain_frame;
  EigenFrame hessian_frame;
  /// Empty when the vorticity vanishes at the probe.
  std::optional<AlignmentMetrics> strain_alignment;
  std::optional<AlignmentMetrics> hessian_alignment;
};

struct ProbeTrajectory {
  int id = 0;
  std::vector<ProbeSample> samples;
};

/// Builds a sample from point values (also used for synthetic trajectories).
ProbeSample make_sample(double t, const Vec3& position, const PointValues& values);

struct ProbeSpec {
  enum class Kind { uniform, random, explicit_positions };
  Kind kind = Kind::uniform;
  int per_axis = 2;
  int count = 0;
  std::uint64_t seed = 0;
  std::vector<Vec3> positions;

  static ProbeSpec uniform(int per_axis);
  static ProbeSpec random(int count, std::uint64_t seed);
  static ProbeSpec at(std::vector<Vec3> positions);
};

struct ProbeSet {
  std::vector<Vec3> positions;
  std::vector<ProbeTrajectory> trajectories;
  /// Volume represented by each probe (box volume / probe count).
  double cell_volume = 0.0;
  Interpolation interpolation = Interpolation::spectral;
};

/// uniform(m): m^3 probes at cell centres; random(count, seed): uniform in the box;
/// explicit positions are wrapped into [0, L)^3. An empty set is a ConfigError.
ProbeSet seed_probes(const FlowState& state, const ProbeSpec& spec,
                     Interpolation interpolation = Interpolation::spectral);

/// Appends one sample per probe at the state's current time.
void record_sample(ProbeSet& probes, const FlowState& state);

/// Steps the flow by dt, advancing probe positions with the same RK4 stages.
void advance(ProbeSet& probes, FlowState& state, double dt);

/// Runs `steps` solver steps of size dt and records a sample every `sample_every`
/// steps (plus the initial state when the set has no samples yet).
void advect(ProbeSet& probes, FlowState& state, double dt, int steps, int sample_every = 1);

/// Relative residuals of the Lagrangian identities along one trajectory.
struct IdentityReport {
  /// ||dw/dt - S w|| / ||S w||
  double vorticity = 0.0;
  /// ||d(S w)/dt + P w|| / ||P w||
  double second_derivative = 0.0;
  /// ||d(w x S w)/dt + w x P w|| / ||w x P w||
  double torque = 0.0;
  /// Residual numerators, root-sum-square over the interior samples.
  double vorticity_numerator = 0.0;
  double second_derivative_numerator = 0.0;
  double torque_numerator = 0.0;
  int fd_order = 2;
  int samples_used = 0;
};

/// Centred differences in time over the interior samples; ratios are
/// root-sum-square numerator over root-sum-square denominator (0 when both vanish).
/// Fewer than 5 samples is a ContractViolation.
IdentityReport material_derivative_checks(const ProbeTrajectory& traj);

/// Per-sample relative residuals (NaN where the denominator vanishes).
struct SampleResiduals {
  std::vector<double> vorticity, second_derivative, torque;
};
SampleResiduals sample_residuals(const ProbeTrajectory& traj);

enum class FramePolicy { principal_axes, fixed_cartesian };

struct InvariantComponents {
  Vec3 c;  // components of w x S w
  std::array<bool, 3> indeterminate{false, false, false};
  /// Strain eigen-index carrying labels a, b, c (principal axes only).
  std::array<int, 3> labels{0, 1, 2};
};

/**
 * Components of w x S w per sample.
 *
 * principal_axes: in the strain eigenbasis with labels a, b, c kept coherent
 * over time by matching each axis to the previous sample's axes; then
 *   c1 = w_b w_c (mu_c - mu_b), c2 = w_a w_c (mu_a - mu_c), c3 = w_a w_b (mu_b - mu_a).
 * When two eigenvalues coincide their axes are arbitrary: the component built
 * from their difference is exactly 0 and the other two are flagged indeterminate.
 */
std::vector<InvariantComponents> invariant_components(const ProbeTrajectory& traj, FramePolicy policy);

/// On samples where the P-w alignment residual is at most eps_align, checks
/// ||d(w x S w)/dt|| <= |w| ||P w|| residual + truncation estimate.
struct InvariantBoundReport {
  int checked = 0;
  int violations = 0;
  double worst_ratio = 0.0;  // measured / bound
};
InvariantBoundReport invariant_bound_check(const ProbeTrajectory& traj, double eps_align);

/// Volume of the convex hull of a small generic point cloud (brute force, O(n^4)).
/// Points are unwrapped around the first one using the minimum-image rule when box > 0.
double convex_hull_volume(const std::vector<Vec3>& points, double box = 0.0);

/// CSV with columns id,t,x1,x2,x3,w1,w2,w3,mu1,mu2,mu3,lamneg,lamzeta,lameta,
/// cos_s,cos_p,c1,c2,c3,res_eq12,res_eq14,res_ggk.
void write_trajectory_csv(std::ostream& out, const std::vector<ProbeTrajectory>& trajectories);

}  // namespace eulerlab
