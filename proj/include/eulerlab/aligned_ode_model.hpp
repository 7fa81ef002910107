#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eulerlab/blowup_functionals.hpp"
#include "eulerlab/lagrangian_probes.hpp"
#include "eulerlab/linalg.hpp"

namespace eulerlab {

inline constexpr double kBlowupThreshold = 1e6;
inline constexpr double kBlowupGuard = 1e-9;

enum class ElementStatus { regular, blown_up };

/// A fluid element whose vorticity stays aligned with a strain eigenvector
/// of rate mu and a Hessian eigenvector of rate -c0 mu^2, so that
/// mu' = (c0 - 1) mu^2 and |w|' = mu |w|.
struct FluidElement {
  int id = 0;
  Vec3 position;          // initial label
  double mu0 = 0.0;
  double omega0 = 1.0;    // initial vorticity magnitude
  Vec3 direction{0, 0, 1};
  double weight = 1.0;    // material volume carried by the element
  double c0 = 4.0;
  double t0 = 0.0;
  double t_star = 0.0;    // closed-form blow-up time, infinite when mu never diverges

  double t = 0.0;
  double mu = 0.0;
  double log_omega = 0.0;
  ElementStatus status = ElementStatus::regular;
  double blowup_time = 0.0;  // recorded when status becomes blown_up

  /// Throws HypothesisViolation unless mu0 > 0 and omega0 > 0.
  static FluidElement make(int id, double mu0, double c0, double t0 = 0.0, double omega0 = 1.0,
                           Vec3 position = {}, double weight = 1.0);

  double omega() const;
};

/// t0 + 1/((c0 - 1) mu0), or +infinity for c0 <= 1.
double closed_form_blowup_time(double mu0, double c0, double t0 = 0.0);
/// Exact mu(t) and |w|(t) along the element.
double closed_form_mu(const FluidElement& e, double t);
double closed_form_omega(const FluidElement& e, double t);

/// One RK4 step of (mu, log|w|). Refuses (ContractViolation naming T*) when
/// t + dt reaches T* - guard; declares blow-up once mu exceeds 1/guard.
FluidElement element_ode_step(const FluidElement& e, double dt, double guard = kBlowupGuard);

/// Fixed-step RK4 without the guard until mu first exceeds `threshold`.
/// The crossing time is located inside the final step by linear interpolation of 1/mu.
/// Returns nullopt if no crossing happens before t_max.
std::optional<double> numeric_blowup_time(double mu0, double c0, double dt, double t0 = 0.0,
                                          double threshold = kBlowupThreshold, double t_max = 1e6);

struct ElementVerdict {
  int id = 0;
  double mu0 = 0.0;
  double t_star = 0.0;
  bool passes_filter = false;
  double blowup_time_numeric = 0.0;  // NaN when not computed
};

struct BlowupReport {
  double c0 = 0.0;
  double t0 = 0.0;
  double mu1_sup = 0.0;
  double T1 = 0.0;
  double varpi0 = 0.0;
  double v0 = 0.0;
  double mu_beta = 0.0;          // c varpi0 v0 / (c0 - 3)
  int beta_nearest_id = 0;       // element whose mu0 is closest to mu_beta
  double T0 = 0.0;
  double filter_threshold = 0.0;
  int singular_id = 0;           // element attaining mu1_sup
  std::vector<ElementVerdict> elements;
};

struct EnsembleOptions {
  bool numeric = true;           // also integrate each element to its threshold crossing
  double dt = 1e-5;
  double threshold = kBlowupThreshold;
};

/// Requires c0 > 3 (ConfigError) and every mu0 > 0 (HypothesisViolation).
/// varpi0 and v0 are the ensemble integrals at t0, which fix mu_beta.
BlowupReport ensemble_predict(const std::vector<FluidElement>& elements, double c0, double t0,
                              const EnsembleOptions& options = {});

/// Element-by-element filter verdict: mu0 >= threshold.
bool passes_filter(double mu0, double threshold);

std::string blowup_report_json(const BlowupReport& report);

using FlowMap = std::function<Vec3(const Vec3& label, double t_from, double t_to)>;
FlowMap identity_flow_map();
FlowMap translation_flow_map(const Vec3& velocity);

struct SingularPoint {
  int id = 0;
  Vec3 position;
  double T1 = 0.0;
};

/// Position of the unique fastest element at its blow-up time. Ties in the
/// supremum of mu0 raise an AmbiguityError.
SingularPoint singular_point(const std::vector<FluidElement>& elements, const FlowMap& flow = identity_flow_map());

/// Region snapshot of an aligned ensemble at time t, using the closed forms.
/// S has eigenvalues (mu, -mu/2, -mu/2) and P = -c0 mu^2 on the vorticity
/// axis, its transverse part fixed by tr P = |w|^2/2 - S:S.
MaterialSnapshot aligned_snapshot(const std::vector<FluidElement>& elements, double t);
std::vector<MaterialSnapshot> aligned_snapshots(const std::vector<FluidElement>& elements,
                                                const std::vector<double>& times);

/// Ensemble file: {"c0", "t0", "dt", "threshold", "elements": [{"mu0", "position", "omega0", "weight"}]}.
/// omega0 may be a magnitude or a 3-vector.
struct EnsembleSpec {
  double c0 = 4.0;
  double t0 = 0.0;
  EnsembleOptions options;
  std::vector<FluidElement> elements;
};
EnsembleSpec parse_ensemble(const std::string& json_text);
EnsembleSpec load_ensemble(const std::string& path);

struct TubeParams {
  double mu_a = 1.0;
  double mu_b = -0.5;
  double mu_c = -0.5;
  Vec3 omega{1.0, 1.0, 1.0};
  double t_end = 1.0;
  double dt = 1e-3;
  double forcing = 0.0;  // nonzero breaks the Hessian alignment
};

struct TubeSample {
  double t = 0.0;
  Vec3 omega;
  Vec3 mu;
  double lambda = 0.0;
  Vec3 invariant;               // w x S w in the principal frame
  double omega_a_reconstructed = 0.0;
};

struct TubeReport {
  TubeParams params;
  std::vector<TubeSample> samples;
  Vec3 invariant0;
  Vec3 max_drift;               // max_t |c_k(t) - c_k(t0)|
  Vec3 relative_drift;          // max_drift / |c_k(t0)|, absolute where c_k(t0) = 0
  double reconstruction_residual = 0.0;
  bool omega_a_monotone = false;
};

/// Principal-frame tube dynamics: w_i' = mu_i w_i, mu_i' = lambda - mu_i^2 - f_i/w_i,
/// with lambda keeping the strain trace-free and f = forcing * (w x e_a).
/// Requires mu_b = mu_c < 0 < mu_a, zero trace and nonzero vorticity components (ConfigError).
TubeReport vortex_tube_scenario(const TubeParams& params);

/// The tube run as a probe trajectory (fixed principal axes, P = -lambda I plus the forcing).
ProbeTrajectory tube_trajectory(const TubeReport& report);

void write_tube_csv(std::ostream& out, const TubeReport& report);
std::string tube_report_json(const TubeReport& report);

}  // namespace eulerlab
