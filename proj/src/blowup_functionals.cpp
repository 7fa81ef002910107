#include "eulerlab/blowup_functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "eulerlab/eigenframe.hpp"
#include "eulerlab/errors.hpp"
#include "eulerlab/finite_difference.hpp"
#include "eulerlab/summation.hpp"
#include "eulerlab/text_output.hpp"

namespace eulerlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Quotient {
  double rayleigh = 0.0;
  double residual = 0.0;
};

Quotient quotient(const Sym3& m, const Vec3& w) {
  const Vec3 mw = m * w;
  Quotient q;
  q.rayleigh = dot(w, mw) / dot(w, w);
  const double mwn = norm(mw);
  q.residual = mwn == 0.0 ? 0.0 : norm(mw - q.rayleigh * w) / mwn;
  return q;
}

// Pointwise status of the lambda > 3 mu_m^2 condition.
struct DominancePoint {
  bool applicable = false;
  bool satisfied = false;
  double margin = 0.0;  // lambda - 3 mu_m^2
  double ratio = 0.0;   // margin / mu_m^2
};

DominancePoint dominance_point(const MaterialPoint& p, double eps_align) {
  DominancePoint out;
  if (!(norm(p.omega) > 0.0)) return out;
  const Quotient q = quotient(p.hessian, p.omega);
  if (q.residual > eps_align) return out;
  out.applicable = true;
  const double lambda = -q.rayleigh;
  const double mu_m = mu_max(decompose(p.strain));
  out.margin = lambda - 3.0 * mu_m * mu_m;
  out.satisfied = lambda > 0.0 && out.margin > 0.0;
  out.ratio = mu_m > 0.0 ? out.margin / (mu_m * mu_m) : (out.margin > 0.0 ? kInf : -kInf);
  return out;
}

struct DominanceStats {
  double fraction = 0.0;
  double margin_min = kNaN;
  double margin_sum = 0.0;
  double margin_weight = 0.0;
  double ratio_min = kInf;
};

DominanceStats dominance_stats(const MaterialSnapshot& snap, double eps_align) {
  DominanceStats s;
  CompensatedSum total, good;
  for (const MaterialPoint& p : snap.points) {
    total.add(p.weight);
    const DominancePoint tp = dominance_point(p, eps_align);
    if (!tp.applicable) continue;
    s.margin_min = std::isnan(s.margin_min) ? tp.margin : std::min(s.margin_min, tp.margin);
    s.margin_sum += p.weight * tp.margin;
    s.margin_weight += p.weight;
    s.ratio_min = std::min(s.ratio_min, tp.ratio);
    if (tp.satisfied) good.add(p.weight);
  }
  s.fraction = total.value() > 0.0 ? good.value() / total.value() : 0.0;
  return s;
}

std::vector<const MaterialSnapshot*> window(const std::vector<MaterialSnapshot>& snaps, double t0) {
  std::vector<const MaterialSnapshot*> out;
  const double tol = 1e-12 * std::max(1.0, std::abs(t0));
  for (const MaterialSnapshot& s : snaps)
    if (s.t >= t0 - tol) out.push_back(&s);
  if (out.empty()) throw ContractViolation("no snapshot at or after t0");
  return out;
}

void check_enstrophy(double varpi, double t) {
  if (!(varpi >= kEnstrophyFloor)) {
    std::ostringstream msg;
    msg << "enstrophy " << varpi << " at t=" << t
        << " is below the floor; the functionals require a non-vanishing enstrophy";
    throw HypothesisViolation(msg.str());
  }
}

}  // namespace

MaterialSnapshot whole_box_snapshot(const FlowState& state) {
  MaterialSnapshot snap;
  snap.t = state.time();
  const double w = state.grid().cell_volume();
  const SpectralField& om = state.vorticity();
  const SpectralField& st = state.strain();
  const SpectralField& he = state.hessian();
  snap.points.reserve(state.grid().point_count());
  for (std::size_t p = 0; p < state.grid().point_count(); ++p)
    snap.points.push_back({w, vector_at(om, p), tensor_at(st, p), tensor_at(he, p)});
  return snap;
}

MaterialSnapshot probe_volume_snapshot(const ProbeSet& probes, std::size_t index) {
  MaterialSnapshot snap;
  bool first = true;
  for (const ProbeTrajectory& traj : probes.trajectories) {
    if (index >= traj.samples.size()) throw ContractViolation("probe sample index out of range");
    const ProbeSample& s = traj.samples[index];
    if (first) snap.t = s.t;
    first = false;
    snap.points.push_back({probes.cell_volume, s.values.vorticity, s.values.strain, s.values.hessian});
  }
  return snap;
}

std::vector<MaterialSnapshot> probe_volume_series(const ProbeSet& probes) {
  std::vector<MaterialSnapshot> out;
  if (probes.trajectories.empty()) return out;
  for (std::size_t i = 0; i < probes.trajectories.front().samples.size(); ++i)
    out.push_back(probe_volume_snapshot(probes, i));
  return out;
}

RegionIntegrals region_integrals(const MaterialSnapshot& snap) {
  CompensatedSum e, s, sq, h;
  for (const MaterialPoint& p : snap.points) {
    const Vec3 sw = p.strain * p.omega;
    e.add(p.weight * dot(p.omega, p.omega));
    s.add(p.weight * dot(p.omega, sw));
    sq.add(p.weight * dot(sw, sw));
    h.add(p.weight * dot(p.omega, p.hessian * p.omega));
  }
  return {e.value(), s.value(), sq.value(), h.value()};
}

FunctionalSeries enstrophy_functionals(const std::vector<MaterialSnapshot>& snapshots, int exponent, Region region,
                                       double eps_align) {
  if (snapshots.size() < 3) throw ContractViolation("functional series needs at least 3 samples");
  if (exponent < 1) throw ConfigError("the enstrophy exponent n must be a positive integer");
  FunctionalSeries series;
  series.exponent = exponent;
  series.region = region;
  std::vector<double> t, phi1, v;
  for (const MaterialSnapshot& snap : snapshots) {
    const RegionIntegrals in = region_integrals(snap);
    const double varpi = in.enstrophy;
    check_enstrophy(varpi, snap.t);
    FunctionalSample s;
    s.t = snap.t;
    s.enstrophy = varpi;
    s.phi_n = 1.0 / (2.0 * std::pow(varpi, 1.0 / exponent));
    s.v = in.stretching / (varpi * varpi);
    s.dwdt_l2 = std::sqrt(in.stretching_sq);
    const double second = -in.hessian;  // int w . D^2w/Dt^2
    s.vprime = ((in.stretching_sq + second) * varpi - 4.0 * in.stretching * in.stretching) / (varpi * varpi * varpi);
    s.cs_lhs = s.v * std::pow(varpi, 1.5);
    s.cs_rhs = s.dwdt_l2;
    s.second_lhs = s.vprime * varpi * varpi;
    s.second_rhs = second - 3.0 * in.stretching_sq;
    const DominanceStats st = dominance_stats(snap, eps_align);
    s.dominance_fraction = st.fraction;
    s.dominance_margin_min = st.margin_min;
    t.push_back(s.t);
    phi1.push_back(1.0 / (2.0 * varpi));
    v.push_back(s.v);
    series.samples.push_back(s);
  }
  const std::vector<double> dphi = time_derivative(t, phi1);
  const std::vector<double> dv = time_derivative(t, v);
  for (std::size_t i = 0; i < series.samples.size(); ++i) {
    series.samples[i].v_from_phi = -dphi[i];
    series.samples[i].vprime_fd = dv[i];
  }
  return series;
}

std::vector<InequalityRow> check_inequalities(const FunctionalSeries& series) {
  std::vector<InequalityRow> rows;
  for (const FunctionalSample& s : series.samples) {
    InequalityRow r;
    r.t = s.t;
    r.cs_margin = s.cs_rhs - s.cs_lhs;
    if (r.cs_margin < -kCauchySchwarzSlack * s.cs_rhs) {
      std::ostringstream msg;
      msg << "Cauchy-Schwarz bound violated at t=" << s.t << ": " << s.cs_lhs << " > " << s.cs_rhs;
      throw QuadratureBug(msg.str());
    }
    const double w2 = s.enstrophy * s.enstrophy;
    const double scale = std::abs(s.second_lhs) + std::abs(s.second_rhs);
    r.second_margin = s.second_lhs - s.second_rhs;
    r.second_margin_fd = s.vprime_fd * w2 - s.second_rhs;
    r.second_holds = r.second_margin >= -kCauchySchwarzSlack * scale;
    r.second_holds_fd = r.second_margin_fd >= -kCauchySchwarzSlack * scale;
    rows.push_back(r);
  }
  return rows;
}

BoundCurves bound_curves(double t0, double c, double varpi0, double v0) {
  if (!(c > 0.0) || !(varpi0 > 0.0) || !(v0 > 0.0))
    throw ContractViolation("bound curves need c, varpi0 and v0 positive");
  return {t0 + 1.0 / (c * varpi0 * v0), 1.0 / (c * varpi0), std::sqrt(varpi0) / c};
}

MonitorVerdict hessian_dominance_monitor(const std::vector<MaterialSnapshot>& snapshots, double t0, double eps_align) {
  const auto win = window(snapshots, t0);
  MonitorVerdict out;
  out.condition = "theorem21";
  out.t0 = win.front()->t;
  out.t_end = win.back()->t;
  out.c0 = kNaN;
  out.T0 = out.A = out.B = out.c = kNaN;
  const RegionIntegrals in0 = region_integrals(*win.front());
  check_enstrophy(in0.enstrophy, out.t0);
  out.varpi0 = in0.enstrophy;
  out.v0 = in0.stretching / (in0.enstrophy * in0.enstrophy);

  out.satisfied_fraction_min = 1.0;
  double ratio_min = kInf, msum = 0.0, mweight = 0.0;
  out.margin_min = kNaN;
  for (const MaterialSnapshot* s : win) {
    const DominanceStats st = dominance_stats(*s, eps_align);
    out.times.push_back(s->t);
    out.fractions.push_back(st.fraction);
    out.satisfied_fraction_min = std::min(out.satisfied_fraction_min, st.fraction);
    ratio_min = std::min(ratio_min, st.ratio_min);
    msum += st.margin_sum;
    mweight += st.margin_weight;
    if (!std::isnan(st.margin_min))
      out.margin_min = std::isnan(out.margin_min) ? st.margin_min : std::min(out.margin_min, st.margin_min);
  }
  out.margin_mean = mweight > 0.0 ? msum / mweight : kNaN;
  out.relaxed_satisfied = out.satisfied_fraction_min >= 0.99;

  if (out.satisfied_fraction_min < 1.0) {
    out.verdict = "condition not met";
    return out;
  }
  out.c = std::min(1.0, ratio_min);
  if (!(out.v0 > 0.0)) {
    out.verdict = "hypotheses not met at t0: v0 must be positive";
    return out;
  }
  const BoundCurves bc = bound_curves(out.t0, out.c, out.varpi0, out.v0);
  out.T0 = bc.T0;
  out.A = bc.A;
  out.B = bc.B;
  out.applicable = true;
  out.verdict = "condition holds; blow-up bound predicted";
  return out;
}

MonitorVerdict proportional_hessian_monitor(const std::vector<MaterialSnapshot>& snapshots, double t0, double c0,
                                 double eps_align) {
  if (!(c0 > 3.0)) {
    std::ostringstream msg;
    msg << "theorem22 monitor requires c0 > 3 (got c0=" << c0 << ")";
    throw ConfigError(msg.str());
  }
  const auto win = window(snapshots, t0);
  MonitorVerdict out;
  out.condition = "theorem22";
  out.t0 = win.front()->t;
  out.t_end = win.back()->t;
  out.c0 = c0;
  out.c = c0 - 3.0;
  out.T0 = out.A = out.B = kNaN;
  const RegionIntegrals in0 = region_integrals(*win.front());
  check_enstrophy(in0.enstrophy, out.t0);
  out.varpi0 = in0.enstrophy;
  out.v0 = in0.stretching / (in0.enstrophy * in0.enstrophy);

  out.satisfied_fraction_min = 1.0;
  out.margin_min = kNaN;
  double msum = 0.0, mweight = 0.0;
  for (const MaterialSnapshot* s : win) {
    CompensatedSum total, good;
    for (const MaterialPoint& p : s->points) {
      total.add(p.weight);
      if (!(norm(p.omega) > 0.0)) continue;
      const Quotient qs = quotient(p.strain, p.omega);
      const Quotient qp = quotient(p.hessian, p.omega);
      if (qs.residual > eps_align || qp.residual > eps_align) continue;
      const double mu = qs.rayleigh, lambda = -qp.rayleigh;
      if (!(mu > 0.0) || !(lambda > 0.0)) continue;
      const double target = c0 * mu * mu;
      const double deviation = std::abs(lambda - target) / target;
      out.max_relative_deviation = std::max(out.max_relative_deviation, deviation);
      const double margin = lambda - target;
      out.margin_min = std::isnan(out.margin_min) ? margin : std::min(out.margin_min, margin);
      msum += p.weight * margin;
      mweight += p.weight;
      if (deviation <= eps_align) good.add(p.weight);
    }
    const double fraction = total.value() > 0.0 ? good.value() / total.value() : 0.0;
    out.times.push_back(s->t);
    out.fractions.push_back(fraction);
    out.satisfied_fraction_min = std::min(out.satisfied_fraction_min, fraction);
  }
  out.margin_mean = mweight > 0.0 ? msum / mweight : kNaN;
  out.relaxed_satisfied = out.satisfied_fraction_min >= 0.99;
  if (out.satisfied_fraction_min < 1.0) {
    out.verdict = "condition not met";
    return out;
  }
  if (!(out.v0 > 0.0)) {
    out.verdict = "hypotheses not met at t0: v0 must be positive";
    return out;
  }
  const BoundCurves bc = bound_curves(out.t0, out.c, out.varpi0, out.v0);
  out.T0 = bc.T0;
  out.A = bc.A;
  out.B = bc.B;
  out.applicable = true;
  out.verdict = "condition holds; blow-up bound predicted";
  return out;
}

void write_functional_csv(std::ostream& out, const FunctionalSeries& series) {
  CsvWriter csv(out, {"t", "enstrophy", "phi_n", "v_eq23", "v_eq22", "vprime_fd", "vprime_eq24", "dwdt_l2", "eq25_lhs",
                      "eq25_rhs", "eq26_lhs", "eq26_rhs", "thm21_fraction", "thm21_margin_min"});
  for (const FunctionalSample& s : series.samples)
    csv.row({s.t, s.enstrophy, s.phi_n, s.v, s.v_from_phi, s.vprime_fd, s.vprime, s.dwdt_l2, s.cs_lhs, s.cs_rhs,
             s.second_lhs, s.second_rhs, s.dominance_fraction, s.dominance_margin_min});
}

std::string monitor_json(const MonitorVerdict& v) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  j["condition"] = v.condition;
  j["t0"] = num(v.t0);
  j["c0"] = num(v.c0);
  j["c"] = num(v.c);
  j["varpi0"] = num(v.varpi0);
  j["v0"] = num(v.v0);
  j["T0"] = num(v.T0);
  j["A"] = num(v.A);
  j["B"] = num(v.B);
  j["applicable"] = v.applicable;
  j["satisfied_fraction_min"] = num(v.satisfied_fraction_min);
  j["verdict"] = v.verdict;
  j["t_end"] = num(v.t_end);
  j["relaxed_satisfied_0_99"] = v.relaxed_satisfied;
  j["margin_min"] = num(v.margin_min);
  j["margin_mean"] = num(v.margin_mean);
  j["max_relative_deviation"] = num(v.max_relative_deviation);
  return j.dump(2);
}

}  // namespace eulerlab
