#include "eulerlab/aligned_ode_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "eulerlab/errors.hpp"
#include "eulerlab/text_output.hpp"

namespace eulerlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

using ordered_json = nlohmann::ordered_json;

ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }
ordered_json vec(const Vec3& x) { return ordered_json::array({num(x[0]), num(x[1]), num(x[2])}); }

std::string describe(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

// Bracket the first threshold crossing of mu' = a mu^2 with fixed-step RK4.
std::optional<double> rk4_crossing(double mu0, double a, double dt, double t0, double threshold, double t_max) {
  double mu = mu0;
  const double target = 1.0 / threshold;
  for (long long i = 0;; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    if (t >= t_max) return std::nullopt;
    const double k1 = a * mu * mu;
    const double m2 = mu + 0.5 * dt * k1;
    const double k2 = a * m2 * m2;
    const double m3 = mu + 0.5 * dt * k2;
    const double k3 = a * m3 * m3;
    const double m4 = mu + dt * k3;
    const double k4 = a * m4 * m4;
    const double next = mu + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(next <= threshold)) {
      const double inv0 = 1.0 / mu;
      const double inv1 = std::isfinite(next) ? 1.0 / next : 0.0;
      return t + dt * (inv0 - target) / (inv0 - inv1);
    }
    mu = next;
  }
}

Vec3 unit(const Vec3& d) {
  const double n = norm(d);
  if (!(n > 0.0)) throw ConfigError("element vorticity direction must be nonzero");
  return (1.0 / n) * d;
}

}  // namespace

FluidElement FluidElement::make(int id, double mu0, double c0, double t0, double omega0, Vec3 position,
                                double weight) {
  if (!(mu0 > 0.0)) throw HypothesisViolation("element " + std::to_string(id) + ": mu0 must be positive (got " +
                                              describe(mu0) + ")");
  if (!(omega0 > 0.0)) throw HypothesisViolation("element " + std::to_string(id) + ": |w0| must be positive");
  if (!(weight > 0.0)) throw ConfigError("element " + std::to_string(id) + ": weight must be positive");
  FluidElement e;
  e.id = id;
  e.position = position;
  e.mu0 = mu0;
  e.omega0 = omega0;
  e.weight = weight;
  e.c0 = c0;
  e.t0 = t0;
  e.t_star = closed_form_blowup_time(mu0, c0, t0);
  e.t = t0;
  e.mu = mu0;
  e.log_omega = std::log(omega0);
  return e;
}

double FluidElement::omega() const { return std::exp(log_omega); }

double closed_form_blowup_time(double mu0, double c0, double t0) {
  const double a = c0 - 1.0;
  return a > 0.0 ? t0 + 1.0 / (a * mu0) : kInf;
}

double closed_form_mu(const FluidElement& e, double t) {
  const double denom = 1.0 - (e.c0 - 1.0) * e.mu0 * (t - e.t0);
  if (!(denom > 0.0)) throw ContractViolation("t=" + describe(t) + " is at or past the element blow-up time T*=" +
                                              describe(e.t_star));
  return e.mu0 / denom;
}

double closed_form_omega(const FluidElement& e, double t) {
  const double a = e.c0 - 1.0;
  if (a == 0.0) return e.omega0 * std::exp(e.mu0 * (t - e.t0));
  const double denom = 1.0 - a * e.mu0 * (t - e.t0);
  if (!(denom > 0.0)) throw ContractViolation("t=" + describe(t) + " is at or past the element blow-up time T*=" +
                                              describe(e.t_star));
  return e.omega0 * std::pow(denom, -1.0 / a);
}

FluidElement element_ode_step(const FluidElement& e, double dt, double guard) {
  if (e.status == ElementStatus::blown_up)
    throw ContractViolation("element " + std::to_string(e.id) + " already blew up at t=" + describe(e.blowup_time));
  if (!(dt > 0.0)) throw ContractViolation("element step needs dt > 0");
  if (e.t + dt >= e.t_star - guard)
    throw ContractViolation("step to t=" + describe(e.t + dt) + " reaches the element blow-up time T*=" +
                            describe(e.t_star));
  const double a = e.c0 - 1.0;
  auto rate = [a](double mu) { return a * mu * mu; };
  const double k1 = rate(e.mu), l1 = e.mu;
  const double m2 = e.mu + 0.5 * dt * k1;
  const double k2 = rate(m2), l2 = m2;
  const double m3 = e.mu + 0.5 * dt * k2;
  const double k3 = rate(m3), l3 = m3;
  const double m4 = e.mu + dt * k3;
  const double k4 = rate(m4), l4 = m4;
  FluidElement out = e;
  out.mu = e.mu + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.log_omega = e.log_omega + dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
  out.t = e.t + dt;
  if (out.mu > 1.0 / guard) {
    out.status = ElementStatus::blown_up;
    out.blowup_time = out.t;
  }
  return out;
}

std::optional<double> numeric_blowup_time(double mu0, double c0, double dt, double t0, double threshold,
                                          double t_max) {
  if (!(dt > 0.0)) throw ContractViolation("numeric blow-up search needs dt > 0");
  if (!(mu0 > 0.0)) throw HypothesisViolation("mu0 must be positive");
  if (!(threshold > mu0)) throw ContractViolation("blow-up threshold must exceed mu0");
  const double a = c0 - 1.0;
  if (!(a > 0.0)) return std::nullopt;
  return rk4_crossing(mu0, a, dt, t0, threshold, t_max);
}

bool passes_filter(double mu0, double threshold) { return mu0 >= threshold; }

BlowupReport ensemble_predict(const std::vector<FluidElement>& elements, double c0, double t0,
                              const EnsembleOptions& options) {
  if (!(c0 > 3.0)) throw ConfigError("ensemble prediction requires c0 > 3 (got c0=" + describe(c0) + ")");
  if (elements.empty()) throw ConfigError("ensemble has no elements");
  for (const FluidElement& e : elements)
    if (!(e.mu0 > 0.0))
      throw HypothesisViolation("element " + std::to_string(e.id) + ": mu0 must be positive (got " +
                                describe(e.mu0) + ")");

  BlowupReport r;
  r.c0 = c0;
  r.t0 = t0;
  double weighted_mu = 0.0;
  r.mu1_sup = 0.0;
  for (const FluidElement& e : elements) {
    const double w2 = e.weight * e.omega0 * e.omega0;
    r.varpi0 += w2;
    weighted_mu += w2 * e.mu0;
    if (e.mu0 > r.mu1_sup) {
      r.mu1_sup = e.mu0;
      r.singular_id = e.id;
    }
  }
  r.v0 = weighted_mu / (r.varpi0 * r.varpi0);
  const double c = c0 - 3.0;
  r.mu_beta = weighted_mu / r.varpi0;  // c varpi0 v0 / (c0 - 3) without the round trip through v0
  r.T0 = t0 + 1.0 / (c * r.varpi0 * r.v0);
  r.T1 = closed_form_blowup_time(r.mu1_sup, c0, t0);
  r.filter_threshold = r.mu_beta * (c0 - 3.0) / (c0 - 1.0);
  if (!(r.T1 < r.T0))
    throw ContractViolation("expected T1 < T0, got T1=" + describe(r.T1) + " and T0=" + describe(r.T0));

  double nearest = kInf;
  for (const FluidElement& e : elements) {
    if (std::abs(e.mu0 - r.mu_beta) < nearest) {
      nearest = std::abs(e.mu0 - r.mu_beta);
      r.beta_nearest_id = e.id;
    }
    ElementVerdict v;
    v.id = e.id;
    v.mu0 = e.mu0;
    v.t_star = closed_form_blowup_time(e.mu0, c0, t0);
    v.passes_filter = passes_filter(e.mu0, r.filter_threshold);
    v.blowup_time_numeric = kNaN;
    if (options.numeric) {
      const auto tb = numeric_blowup_time(e.mu0, c0, options.dt, t0, options.threshold);
      if (tb) v.blowup_time_numeric = *tb;
    }
    r.elements.push_back(v);
  }
  return r;
}

std::string blowup_report_json(const BlowupReport& r) {
  ordered_json j;
  j["T1"] = num(r.T1);
  j["T0"] = num(r.T0);
  j["mu1_sup"] = num(r.mu1_sup);
  j["mu_beta"] = num(r.mu_beta);
  j["filter_threshold"] = num(r.filter_threshold);
  j["c0"] = num(r.c0);
  j["t0"] = num(r.t0);
  j["varpi0"] = num(r.varpi0);
  j["v0"] = num(r.v0);
  j["beta_nearest_id"] = r.beta_nearest_id;
  j["singular_id"] = r.singular_id;
  ordered_json list = ordered_json::array();
  for (const ElementVerdict& v : r.elements) {
    ordered_json e;
    e["id"] = v.id;
    e["mu0"] = num(v.mu0);
    e["Tstar"] = num(v.t_star);
    e["passes_filter"] = v.passes_filter;
    e["blowup_time_numeric"] = num(v.blowup_time_numeric);
    list.push_back(e);
  }
  j["elements"] = list;
  return j.dump(2);
}

FlowMap identity_flow_map() {
  return [](const Vec3& label, double, double) { return label; };
}

FlowMap translation_flow_map(const Vec3& velocity) {
  return [velocity](const Vec3& label, double from, double to) { return label + (to - from) * velocity; };
}

SingularPoint singular_point(const std::vector<FluidElement>& elements, const FlowMap& flow) {
  if (elements.empty()) throw ContractViolation("singular point of an empty ensemble");
  const auto top = std::max_element(elements.begin(), elements.end(),
                                    [](const FluidElement& a, const FluidElement& b) { return a.mu0 < b.mu0; });
  int ties = 0;
  for (const FluidElement& e : elements)
    if (e.mu0 >= top->mu0 * (1.0 - 1e-12)) ++ties;
  if (ties > 1)
    throw AmbiguityError(std::to_string(ties) + " elements share the largest mu0=" + describe(top->mu0) +
                         "; the singular point needs a unique fastest element");
  SingularPoint sp;
  sp.id = top->id;
  sp.T1 = top->t_star;
  sp.position = flow(top->position, top->t0, sp.T1);
  return sp;
}

MaterialSnapshot aligned_snapshot(const std::vector<FluidElement>& elements, double t) {
  MaterialSnapshot snap;
  snap.t = t;
  for (const FluidElement& e : elements) {
    const double mu = closed_form_mu(e, t);
    const double w = closed_form_omega(e, t);
    const Vec3 d = unit(e.direction);
    const Sym3 axis = outer(d);
    const Sym3 transverse = Sym3::identity() - axis;
    const double q = (0.5 * w * w - 1.5 * mu * mu + e.c0 * mu * mu) / 2.0;
    MaterialPoint p;
    p.weight = e.weight;
    p.omega = w * d;
    p.strain = mu * axis - (0.5 * mu) * transverse;
    p.hessian = (-e.c0 * mu * mu) * axis + q * transverse;
    snap.points.push_back(p);
  }
  return snap;
}

std::vector<MaterialSnapshot> aligned_snapshots(const std::vector<FluidElement>& elements,
                                                const std::vector<double>& times) {
  std::vector<MaterialSnapshot> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(aligned_snapshot(elements, t));
  return out;
}

EnsembleSpec parse_ensemble(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("ensemble file is not valid JSON: ") + e.what());
  }
  EnsembleSpec spec;
  try {
    spec.c0 = j.value("c0", spec.c0);
    spec.t0 = j.value("t0", spec.t0);
    spec.options.dt = j.value("dt", spec.options.dt);
    spec.options.threshold = j.value("threshold", spec.options.threshold);
    if (!j.contains("elements") || !j["elements"].is_array() || j["elements"].empty())
      throw ConfigError("ensemble file: 'elements' must be a non-empty array");
    int index = 0;
    for (const auto& item : j["elements"]) {
      const std::string where = "ensemble file: elements[" + std::to_string(index) + "]";
      if (!item.contains("mu0")) throw ConfigError(where + ".mu0 is required");
      Vec3 position;
      if (item.contains("position")) {
        const auto& p = item["position"];
        if (!p.is_array() || p.size() != 3) throw ConfigError(where + ".position must have 3 entries");
        position = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
      }
      double omega0 = 1.0;
      Vec3 direction{0, 0, 1};
      if (item.contains("omega0")) {
        const auto& w = item["omega0"];
        if (w.is_array()) {
          if (w.size() != 3) throw ConfigError(where + ".omega0 must be a number or have 3 entries");
          const Vec3 wv{w[0].get<double>(), w[1].get<double>(), w[2].get<double>()};
          omega0 = norm(wv);
          if (omega0 > 0.0) direction = (1.0 / omega0) * wv;
        } else {
          omega0 = w.get<double>();
        }
      }
      const int id = item.value("id", index);
      FluidElement e = FluidElement::make(id, item["mu0"].get<double>(), spec.c0, spec.t0, omega0, position,
                                          item.value("weight", 1.0));
      e.direction = direction;
      spec.elements.push_back(e);
      ++index;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ensemble file: ") + e.what());
  }
  return spec;
}

EnsembleSpec load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ensemble file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ensemble(buf.str());
}

namespace {

struct TubeState {
  std::array<double, 6> y;  // w_a, w_b, w_c, mu_a, mu_b, mu_c
};

Vec3 tube_forcing(const Vec3& w, double eps) { return eps * cross(w, Vec3{1, 0, 0}); }

double tube_lambda(const std::array<double, 6>& y, double eps) {
  const Vec3 w{y[0], y[1], y[2]};
  const Vec3 f = tube_forcing(w, eps);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += y[3 + i] * y[3 + i] + f[i] / w[i];
  return s / 3.0;
}

std::array<double, 6> tube_rate(const std::array<double, 6>& y, double eps) {
  const Vec3 w{y[0], y[1], y[2]};
  const Vec3 f = tube_forcing(w, eps);
  const double lambda = tube_lambda(y, eps);
  std::array<double, 6> r{};
  for (int i = 0; i < 3; ++i) {
    r[i] = y[3 + i] * y[i];
    r[3 + i] = lambda - y[3 + i] * y[3 + i] - f[i] / w[i];
  }
  return r;
}

TubeSample tube_sample(double t, const std::array<double, 6>& y, double eps) {
  TubeSample s;
  s.t = t;
  s.omega = {y[0], y[1], y[2]};
  s.mu = {y[3], y[4], y[5]};
  s.lambda = tube_lambda(y, eps);
  const Vec3& w = s.omega;
  const Vec3& m = s.mu;
  s.invariant = {w[1] * w[2] * (m[2] - m[1]), w[0] * w[2] * (m[0] - m[2]), w[0] * w[1] * (m[1] - m[0])};
  s.omega_a_reconstructed = s.invariant[1] / (w[2] * (m[0] + std::abs(m[2])));
  return s;
}

}  // namespace

TubeReport vortex_tube_scenario(const TubeParams& p) {
  const double scale = std::max({std::abs(p.mu_a), std::abs(p.mu_b), std::abs(p.mu_c)});
  std::vector<std::string> errors;
  if (!(p.mu_a > 0.0)) errors.push_back("mu_a must be positive");
  if (!(p.mu_b < 0.0) || !(p.mu_c < 0.0)) errors.push_back("mu_b and mu_c must be negative");
  if (std::abs(p.mu_b - p.mu_c) > 1e-12 * scale) errors.push_back("mu_b must equal mu_c");
  if (std::abs(p.mu_a + p.mu_b + p.mu_c) > 1e-12 * scale) errors.push_back("strain eigenvalues must sum to zero");
  for (int i = 0; i < 3; ++i)
    if (!(p.omega[i] != 0.0) || !std::isfinite(p.omega[i]))
      errors.push_back("vorticity components must be nonzero and finite");
  if (!(p.dt > 0.0) || !(p.t_end > 0.0)) errors.push_back("dt and t_end must be positive");
  if (!errors.empty()) {
    std::string msg = "vortex tube scenario:";
    for (const std::string& e : errors) msg += " " + e + ";";
    throw ConfigError(msg);
  }

  TubeReport r;
  r.params = p;
  std::array<double, 6> y{p.omega[0], p.omega[1], p.omega[2], p.mu_a, p.mu_b, p.mu_c};
  const long long steps = std::llround(p.t_end / p.dt);
  r.samples.push_back(tube_sample(0.0, y, p.forcing));
  for (long long i = 0; i < steps; ++i) {
    const double h = p.dt;
    auto shifted = [&y](const std::array<double, 6>& k, double s) {
      std::array<double, 6> out{};
      for (int j = 0; j < 6; ++j) out[j] = y[j] + s * k[j];
      return out;
    };
    const auto k1 = tube_rate(y, p.forcing);
    const auto k2 = tube_rate(shifted(k1, 0.5 * h), p.forcing);
    const auto k3 = tube_rate(shifted(k2, 0.5 * h), p.forcing);
    const auto k4 = tube_rate(shifted(k3, h), p.forcing);
    for (int j = 0; j < 6; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    for (double v : y)
      if (!std::isfinite(v))
        throw NumericalFault("vortex tube state became non-finite at t=" + describe((i + 1) * h));
    r.samples.push_back(tube_sample(static_cast<double>(i + 1) * h, y, p.forcing));
  }

  r.invariant0 = r.samples.front().invariant;
  r.omega_a_monotone = true;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const TubeSample& s = r.samples[i];
    for (int k = 0; k < 3; ++k) r.max_drift[k] = std::max(r.max_drift[k], std::abs(s.invariant[k] - r.invariant0[k]));
    r.reconstruction_residual =
        std::max(r.reconstruction_residual, std::abs(s.omega[0] - s.omega_a_reconstructed) / std::abs(s.omega[0]));
    if (i > 0 && s.omega[0] < r.samples[i - 1].omega[0]) r.omega_a_monotone = false;
  }
  for (int k = 0; k < 3; ++k) {
    const double ref = std::abs(r.invariant0[k]);
    r.relative_drift[k] = ref > 0.0 ? r.max_drift[k] / ref : r.max_drift[k];
  }
  return r;
}

ProbeTrajectory tube_trajectory(const TubeReport& report) {
  ProbeTrajectory traj;
  for (const TubeSample& s : report.samples) {
    const Vec3& w = s.omega;
    const Vec3 f = tube_forcing(w, report.params.forcing);
    const double w2 = dot(w, w);
    Sym3 forcing;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i; j < 3; ++j) forcing.at(i, j) = (f[i] * w[j] + w[i] * f[j]) / w2;
    PointValues v;
    v.vorticity = w;
    v.strain = Sym3::diagonal(s.mu[0], s.mu[1], s.mu[2]);
    v.hessian = forcing - s.lambda * Sym3::identity();
    traj.samples.push_back(make_sample(s.t, Vec3{}, v));
  }
  return traj;
}

void write_tube_csv(std::ostream& out, const TubeReport& report) {
  CsvWriter csv(out, {"t", "omega_a", "omega_b", "omega_c", "mu_a", "mu_b", "mu_c", "lambda", "c1", "c2", "c3",
                      "omega_a_reconstructed"});
  for (const TubeSample& s : report.samples)
    csv.row({s.t, s.omega[0], s.omega[1], s.omega[2], s.mu[0], s.mu[1], s.mu[2], s.lambda, s.invariant[0],
             s.invariant[1], s.invariant[2], s.omega_a_reconstructed});
}

std::string tube_report_json(const TubeReport& r) {
  ordered_json j;
  j["mu_a"] = num(r.params.mu_a);
  j["mu_b"] = num(r.params.mu_b);
  j["mu_c"] = num(r.params.mu_c);
  j["omega0"] = vec(r.params.omega);
  j["t_end"] = num(r.params.t_end);
  j["dt"] = num(r.params.dt);
  j["forcing"] = num(r.params.forcing);
  j["invariant0"] = vec(r.invariant0);
  j["max_drift"] = vec(r.max_drift);
  j["relative_drift"] = vec(r.relative_drift);
  j["conserved_1e-8"] = r.relative_drift[0] <= 1e-8 && r.relative_drift[1] <= 1e-8 && r.relative_drift[2] <= 1e-8;
  j["reconstruction_residual"] = num(r.reconstruction_residual);
  j["omega_a_monotone"] = r.omega_a_monotone;
  return j.dump(2);
}

}  // namespace eulerlab
