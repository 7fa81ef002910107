#include "eulerlab/cli_runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <fftw3.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "eulerlab/aligned_ode_model.hpp"
#include "eulerlab/blowup_functionals.hpp"
#include "eulerlab/errors.hpp"
#include "eulerlab/euler_dynamics.hpp"
#include "eulerlab/lagrangian_probes.hpp"
#include "eulerlab/snapshot_io.hpp"
#include "eulerlab/text_output.hpp"

#ifndef EULERLAB_VERSION
#define EULERLAB_VERSION "unknown"
#endif

namespace eulerlab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

// Collects the files a run writes so the manifest can checksum them.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  const fs::path& dir() const { return dir_; }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    names_.push_back(name);
    return out;
  }

  void text(const std::string& name, const std::string& body) {
    std::ofstream out = open(name);
    out << body << '\n';
  }

  void add(const std::string& name) { names_.push_back(name); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

struct ModeOutcome {
  ordered_json resolved = ordered_json::object();
  ordered_json inputs = ordered_json::array();
};

PresetParams preset_params(const RunConfig& c) {
  PresetParams p;
  p.amplitude = c.amplitude;
  p.abc_a = c.abc_a;
  p.abc_b = c.abc_b;
  p.abc_c = c.abc_c;
  p.seed = c.seed;
  p.slope = c.slope;
  p.cutoff = c.cutoff;
  p.velocity = c.velocity;
  return p;
}

ProbeSpec probe_spec(const RunConfig& c) {
  if (c.probe_layout == "random") return ProbeSpec::random(c.probe_count, c.seed);
  if (c.probe_layout == "explicit") return ProbeSpec::at(c.probe_positions);
  return ProbeSpec::uniform(c.probes_per_axis);
}

void write_inequality_csv(std::ostream& out, const std::vector<InequalityRow>& rows) {
  CsvWriter csv(out, {"t", "cs_margin", "second_margin", "second_margin_fd", "second_holds", "second_holds_fd"});
  for (const InequalityRow& r : rows)
    csv.row({r.t, r.cs_margin, r.second_margin, r.second_margin_fd, r.second_holds ? 1.0 : 0.0,
             r.second_holds_fd ? 1.0 : 0.0});
}

void emit_functionals(Artifacts& art, const RunConfig& c, const std::vector<MaterialSnapshot>& snaps, Region region) {
  const FunctionalSeries series = enstrophy_functionals(snaps, c.exponent, region, c.eps_align);
  {
    std::ofstream out = art.open("functionals.csv");
    write_functional_csv(out, series);
  }
  {
    std::ofstream out = art.open("inequalities.csv");
    write_inequality_csv(out, check_inequalities(series));
  }
}

void emit_monitors(Artifacts& art, const RunConfig& c, const std::vector<MaterialSnapshot>& snaps, double c0) {
  for (const std::string& m : c.monitors) {
    const MonitorVerdict v = m == "theorem22" ? proportional_hessian_monitor(snaps, c.monitor_t0, c0, c.eps_align)
                                              : hessian_dominance_monitor(snaps, c.monitor_t0, c.eps_align);
    art.text("monitor_" + m + ".json", monitor_json(v));
  }
}

ModeOutcome run_simulate(const RunConfig& c, Artifacts& art) {
  ModeOutcome outcome;
  const GridPtr grid = Grid::create(*c.n);
  FlowState state = init_flow(*c.preset, grid, preset_params(c));
  const double t_end = *c.t_end;

  double dt = 0.0;
  if (c.dt) {
    dt = *c.dt;
  } else {
    dt = max_stable_dt(state, c.cfl.value_or(0.25));
    if (!std::isfinite(dt)) dt = std::min(c.sample_interval, t_end);
  }
  const long long steps = std::max(1LL, static_cast<long long>(std::ceil(t_end / dt - 1e-9)));
  dt = t_end / static_cast<double>(steps);
  const long long sample_every = std::max(1LL, std::llround(c.sample_interval / dt));
  const long long sample_count = steps / sample_every + 1 + (steps % sample_every != 0 ? 1 : 0);
  if (sample_count < 3)
    throw ConfigError("sample_interval: the run records " + std::to_string(sample_count) +
                      " samples; at least 3 are needed");
  outcome.resolved["dt"] = dt;
  outcome.resolved["steps"] = steps;
  outcome.resolved["sample_every"] = sample_every;

  ProbeSet probes =
      seed_probes(state, probe_spec(c),
                  c.interpolation == "padded_trilinear" ? Interpolation::padded_trilinear : Interpolation::spectral);
  const bool whole_box = c.region == "whole_box";
  std::vector<MaterialSnapshot> snaps;

  std::ofstream diag = art.open("diagnostics.csv");
  CsvWriter diag_csv(diag, {"t", "energy", "helicity", "enstrophy", "max_divergence", "max_vorticity", "courant",
                            "trace_error", "max_hessian"});
  auto diagnostics = [&](bool sampled) {
    double trace_error = kNaN, max_hessian = kNaN;
    if (sampled) {
      const TraceCheck tc = trace_identity_check(state);
      trace_error = tc.max_error;
      max_hessian = tc.max_hessian;
    }
    diag_csv.row({state.time(), kinetic_energy(state), helicity(state), enstrophy(state), max_divergence(state),
                  max_vorticity(state), courant_number(state, dt), trace_error, max_hessian});
  };
  auto sample = [&]() {
    record_sample(probes, state);
    if (whole_box) snaps.push_back(whole_box_snapshot(state));
    diagnostics(true);
  };

  sample();
  try {
    for (long long i = 1; i <= steps; ++i) {
      advance(probes, state, dt);
      if (i % sample_every == 0 || i == steps)
        sample();
      else
        diagnostics(false);
    }
  } catch (const NumericalFault& e) {
    const fs::path dump = art.dir() / "fault_state.eulb";
    write_snapshot(dump, state.velocity(), state.time());
    art.add("fault_state.eulb");
    throw NumericalFault(std::string(e.what()) + "; state dumped to " + dump.string());
  }
  diag.close();

  {
    std::ofstream out = art.open("trajectories.csv");
    write_trajectory_csv(out, probes.trajectories);
  }
  if (probes.trajectories.front().samples.size() >= 5) {
    std::ofstream out = art.open("identities.csv");
    CsvWriter csv(out, {"id", "r_vorticity", "r_second_derivative", "r_torque", "samples_used"});
    for (const ProbeTrajectory& traj : probes.trajectories) {
      const IdentityReport r = material_derivative_checks(traj);
      csv.row({static_cast<double>(traj.id), r.vorticity, r.second_derivative, r.torque,
               static_cast<double>(r.samples_used)});
    }
  }
  if (!whole_box) snaps = probe_volume_series(probes);
  emit_functionals(art, c, snaps, whole_box ? Region::whole_box : Region::probe_volume);
  emit_monitors(art, c, snaps, c.c0.value_or(kNaN));
  write_snapshot(art.dir() / "final_state.eulb", state.velocity(), state.time());
  art.add("final_state.eulb");
  return outcome;
}

ModeOutcome run_odemodel(const RunConfig& c, Artifacts& art) {
  ModeOutcome outcome;
  EnsembleSpec spec = load_ensemble(c.ensemble);
  const double c0 = c.c0.value_or(spec.c0);
  if (c.ode_dt) spec.options.dt = *c.ode_dt;
  if (c.threshold) spec.options.threshold = *c.threshold;
  std::vector<FluidElement> elements;
  for (const FluidElement& e : spec.elements) {
    FluidElement copy = FluidElement::make(e.id, e.mu0, c0, spec.t0, e.omega0, e.position, e.weight);
    copy.direction = e.direction;
    elements.push_back(copy);
  }
  outcome.inputs.push_back({{"path", c.ensemble}, {"sha256", sha256_file(c.ensemble)}});
  outcome.resolved["c0"] = c0;
  outcome.resolved["t0"] = spec.t0;
  outcome.resolved["ode_dt"] = spec.options.dt;
  outcome.resolved["threshold"] = spec.options.threshold;
  ordered_json elems = ordered_json::array();
  for (const FluidElement& e : elements)
    elems.push_back({{"id", e.id},
                     {"mu0", e.mu0},
                     {"omega0", e.omega0},
                     {"direction", {e.direction[0], e.direction[1], e.direction[2]}},
                     {"position", {e.position[0], e.position[1], e.position[2]}},
                     {"weight", e.weight}});
  outcome.resolved["elements"] = elems;

  const BlowupReport report = ensemble_predict(elements, c0, spec.t0, spec.options);
  ordered_json j = ordered_json::parse(blowup_report_json(report));
  try {
    const SingularPoint sp = singular_point(elements);
    j["singular_point"] = {{"id", sp.id}, {"position", {sp.position[0], sp.position[1], sp.position[2]}}, {"T1", sp.T1}};
  } catch (const AmbiguityError& e) {
    j["singular_point"] = nullptr;
    j["singular_point_note"] = e.what();
  }
  art.text("blowup_report.json", j.dump(2));
  {
    std::ofstream out = art.open("elements.csv");
    CsvWriter csv(out, {"id", "mu0", "Tstar", "passes_filter", "blowup_time_numeric"});
    for (const ElementVerdict& v : report.elements)
      csv.row({static_cast<double>(v.id), v.mu0, v.t_star, v.passes_filter ? 1.0 : 0.0, v.blowup_time_numeric});
  }

  // Aligned dynamics up to 90% of the way to the first singularity.
  const double t_stop = spec.t0 + 0.9 * (std::min(report.T1, report.T0) - spec.t0);
  std::vector<double> times;
  for (int i = 0; i <= 100; ++i) times.push_back(spec.t0 + (t_stop - spec.t0) * i / 100.0);
  const std::vector<MaterialSnapshot> snaps = aligned_snapshots(elements, times);
  emit_functionals(art, c, snaps, Region::probe_volume);
  RunConfig monitors = c;
  monitors.monitor_t0 = spec.t0;
  monitors.monitors = {"theorem21", "theorem22"};
  emit_monitors(art, monitors, snaps, c0);
  return outcome;
}

ModeOutcome run_tube(const RunConfig& c, Artifacts& art) {
  ModeOutcome outcome;
  TubeParams p;
  p.mu_a = c.mu_a;
  p.mu_b = c.mu_b;
  p.mu_c = c.mu_c;
  p.omega = c.omega0;
  p.forcing = c.forcing;
  p.dt = c.dt.value_or(p.dt);
  p.t_end = c.t_end.value_or(p.t_end);
  outcome.resolved["dt"] = p.dt;
  outcome.resolved["t_end"] = p.t_end;

  const TubeReport report = vortex_tube_scenario(p);
  const InvariantBoundReport bound = invariant_bound_check(tube_trajectory(report), c.eps_align);
  ordered_json j = ordered_json::parse(tube_report_json(report));
  j["bound_check"] = {{"checked", bound.checked}, {"violations", bound.violations},
                      {"worst_ratio", num(bound.worst_ratio)}};
  art.text("tube_report.json", j.dump(2));
  std::ofstream out = art.open("tube.csv");
  write_tube_csv(out, report);
  return outcome;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const NumericalFault*>(&e) || dynamic_cast<const ConservationViolation*>(&e))
    return kExitNumerical;
  if (dynamic_cast<const HypothesisViolation*>(&e) || dynamic_cast<const AmbiguityError*>(&e))
    return kExitHypothesis;
  return kExitOther;
}

fs::path resolve_output_dir(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  const std::string mode = c.mode.value_or("simulate");
  const char* root = std::getenv("EULERLAB_OUTPUT_ROOT");
  if (root && *root) return fs::path(root) / mode;
  return fs::path("eulerlab_runs") / mode;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

RunResult execute(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Artifacts art(resolve_output_dir(config));
  const std::string mode = config.mode.value_or("simulate");
  ModeOutcome outcome;
  if (mode == "simulate")
    outcome = run_simulate(config, art);
  else if (mode == "odemodel")
    outcome = run_odemodel(config, art);
  else if (mode == "tube")
    outcome = run_tube(config, art);
  else
    throw ConfigError("mode: unknown mode '" + mode + "'");

  ordered_json manifest;
  manifest["tool"] = "eulerlab";
  manifest["version"] = EULERLAB_VERSION;
  manifest["fftw"] = std::string(fftw_version);
  manifest["compiler"] = __VERSION__;
  manifest["mode"] = mode;
  manifest["config"] = ordered_json::parse(serialize_config(config));
  manifest["resolved"] = outcome.resolved;
  manifest["inputs"] = outcome.inputs;
  ordered_json outputs = ordered_json::array();
  for (const std::string& name : art.names())
    outputs.push_back({{"file", name},
                       {"bytes", static_cast<std::uint64_t>(fs::file_size(art.dir() / name))},
                       {"sha256", sha256_file(art.dir() / name)}});
  manifest["outputs"] = outputs;
  art.text("manifest.json", manifest.dump(2));

  RunResult result;
  result.output_dir = art.dir();
  result.outputs = art.names();
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream timing(art.dir() / "timing.json");
  timing << ordered_json{{"wall_seconds", result.wall_seconds}}.dump(2) << '\n';
  return result;
}

int run(const RunConfig& config, std::ostream& log) {
  const std::vector<std::string> errors = validate(config);
  if (!errors.empty()) {
    for (const std::string& e : errors) log << "config error: " << e << '\n';
    return kExitConfig;
  }
  try {
    const RunResult r = execute(config);
    log << "wrote " << r.outputs.size() << " files to " << r.output_dir.string() << " in " << r.wall_seconds
        << " s\n";
    return kExitOk;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    const char* kind = code == kExitConfig        ? "config error"
                       : code == kExitNumerical   ? "numerical fault"
                       : code == kExitHypothesis  ? "hypothesis not met"
                                                  : "error";
    log << kind << ": " << e.what() << '\n';
    return code;
  }
}

}  // namespace eulerlab
