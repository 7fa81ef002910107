#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eulerlab/cli_runner.hpp"
#include "eulerlab/errors.hpp"
#include "eulerlab/run_config.hpp"

using eulerlab::RunConfig;

namespace {

// A flag parsed into scratch storage and applied on top of the config file
// only when it was given on the command line.
class Overrides {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& name, const std::string& help, std::function<void(RunConfig&, const T&)> set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    if constexpr (std::is_same_v<T, std::vector<double>>) opt->expected(3);
    apply_.push_back([opt, value, set](RunConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
  }

  void apply(RunConfig& c) const {
    for (const auto& f : apply_) f(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> apply_;
};

eulerlab::Vec3 vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

void add_simulate_flags(CLI::App* app, Overrides& o) {
  o.add<int>(app, "--n", "grid points per axis (power of two)", [](RunConfig& c, const int& v) { c.n = v; });
  o.add<std::string>(app, "--preset", "taylor_green, abc, random_solenoidal, uniform, shear or zero",
                     [](RunConfig& c, const std::string& v) { c.preset = v; });
  o.add<double>(app, "--amplitude", "preset amplitude", [](RunConfig& c, const double& v) { c.amplitude = v; });
  o.add<double>(app, "--abc-a", "ABC coefficient A", [](RunConfig& c, const double& v) { c.abc_a = v; });
  o.add<double>(app, "--abc-b", "ABC coefficient B", [](RunConfig& c, const double& v) { c.abc_b = v; });
  o.add<double>(app, "--abc-c", "ABC coefficient C", [](RunConfig& c, const double& v) { c.abc_c = v; });
  o.add<double>(app, "--slope", "random_solenoidal spectral slope", [](RunConfig& c, const double& v) { c.slope = v; });
  o.add<double>(app, "--cutoff", "random_solenoidal wavenumber cutoff",
                [](RunConfig& c, const double& v) { c.cutoff = v; });
  o.add<std::vector<double>>(app, "--velocity", "uniform preset velocity (3 values)",
                             [](RunConfig& c, const std::vector<double>& v) { c.velocity = vec3(v); });
  o.add<double>(app, "--dt", "time step", [](RunConfig& c, const double& v) { c.dt = v; });
  o.add<double>(app, "--cfl", "Courant number used when --dt is absent", [](RunConfig& c, const double& v) { c.cfl = v; });
  o.add<double>(app, "--t-end", "final time", [](RunConfig& c, const double& v) { c.t_end = v; });
  o.add<double>(app, "--sample-interval", "time between recorded samples",
                [](RunConfig& c, const double& v) { c.sample_interval = v; });
  o.add<std::string>(app, "--probe-layout", "uniform, random or explicit",
                     [](RunConfig& c, const std::string& v) { c.probe_layout = v; });
  o.add<int>(app, "--probes-per-axis", "uniform layout size", [](RunConfig& c, const int& v) { c.probes_per_axis = v; });
  o.add<int>(app, "--probe-count", "random layout size", [](RunConfig& c, const int& v) { c.probe_count = v; });
  o.add<std::string>(app, "--interpolation", "spectral or padded_trilinear",
                     [](RunConfig& c, const std::string& v) { c.interpolation = v; });
  o.add<std::string>(app, "--region", "whole_box or probe_volume",
                     [](RunConfig& c, const std::string& v) { c.region = v; });
  o.add<int>(app, "--exponent", "enstrophy exponent n of phi_n", [](RunConfig& c, const int& v) { c.exponent = v; });
  o.add<double>(app, "--c0", "alignment constant", [](RunConfig& c, const double& v) { c.c0 = v; });
  o.add<double>(app, "--eps-align", "alignment residual tolerance",
                [](RunConfig& c, const double& v) { c.eps_align = v; });
  o.add<std::vector<std::string>>(app, "--monitor", "theorem21 and/or theorem22",
                                  [](RunConfig& c, const std::vector<std::string>& v) { c.monitors = v; });
  o.add<double>(app, "--monitor-t0", "monitor window start", [](RunConfig& c, const double& v) { c.monitor_t0 = v; });
  o.add<std::uint64_t>(app, "--seed", "random seed", [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });
}

void add_odemodel_flags(CLI::App* app, Overrides& o) {
  o.add<std::string>(app, "--ensemble", "ensemble JSON file", [](RunConfig& c, const std::string& v) { c.ensemble = v; });
  o.add<double>(app, "--c0", "alignment constant (overrides the file)", [](RunConfig& c, const double& v) { c.c0 = v; });
  o.add<double>(app, "--ode-dt", "RK4 step of the numeric blow-up search",
                [](RunConfig& c, const double& v) { c.ode_dt = v; });
  o.add<double>(app, "--threshold", "blow-up detection threshold on mu",
                [](RunConfig& c, const double& v) { c.threshold = v; });
  o.add<double>(app, "--eps-align", "alignment residual tolerance",
                [](RunConfig& c, const double& v) { c.eps_align = v; });
  o.add<int>(app, "--exponent", "enstrophy exponent n of phi_n", [](RunConfig& c, const int& v) { c.exponent = v; });
}

void add_tube_flags(CLI::App* app, Overrides& o) {
  o.add<double>(app, "--mu-a", "stretching strain eigenvalue", [](RunConfig& c, const double& v) { c.mu_a = v; });
  o.add<double>(app, "--mu-b", "compressive strain eigenvalue", [](RunConfig& c, const double& v) { c.mu_b = v; });
  o.add<double>(app, "--mu-c", "compressive strain eigenvalue", [](RunConfig& c, const double& v) { c.mu_c = v; });
  o.add<std::vector<double>>(app, "--omega0", "initial vorticity in the principal frame (3 values)",
                             [](RunConfig& c, const std::vector<double>& v) { c.omega0 = vec3(v); });
  o.add<double>(app, "--forcing", "strength of the misaligned Hessian forcing",
                [](RunConfig& c, const double& v) { c.forcing = v; });
  o.add<double>(app, "--dt", "time step", [](RunConfig& c, const double& v) { c.dt = v; });
  o.add<double>(app, "--t-end", "final time", [](RunConfig& c, const double& v) { c.t_end = v; });
  o.add<double>(app, "--eps-align", "alignment residual tolerance",
                [](RunConfig& c, const double& v) { c.eps_align = v; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian diagnostics of vorticity, strain and pressure-Hessian alignment in 3D Euler flows"};
  app.require_subcommand(1);

  struct Command {
    CLI::App* app;
    std::string mode;
    Overrides overrides;
    std::string config_path;
    std::string output;
  };
  std::vector<Command> commands(4);
  commands[0] = {app.add_subcommand("simulate", "pseudo-spectral run with probes, functionals and monitors"), "simulate", {}, {}, {}};
  commands[1] = {app.add_subcommand("odemodel", "aligned fluid-element ensemble and blow-up predictions"), "odemodel", {}, {}, {}};
  commands[2] = {app.add_subcommand("tube", "vortex-tube scenario in the strain principal frame"), "tube", {}, {}, {}};
  commands[3] = {app.add_subcommand("validate", "check a config and list every problem"), "", {}, {}, {}};
  add_simulate_flags(commands[0].app, commands[0].overrides);
  add_odemodel_flags(commands[1].app, commands[1].overrides);
  add_tube_flags(commands[2].app, commands[2].overrides);
  std::string validate_mode;
  commands[3].app->add_option("--mode", validate_mode, "mode to validate (defaults to the file's)");
  add_simulate_flags(commands[3].app, commands[3].overrides);
  for (Command& c : commands) {
    c.app->add_option("--config", c.config_path, "JSON config file; flags override its fields");
    c.app->add_option("--output", c.output, "output directory (default $EULERLAB_OUTPUT_ROOT/<mode>)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : eulerlab::kExitConfig;
  }

  for (Command& c : commands) {
    if (!c.app->parsed()) continue;
    RunConfig config;
    try {
      if (!c.config_path.empty()) config = eulerlab::load_config(c.config_path);
    } catch (const eulerlab::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return eulerlab::kExitConfig;
    }
    c.overrides.apply(config);
    if (!c.output.empty()) config.output_dir = c.output;
    if (!c.mode.empty()) config.mode = c.mode;

    if (c.mode.empty()) {
      if (!validate_mode.empty()) config.mode = validate_mode;
      const std::vector<std::string> errors = eulerlab::validate(config);
      if (errors.empty()) {
        std::cout << "ok\n";
        return eulerlab::kExitOk;
      }
      for (const std::string& e : errors) std::cout << e << '\n';
      return eulerlab::kExitConfig;
    }
    return eulerlab::run(config, std::cerr);
  }
  return eulerlab::kExitOther;
}
