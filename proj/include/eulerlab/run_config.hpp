#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eulerlab/linalg.hpp"

namespace eulerlab {

/// Everything a run needs. Keys of the JSON form are the field names below;
/// CLI flags are the same names in kebab-case.
struct RunConfig {
  std::optional<std::string> mode;  // simulate | odemodel | tube

  // simulate
  std::optional<int> n;
  std::optional<std::string> preset;
  double amplitude = 1.0;
  double abc_a = 1.0, abc_b = 1.0, abc_c = 1.0;
  double slope = -5.0 / 3.0;
  double cutoff = 4.0;
  Vec3 velocity{1.0, 0.0, 0.0};
  std::optional<double> dt;
  std::optional<double> cfl;  // used when dt is absent; 0.25 when both are absent
  std::optional<double> t_end;
  double sample_interval = 0.05;
  std::string probe_layout = "uniform";  // uniform | random | explicit
  int probes_per_axis = 4;
  int probe_count = 64;
  std::vector<Vec3> probe_positions;
  std::string interpolation = "spectral";  // spectral | padded_trilinear
  std::string region = "whole_box";        // whole_box | probe_volume
  int exponent = 1;
  std::optional<double> c0;
  double eps_align = 1e-3;
  std::vector<std::string> monitors{"theorem21"};
  double monitor_t0 = 0.0;
  std::uint64_t seed = 1;

  // odemodel
  std::string ensemble;
  std::optional<double> ode_dt;
  std::optional<double> threshold;

  // tube
  double mu_a = 1.0, mu_b = -0.5, mu_c = -0.5;
  Vec3 omega0{1.0, 1.0, 1.0};
  double forcing = 0.0;

  std::string output_dir;  // empty: $EULERLAB_OUTPUT_ROOT/<mode>, else ./eulerlab_runs/<mode>

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses the JSON form. Throws ConfigError listing every malformed or unknown field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// Every problem with the config, empty when it is runnable.
std::vector<std::string> validate(const RunConfig& config);

bool is_power_of_two(int n);

}  // namespace eulerlab
