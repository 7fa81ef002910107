#include "eulerlab/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "eulerlab/errors.hpp"
#include "eulerlab/euler_dynamics.hpp"

namespace eulerlab {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Vec3 to_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected an array of 3 numbers");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

ordered_json from_vec(const Vec3& v) { return ordered_json::array({v[0], v[1], v[2]}); }

double number(const json& j) {
  if (!j.is_number()) throw std::invalid_argument("expected a number");
  return j.get<double>();
}

int integer(const json& j) {
  if (!j.is_number_integer()) throw std::invalid_argument("expected an integer");
  return j.get<int>();
}

std::string text(const json& j) {
  if (!j.is_string()) throw std::invalid_argument("expected a string");
  return j.get<std::string>();
}

using Setter = std::function<void(RunConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"mode", [](RunConfig& c, const json& j) { c.mode = text(j); }},
      {"n", [](RunConfig& c, const json& j) { c.n = integer(j); }},
      {"preset", [](RunConfig& c, const json& j) { c.preset = text(j); }},
      {"amplitude", [](RunConfig& c, const json& j) { c.amplitude = number(j); }},
      {"abc_a", [](RunConfig& c, const json& j) { c.abc_a = number(j); }},
      {"abc_b", [](RunConfig& c, const json& j) { c.abc_b = number(j); }},
      {"abc_c", [](RunConfig& c, const json& j) { c.abc_c = number(j); }},
      {"slope", [](RunConfig& c, const json& j) { c.slope = number(j); }},
      {"cutoff", [](RunConfig& c, const json& j) { c.cutoff = number(j); }},
      {"velocity", [](RunConfig& c, const json& j) { c.velocity = to_vec(j); }},
      {"dt", [](RunConfig& c, const json& j) { c.dt = number(j); }},
      {"cfl", [](RunConfig& c, const json& j) { c.cfl = number(j); }},
      {"t_end", [](RunConfig& c, const json& j) { c.t_end = number(j); }},
      {"sample_interval", [](RunConfig& c, const json& j) { c.sample_interval = number(j); }},
      {"probe_layout", [](RunConfig& c, const json& j) { c.probe_layout = text(j); }},
      {"probes_per_axis", [](RunConfig& c, const json& j) { c.probes_per_axis = integer(j); }},
      {"probe_count", [](RunConfig& c, const json& j) { c.probe_count = integer(j); }},
      {"probe_positions",
       [](RunConfig& c, const json& j) {
         if (!j.is_array()) throw std::invalid_argument("expected an array of positions");
         c.probe_positions.clear();
         for (const json& p : j) c.probe_positions.push_back(to_vec(p));
       }},
      {"interpolation", [](RunConfig& c, const json& j) { c.interpolation = text(j); }},
      {"region", [](RunConfig& c, const json& j) { c.region = text(j); }},
      {"exponent", [](RunConfig& c, const json& j) { c.exponent = integer(j); }},
      {"c0", [](RunConfig& c, const json& j) { c.c0 = number(j); }},
      {"eps_align", [](RunConfig& c, const json& j) { c.eps_align = number(j); }},
      {"monitors",
       [](RunConfig& c, const json& j) {
         if (!j.is_array()) throw std::invalid_argument("expected an array of monitor names");
         c.monitors.clear();
         for (const json& m : j) c.monitors.push_back(text(m));
       }},
      {"monitor_t0", [](RunConfig& c, const json& j) { c.monitor_t0 = number(j); }},
      {"seed",
       [](RunConfig& c, const json& j) {
         if (!j.is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
         c.seed = j.get<std::uint64_t>();
       }},
      {"ensemble", [](RunConfig& c, const json& j) { c.ensemble = text(j); }},
      {"ode_dt", [](RunConfig& c, const json& j) { c.ode_dt = number(j); }},
      {"threshold", [](RunConfig& c, const json& j) { c.threshold = number(j); }},
      {"mu_a", [](RunConfig& c, const json& j) { c.mu_a = number(j); }},
      {"mu_b", [](RunConfig& c, const json& j) { c.mu_b = number(j); }},
      {"mu_c", [](RunConfig& c, const json& j) { c.mu_c = number(j); }},
      {"omega0", [](RunConfig& c, const json& j) { c.omega0 = to_vec(j); }},
      {"forcing", [](RunConfig& c, const json& j) { c.forcing = number(j); }},
      {"output_dir", [](RunConfig& c, const json& j) { c.output_dir = text(j); }},
  };
  return table;
}

template <class T>
std::string show(const T& x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

bool one_of(const std::string& s, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return s == o; });
}

void check_simulate(const RunConfig& c, std::vector<std::string>& err) {
  if (!c.n)
    err.push_back("n: required (grid points per axis)");
  else if (!is_power_of_two(*c.n) || *c.n < 8)
    err.push_back("n: must be a power of two and at least 8, got " + show(*c.n));
  if (!c.preset)
    err.push_back("preset: required");
  else if (!is_known_preset(*c.preset))
    err.push_back("preset: unknown preset '" + *c.preset + "'");
  if (!c.t_end)
    err.push_back("t_end: required");
  else if (!(*c.t_end > 0.0))
    err.push_back("t_end: must be positive");
  if (c.dt && !(*c.dt > 0.0)) err.push_back("dt: must be positive");
  if (c.cfl && !(*c.cfl > 0.0 && *c.cfl <= kCflLimit))
    err.push_back("cfl: must lie in (0, " + show(kCflLimit) + "]");
  if (!(c.sample_interval > 0.0)) err.push_back("sample_interval: must be positive");
  if (!(c.amplitude > 0.0)) err.push_back("amplitude: must be positive");
  if (!(c.cutoff > 0.0)) err.push_back("cutoff: must be positive");
  if (!one_of(c.probe_layout, {"uniform", "random", "explicit"}))
    err.push_back("probe_layout: must be uniform, random or explicit");
  if (c.probe_layout == "uniform" && c.probes_per_axis < 1) err.push_back("probes_per_axis: must be at least 1");
  if (c.probe_layout == "random" && c.probe_count < 1) err.push_back("probe_count: must be at least 1");
  if (c.probe_layout == "explicit" && c.probe_positions.empty())
    err.push_back("probe_positions: required for the explicit layout");
  if (!one_of(c.interpolation, {"spectral", "padded_trilinear"}))
    err.push_back("interpolation: must be spectral or padded_trilinear");
  if (!one_of(c.region, {"whole_box", "probe_volume"})) err.push_back("region: must be whole_box or probe_volume");
  if (c.exponent < 1) err.push_back("exponent: must be a positive integer");
  if (!(c.eps_align > 0.0)) err.push_back("eps_align: must be positive");
  for (const std::string& m : c.monitors) {
    if (!one_of(m, {"theorem21", "theorem22"}))
      err.push_back("monitors: unknown monitor '" + m + "'");
    else if (m == "theorem22") {
      if (!c.c0)
        err.push_back("c0: required by the theorem22 monitor (c0 > 3)");
      else if (!(*c.c0 > 3.0))
        err.push_back("c0: the theorem22 monitor requires c0 > 3, got " + show(*c.c0));
    }
  }
}

void check_odemodel(const RunConfig& c, std::vector<std::string>& err) {
  if (c.ensemble.empty()) err.push_back("ensemble: required (path to the ensemble file)");
  if (c.c0 && !(*c.c0 > 3.0)) err.push_back("c0: ensemble prediction requires c0 > 3, got " + show(*c.c0));
  if (c.ode_dt && !(*c.ode_dt > 0.0)) err.push_back("ode_dt: must be positive");
  if (c.threshold && !(*c.threshold > 0.0)) err.push_back("threshold: must be positive");
}

void check_tube(const RunConfig& c, std::vector<std::string>& err) {
  if (!(c.mu_a > 0.0)) err.push_back("mu_a: must be positive");
  if (!(c.mu_b < 0.0) || !(c.mu_c < 0.0)) err.push_back("mu_b, mu_c: must be negative");
  const double scale = std::max({std::abs(c.mu_a), std::abs(c.mu_b), std::abs(c.mu_c)});
  if (std::abs(c.mu_b - c.mu_c) > 1e-12 * scale) err.push_back("mu_b, mu_c: must be equal");
  if (std::abs(c.mu_a + c.mu_b + c.mu_c) > 1e-12 * scale) err.push_back("mu_a, mu_b, mu_c: must sum to zero");
  for (int i = 0; i < 3; ++i)
    if (c.omega0[i] == 0.0) {
      err.push_back("omega0: components must be nonzero");
      break;
    }
  if (c.dt && !(*c.dt > 0.0)) err.push_back("dt: must be positive");
  if (c.t_end && !(*c.t_end > 0.0)) err.push_back("t_end: must be positive");
}

}  // namespace

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  std::vector<std::string> errors;
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) {
      errors.push_back(key + ": unknown field");
      continue;
    }
    try {
      it->second(c, value);
    } catch (const std::exception& e) {
      errors.push_back(key + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  ordered_json j;
  if (c.mode) j["mode"] = *c.mode;
  if (c.n) j["n"] = *c.n;
  if (c.preset) j["preset"] = *c.preset;
  j["amplitude"] = c.amplitude;
  j["abc_a"] = c.abc_a;
  j["abc_b"] = c.abc_b;
  j["abc_c"] = c.abc_c;
  j["slope"] = c.slope;
  j["cutoff"] = c.cutoff;
  j["velocity"] = from_vec(c.velocity);
  if (c.dt) j["dt"] = *c.dt;
  if (c.cfl) j["cfl"] = *c.cfl;
  if (c.t_end) j["t_end"] = *c.t_end;
  j["sample_interval"] = c.sample_interval;
  j["probe_layout"] = c.probe_layout;
  j["probes_per_axis"] = c.probes_per_axis;
  j["probe_count"] = c.probe_count;
  ordered_json positions = ordered_json::array();
  for (const Vec3& p : c.probe_positions) positions.push_back(from_vec(p));
  j["probe_positions"] = positions;
  j["interpolation"] = c.interpolation;
  j["region"] = c.region;
  j["exponent"] = c.exponent;
  if (c.c0) j["c0"] = *c.c0;
  j["eps_align"] = c.eps_align;
  j["monitors"] = c.monitors;
  j["monitor_t0"] = c.monitor_t0;
  j["seed"] = c.seed;
  j["ensemble"] = c.ensemble;
  if (c.ode_dt) j["ode_dt"] = *c.ode_dt;
  if (c.threshold) j["threshold"] = *c.threshold;
  j["mu_a"] = c.mu_a;
  j["mu_b"] = c.mu_b;
  j["mu_c"] = c.mu_c;
  j["omega0"] = from_vec(c.omega0);
  j["forcing"] = c.forcing;
  j["output_dir"] = c.output_dir;
  return j.dump(2);
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> err;
  if (!c.mode) {
    err.push_back("mode: required (simulate, odemodel or tube)");
    check_simulate(c, err);
  } else if (*c.mode == "simulate") {
    check_simulate(c, err);
  } else if (*c.mode == "odemodel") {
    check_odemodel(c, err);
  } else if (*c.mode == "tube") {
    check_tube(c, err);
  } else {
    err.push_back("mode: unknown mode '" + *c.mode + "'");
  }
  return err;
}

}  // namespace eulerlab
