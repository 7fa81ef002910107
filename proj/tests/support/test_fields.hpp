#pragma once

// Helpers shared by the unit and acceptance suites: filling fields from
// closed-form functions and deterministic random smooth fields.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "eulerlab/spectral_grid.hpp"

namespace eulerlab::testing {

using ScalarFn = std::function<double(double, double, double)>;

inline void fill(SpectralField& f, int c, const ScalarFn& fn) {
  const Grid& g = f.grid();
  auto data = f.edit_physical(c);
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.n(); ++k) {
        const Vec3 x = g.point(i, j, k);
        data[g.point_index(i, j, k)] = fn(x[0], x[1], x[2]);
      }
}

inline SpectralField scalar_field(const GridPtr& g, const ScalarFn& fn) {
  SpectralField f(g, 1);
  fill(f, 0, fn);
  return f;
}

inline double max_abs_diff(const SpectralField& f, int c, const ScalarFn& fn) {
  SpectralField copy = f;
  copy.sync_physical();
  const Grid& g = f.grid();
  auto data = copy.physical(c);
  double err = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.n(); ++k) {
        const Vec3 x = g.point(i, j, k);
        err = std::max(err, std::abs(data[g.point_index(i, j, k)] - fn(x[0], x[1], x[2])));
      }
  return err;
}

inline double max_abs_diff(const SpectralField& a, int ca, const SpectralField& b, int cb) {
  SpectralField x = a, y = b;
  x.sync_physical();
  y.sync_physical();
  auto p = x.physical(ca);
  auto q = y.physical(cb);
  double err = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) err = std::max(err, std::abs(p[i] - q[i]));
  return err;
}

/// Random trigonometric polynomial with a handful of low harmonics.
struct Harmonic {
  int k[3];
  double amp;
  double phase;
};

inline std::vector<Harmonic> random_harmonics(std::uint64_t seed, int count, int kmax) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  std::uniform_real_distribution<double> ad(-1.0, 1.0);
  std::uniform_real_distribution<double> pd(0.0, 2.0 * std::numbers::pi);
  std::vector<Harmonic> out;
  for (int m = 0; m < count; ++m) out.push_back({{kd(rng), kd(rng), kd(rng)}, ad(rng), pd(rng)});
  return out;
}

inline ScalarFn harmonic_sum(std::vector<Harmonic> hs, bool zero_mean = false) {
  return [hs = std::move(hs), zero_mean](double x, double y, double z) {
    double s = 0.0;
    for (const Harmonic& h : hs) {
      if (zero_mean && h.k[0] == 0 && h.k[1] == 0 && h.k[2] == 0) continue;
      s += h.amp * std::cos(h.k[0] * x + h.k[1] * y + h.k[2] * z + h.phase);
    }
    return s;
  };
}

}  // namespace eulerlab::testing
