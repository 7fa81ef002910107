#include <doctest.h>

#include <cmath>
#include <vector>

#include "eulerlab/errors.hpp"
#include "eulerlab/euler_dynamics.hpp"
#include "test_fields.hpp"

using namespace eulerlab;
using eulerlab::testing::max_abs_diff;

namespace {

GridPtr grid32() {
  static const GridPtr g = Grid::create(32);
  return g;
}

double run_energy_drift(double dt, double t_end) {
  FlowState s = init_flow("taylor_green", grid32());
  const double e0 = kinetic_energy(s);
  const int steps = static_cast<int>(std::lround(t_end / dt));
  for (int i = 0; i < steps; ++i) step(s, dt);
  return std::abs(kinetic_energy(s) - e0) / e0;
}

}  // namespace

TEST_CASE("taylor_green preset matches its formula and is divergence-free") {
  const FlowState s = init_flow("taylor_green", grid32());
  CHECK(max_abs_diff(s.velocity(), 0, [](double x, double y, double z) { return std::sin(x) * std::cos(y) * std::cos(z); }) < 1e-14);
  CHECK(max_abs_diff(s.velocity(), 1, [](double x, double y, double z) { return -std::cos(x) * std::sin(y) * std::cos(z); }) < 1e-14);
  CHECK(max_abs_diff(s.velocity(), 2, [](double, double, double) { return 0.0; }) < 1e-14);
  CHECK(max_divergence(s) <= 1e-12);
  CHECK(kinetic_energy(s) == doctest::Approx(std::pow(2.0 * std::numbers::pi, 3) / 8.0).epsilon(1e-13));
  CHECK(std::abs(helicity(s)) < 1e-10);
}

TEST_CASE("abc preset: direct formula and Beltrami property") {
  PresetParams p;
  p.abc_a = 1.0;
  p.abc_b = 1.0;
  p.abc_c = 1.0;
  const FlowState s = init_flow("abc", grid32(), p);
  CHECK(max_abs_diff(s.velocity(), 0, [](double, double y, double z) { return std::sin(z) + std::cos(y); }) < 1e-14);
  CHECK(max_abs_diff(s.velocity(), 1, [](double x, double, double z) { return std::sin(x) + std::cos(z); }) < 1e-14);
  CHECK(max_abs_diff(s.velocity(), 2, [](double x, double y, double) { return std::sin(y) + std::cos(x); }) < 1e-14);
  for (int c = 0; c < 3; ++c) CHECK(max_abs_diff(s.vorticity(), c, s.velocity(), c) < 1e-13);
  // |u|^2 = 3 + 2(sin z cos y + sin x cos z + sin y cos x): not uniform.
  const Grid& g = *grid32();
  double lo = 1e300, hi = -1e300;
  for (std::size_t q = 0; q < g.point_count(); ++q) {
    const Vec3 u = vector_at(s.velocity(), q);
    lo = std::min(lo, dot(u, u));
    hi = std::max(hi, dot(u, u));
  }
  CHECK(hi - lo > 1.0);
  CHECK(max_divergence(s) <= 1e-12);
}

TEST_CASE("random_solenoidal is reproducible and solenoidal") {
  PresetParams p;
  p.seed = 42;
  const FlowState a = init_flow("random_solenoidal", grid32(), p);
  const FlowState b = init_flow("random_solenoidal", grid32(), p);
  for (int c = 0; c < 3; ++c) {
    auto x = a.velocity().physical(c);
    auto y = b.velocity().physical(c);
    CHECK(std::equal(x.begin(), x.end(), y.begin()));
  }
  p.seed = 43;
  const FlowState d = init_flow("random_solenoidal", grid32(), p);
  CHECK(max_abs_diff(a.velocity(), 0, d.velocity(), 0) > 1e-3);
  CHECK(max_divergence(a) <= 1e-12 * std::max(1.0, max_velocity_gradient(a)));
  const double mean_sq = 2.0 * kinetic_energy(a) / std::pow(2.0 * std::numbers::pi, 3);
  CHECK(mean_sq == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("preset errors") {
  CHECK_THROWS_AS(init_flow("kida", grid32()), ConfigError);
  PresetParams p;
  p.cutoff = 0.5;
  CHECK_THROWS_AS(init_flow("random_solenoidal", grid32(), p), ConfigError);
}

TEST_CASE("zero velocity is a fixed point") {
  FlowState s = init_flow("zero", grid32());
  step(s, 0.1);
  CHECK(s.velocity().max_abs() == 0.0);
  CHECK(s.time() == doctest::Approx(0.1));
  const PressureFields ph = pressure_and_hessian(s);
  CHECK(ph.pressure.max_abs() == 0.0);
  CHECK(ph.hessian.max_abs() == 0.0);
  CHECK(strain_field(s).max_abs() == 0.0);
  CHECK(vorticity_field(s).max_abs() == 0.0);
}

TEST_CASE("CFL limit and invalid dt") {
  FlowState s = init_flow("taylor_green", grid32());
  const double limit = max_stable_dt(s);
  CHECK(limit == doctest::Approx(0.5 * 2.0 * std::numbers::pi / 32.0));
  try {
    step(s, 2.0 * limit);
    FAIL("expected a CFL refusal");
  } catch (const CflViolation& e) {
    CHECK(e.suggested_dt() == doctest::Approx(limit));
  }
  CHECK(s.time() == 0.0);
  CHECK_THROWS_AS(step(s, 0.0), ContractViolation);
  CHECK_THROWS_AS(step(s, -1e-3), ContractViolation);
}

TEST_CASE("taylor_green energy drift and its convergence") {
  const double drift = run_energy_drift(0.01, 0.5);
  CHECK(drift <= 1e-6);
  const double coarse = run_energy_drift(0.05, 0.5);
  const double fine = run_energy_drift(0.025, 0.5);
  MESSAGE("energy drift dt=0.05: " << coarse << ", dt=0.025: " << fine);
  CHECK(coarse / fine >= 8.0);
}

TEST_CASE("divergence stays at roundoff and helicity is conserved") {
  PresetParams p;
  p.seed = 3;
  FlowState s = init_flow("random_solenoidal", grid32(), p);
  const double h0 = helicity(s);
  REQUIRE(std::abs(h0) > 1e-3);
  for (int i = 0; i < 20; ++i) {
    step(s, 0.01);
    CHECK(max_divergence(s) <= 1e-10 * max_velocity_gradient(s));
  }
  CHECK(std::abs(helicity(s) - h0) / std::abs(h0) <= 1e-5);
}

TEST_CASE("RK4 step: one step vs two half steps is fifth order") {
  PresetParams p;
  p.seed = 11;
  const FlowState start = init_flow("random_solenoidal", grid32(), p);
  auto gap = [&](double dt) {
    FlowState one = start, two = start;
    step(one, dt);
    step(two, 0.5 * dt);
    step(two, 0.5 * dt);
    double err = 0.0;
    for (int c = 0; c < 3; ++c) err = std::max(err, max_abs_diff(one.velocity(), c, two.velocity(), c));
    return err;
  };
  const double big = gap(0.04), small = gap(0.02);
  MESSAGE("step-doubling gap: " << big << " -> " << small);
  CHECK(big / small >= 24.0);
}

TEST_CASE("shear flow strain and vorticity") {
  const FlowState s = init_flow("shear", grid32());
  const SpectralField st = strain_field(s);
  const SpectralField w = vorticity_field(s);
  CHECK(max_abs_diff(st, 3, [](double, double y, double) { return 0.5 * std::cos(y); }) < 1e-14);
  for (int c : {0, 1, 2, 4, 5}) CHECK(max_abs_diff(st, c, [](double, double, double) { return 0.0; }) < 1e-14);
  CHECK(max_abs_diff(w, 2, [](double, double y, double) { return -std::cos(y); }) < 1e-14);
  for (std::size_t q = 0; q < grid32()->point_count(); ++q) CHECK_EQ(tensor_at(st, q).trace(), 0.0);
}

TEST_CASE("taylor_green pressure matches the closed form") {
  const FlowState s = init_flow("taylor_green", grid32());
  CHECK(max_abs_diff(s.pressure(), 0, [](double x, double y, double z) { return taylor_green_pressure({x, y, z}); }) < 1e-14);
  // P_11 = d2p/dx2 = -(cos 2x)(cos 2z + 2)/4.
  CHECK(max_abs_diff(s.hessian(), 0, [](double x, double, double z) { return -std::cos(2 * x) * (std::cos(2 * z) + 2.0) / 4.0; }) < 1e-13);
  // P_13 = (sin 2x)(sin 2z)/4.
  CHECK(max_abs_diff(s.hessian(), 4, [](double x, double, double z) { return std::sin(2 * x) * std::sin(2 * z) / 4.0; }) < 1e-13);
}

TEST_CASE("trace identity on every preset and after evolution") {
  for (const std::string& name : preset_names()) {
    FlowState s = init_flow(name, grid32());
    for (int i = 0; i < 3; ++i) {
      const TraceCheck tc = trace_identity_check(s);
      CAPTURE(name);
      CHECK(tc.max_error <= 1e-8 * std::max(tc.max_hessian, 1e-300));
      if (tc.max_hessian == 0.0) CHECK(tc.max_error == 0.0);
      step(s, 0.02);
    }
  }
}

TEST_CASE("probes co-integrated with the solver") {
  SUBCASE("uniform translation displaces exactly") {
    PresetParams p;
    p.velocity = {0.3, -0.2, 0.1};
    FlowState s = init_flow("uniform", grid32(), p);
    std::vector<Vec3> probes{{1.0, 2.0, 3.0}};
    for (int i = 0; i < 10; ++i) step(s, 0.05, probes);
    CHECK(probes[0][0] == doctest::Approx(1.15).epsilon(1e-14));
    CHECK(probes[0][1] == doctest::Approx(1.9).epsilon(1e-14));
    CHECK(probes[0][2] == doctest::Approx(3.05).epsilon(1e-14));
  }
  SUBCASE("taylor_green stagnation point stays put") {
    FlowState s = init_flow("taylor_green", grid32());
    std::vector<Vec3> probes{{0.0, 0.0, 0.0}};
    for (int i = 0; i < 10; ++i) step(s, 0.05, probes);
    CHECK(norm(probes[0]) < 1e-14);
  }
  SUBCASE("positions wrap into the box") {
    PresetParams p;
    p.velocity = {-1.0, 0.0, 0.0};
    FlowState s = init_flow("uniform", grid32(), p);
    std::vector<Vec3> probes{{0.01, 0.0, 0.0}};
    step(s, 0.05, probes);
    CHECK(probes[0][0] == doctest::Approx(2.0 * std::numbers::pi - 0.04));
  }
}
