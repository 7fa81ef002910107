#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "eulerlab/blowup_functionals.hpp"
#include "eulerlab/errors.hpp"

using namespace eulerlab;

namespace {

GridPtr grid32() {
  static const GridPtr g = Grid::create(32);
  return g;
}

// Vorticity along z with aligned strain stretching rate mu and
// Hessian eigenvalue -lambda along the vorticity.
MaterialPoint aligned_point(double w, double mu, double lambda, double weight = 1.0) {
  MaterialPoint p;
  p.weight = weight;
  p.omega = {0.0, 0.0, w};
  p.strain = Sym3::diagonal(-mu / 2, -mu / 2, mu);
  p.hessian = Sym3::diagonal(0.3, 0.3, -lambda);
  return p;
}

std::vector<MaterialSnapshot> repeated(const MaterialPoint& p, int count = 3, double h = 0.1) {
  std::vector<MaterialSnapshot> out;
  for (int i = 0; i < count; ++i) out.push_back({i * h, {p}});
  return out;
}

std::vector<MaterialSnapshot> taylor_green_series(double dt, double t_end) {
  FlowState s = init_flow("taylor_green", grid32());
  std::vector<MaterialSnapshot> out{whole_box_snapshot(s)};
  const int steps = static_cast<int>(std::lround(t_end / dt));
  for (int i = 0; i < steps; ++i) {
    step(s, dt);
    out.push_back(whole_box_snapshot(s));
  }
  return out;
}

}  // namespace

TEST_CASE("single aligned point: v and the Cauchy-Schwarz equality") {
  // |w| = 2, mu = 2: enstrophy 4, int w.Sw = 8, |Sw| = 4.
  const FunctionalSeries fs = enstrophy_functionals(repeated(aligned_point(2.0, 2.0, 1.0)));
  for (const FunctionalSample& s : fs.samples) {
    CHECK(s.enstrophy == doctest::Approx(4.0));
    CHECK(s.v == doctest::Approx(0.5));
    CHECK(s.phi_n == doctest::Approx(0.125));
    CHECK(s.cs_lhs == doctest::Approx(4.0));
    CHECK(s.cs_rhs == doctest::Approx(4.0));
    CHECK(s.v_from_phi == doctest::Approx(0.0));
  }
  for (const InequalityRow& r : check_inequalities(fs)) {
    CHECK(std::abs(r.cs_margin) <= 1e-12);
    CHECK(r.second_holds);
  }
}

TEST_CASE("exponent two halves the enstrophy power") {
  const FunctionalSeries fs = enstrophy_functionals(repeated(aligned_point(2.0, 2.0, 1.0)), 2);
  CHECK(fs.samples[0].phi_n == doctest::Approx(0.25));
  CHECK_THROWS_AS(enstrophy_functionals(repeated(aligned_point(2.0, 2.0, 1.0)), 0), ConfigError);
}

TEST_CASE("stretching orthogonal to vorticity gives v = 0") {
  MaterialPoint p;
  p.weight = 1.0;
  p.omega = {2.0, 0.0, 0.0};
  p.strain = Sym3{};
  p.strain.c[3] = 1.0;  // S_12: S w = (0, 2, 0)
  const FunctionalSeries fs = enstrophy_functionals(repeated(p));
  CHECK(fs.samples[1].v == 0.0);
  CHECK(fs.samples[1].dwdt_l2 == doctest::Approx(2.0));
}

TEST_CASE("degenerate inputs") {
  CHECK_THROWS_AS(enstrophy_functionals(repeated(aligned_point(2.0, 1.0, 1.0), 2)), ContractViolation);
  CHECK_THROWS_AS(enstrophy_functionals(repeated(aligned_point(0.0, 1.0, 1.0))), HypothesisViolation);
  FunctionalSeries bad;
  FunctionalSample s;
  s.cs_lhs = 2.0;
  s.cs_rhs = 1.0;
  bad.samples.push_back(s);
  CHECK_THROWS_AS(check_inequalities(bad), QuadratureBug);
}

TEST_CASE("bound curve constants") {
  const BoundCurves bc = bound_curves(0.0, 1.0, 2.0, 0.5);
  CHECK(bc.T0 == doctest::Approx(1.0));
  CHECK(bc.A == doctest::Approx(0.5));
  CHECK(bc.B == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(bound_curves(0.0, 0.0, 1.0, 1.0), ContractViolation);
}

TEST_CASE("exact c0 = 4 alignment triggers both monitors") {
  // |w| = 1, mu = 1, lambda = 4: enstrophy 1, v0 = 1.
  const auto snaps = repeated(aligned_point(1.0, 1.0, 4.0));
  const MonitorVerdict m22 = proportional_hessian_monitor(snaps, 0.0, 4.0);
  CHECK(m22.applicable);
  CHECK(m22.c == doctest::Approx(1.0));
  CHECK(m22.T0 == doctest::Approx(1.0));
  CHECK(m22.satisfied_fraction_min == 1.0);
  CHECK(m22.max_relative_deviation <= 1e-15);

  const MonitorVerdict m21 = hessian_dominance_monitor(snaps, 0.0);
  CHECK(m21.applicable);
  CHECK(m21.c == doctest::Approx(1.0));  // min(1, (4 - 3) / 1)
  CHECK(m21.T0 == doctest::Approx(1.0));

  CHECK_THROWS_AS(proportional_hessian_monitor(snaps, 0.0, 3.0), ConfigError);
  CHECK_THROWS_AS(hessian_dominance_monitor(snaps, 5.0), ContractViolation);
}

TEST_CASE("monitor window starts at t0 and small margins shrink c") {
  auto snaps = repeated(aligned_point(1.0, 1.0, 3.5), 4);
  snaps[0].points[0] = aligned_point(1.0, 1.0, 1.0);  // fails before t0
  const MonitorVerdict m = hessian_dominance_monitor(snaps, 0.1);
  CHECK(m.t0 == doctest::Approx(0.1));
  CHECK(m.applicable);
  CHECK(m.c == doctest::Approx(0.5));
  CHECK(m.T0 == doctest::Approx(0.1 + 2.0));
  CHECK(m.fractions.size() == 3);
  CHECK_FALSE(hessian_dominance_monitor(snaps, 0.0).applicable);
}

TEST_CASE("compressing strain violates the v0 hypothesis") {
  const MonitorVerdict m = proportional_hessian_monitor(repeated(aligned_point(1.0, -1.0, 4.0)), 0.0, 4.0);
  CHECK_FALSE(m.applicable);
  CHECK(std::isnan(m.T0));
}

TEST_CASE("monitor json keys and nulls") {
  const MonitorVerdict m = hessian_dominance_monitor(repeated(aligned_point(1.0, 1.0, 1.0)), 0.0);
  CHECK_FALSE(m.applicable);
  const auto j = nlohmann::json::parse(monitor_json(m));
  for (const char* key : {"condition", "t0", "c0", "c", "varpi0", "v0", "T0", "A", "B", "applicable",
                          "satisfied_fraction_min"})
    CHECK(j.contains(key));
  CHECK(j["T0"].is_null());
  CHECK(j["c0"].is_null());
  CHECK(j["satisfied_fraction_min"].get<double>() == 0.0);
}

TEST_CASE("taylor_green early time does not meet the condition") {
  const auto snaps = taylor_green_series(0.01, 0.05);
  const MonitorVerdict m = hessian_dominance_monitor(snaps, 0.0);
  CHECK(m.satisfied_fraction_min < 1.0);
  CHECK_FALSE(m.applicable);
  CHECK(std::isnan(m.T0));
  const FunctionalSeries fs = enstrophy_functionals(snaps);
  for (const FunctionalSample& s : fs.samples) CHECK(s.dominance_fraction < 1.0);
}

TEST_CASE("whole-box quadrature matches the spectral integrals") {
  FlowState s = init_flow("random_solenoidal", grid32(), PresetParams{.seed = 7});
  const RegionIntegrals in = region_integrals(whole_box_snapshot(s));
  const SpectralField& w = s.vorticity();
  double spectral = 0.0;
  for (int c = 0; c < 3; ++c) spectral += integrate_product_spectral(w, c, w, c);
  CHECK(std::abs(in.enstrophy - spectral) <= 1e-10 * spectral);
  CHECK(std::abs(in.enstrophy - enstrophy(s)) <= 1e-10 * spectral);
}

TEST_CASE("taylor_green functionals: estimator agreement and growth") {
  const auto coarse = enstrophy_functionals(taylor_green_series(0.02, 0.4));
  const auto fine = enstrophy_functionals(taylor_green_series(0.01, 0.4));
  // Compare at t = 0.2 (index 10 coarse, 20 fine).
  const FunctionalSample& a = coarse.samples[10];
  const FunctionalSample& b = fine.samples[20];
  REQUIRE(a.t == doctest::Approx(0.2));
  REQUIRE(b.t == doctest::Approx(0.2));
  const double err_coarse_v = std::abs(a.v - a.v_from_phi);
  const double err_fine_v = std::abs(b.v - b.v_from_phi);
  const double err_coarse_vp = std::abs(a.vprime - a.vprime_fd);
  const double err_fine_vp = std::abs(b.vprime - b.vprime_fd);
  CHECK(err_fine_v <= 1e-4 * std::abs(b.v));
  CHECK(err_coarse_v / err_fine_v == doctest::Approx(4.0).epsilon(0.1));
  CHECK(err_coarse_vp / err_fine_vp == doctest::Approx(4.0).epsilon(0.1));

  for (std::size_t i = 1; i < fine.samples.size(); ++i) {
    CHECK(fine.samples[i].v > 0.0);
    CHECK(fine.samples[i].enstrophy > fine.samples[i - 1].enstrophy);
  }
  for (const InequalityRow& r : check_inequalities(fine)) {
    CHECK(r.cs_margin >= 0.0);
    CHECK(r.second_holds);
  }
}

TEST_CASE("functional csv header") {
  std::ostringstream out;
  write_functional_csv(out, enstrophy_functionals(repeated(aligned_point(2.0, 2.0, 1.0))));
  std::string header;
  std::getline(std::istringstream(out.str()) >> std::ws, header);
  CHECK(header ==
        "t,enstrophy,phi_n,v_eq23,v_eq22,vprime_fd,vprime_eq24,dwdt_l2,eq25_lhs,eq25_rhs,eq26_lhs,eq26_rhs,"
        "thm21_fraction,thm21_margin_min");
}
