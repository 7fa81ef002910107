#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "eulerlab/errors.hpp"
#include "eulerlab/lagrangian_probes.hpp"

using namespace eulerlab;

namespace {

constexpr double kPi = std::numbers::pi;

GridPtr grid32() {
  static const GridPtr g = Grid::create(32);
  return g;
}

// Steady linear flow with constant diagonal strain a, b, c (a + b + c = 0):
// w(t) = exp(S t) w0 and the pressure Hessian is -S^2.
ProbeTrajectory linear_flow_trajectory(double h, int count, double a, double b, const Vec3& w0) {
  const double c = -a - b;
  const Sym3 s = Sym3::diagonal(a, b, c);
  const Sym3 p = Sym3::diagonal(-a * a, -b * b, -c * c);
  ProbeTrajectory traj;
  for (int i = 0; i < count; ++i) {
    const double t = i * h;
    PointValues v;
    v.vorticity = {w0[0] * std::exp(a * t), w0[1] * std::exp(b * t), w0[2] * std::exp(c * t)};
    v.strain = s;
    v.hessian = p;
    traj.samples.push_back(make_sample(t, Vec3{}, v));
  }
  return traj;
}

struct TgRun {
  std::vector<IdentityReport> reports;
  double worst_r1 = 0, worst_r2 = 0, worst_r3 = 0;
};

TgRun taylor_green_identities(double dt, double t_end) {
  FlowState s = init_flow("taylor_green", grid32());
  ProbeSet probes = seed_probes(s, ProbeSpec::random(6, 2024));
  advect(probes, s, dt, static_cast<int>(std::lround(t_end / dt)));
  TgRun run;
  for (const auto& traj : probes.trajectories) {
    run.reports.push_back(material_derivative_checks(traj));
    run.worst_r1 = std::max(run.worst_r1, run.reports.back().vorticity);
    run.worst_r2 = std::max(run.worst_r2, run.reports.back().second_derivative);
    run.worst_r3 = std::max(run.worst_r3, run.reports.back().torque);
  }
  return run;
}

}  // namespace

TEST_CASE("seeding") {
  const FlowState s = init_flow("taylor_green", grid32());
  const ProbeSet u = seed_probes(s, ProbeSpec::uniform(2));
  REQUIRE(u.positions.size() == 8);
  CHECK(u.positions[0][0] == doctest::Approx(kPi / 2));
  CHECK(u.positions[7][2] == doctest::Approx(3 * kPi / 2));
  CHECK(u.cell_volume == doctest::Approx(std::pow(2 * kPi, 3) / 8));

  const ProbeSet r1 = seed_probes(s, ProbeSpec::random(10, 7));
  const ProbeSet r2 = seed_probes(s, ProbeSpec::random(10, 7));
  CHECK(r1.positions == r2.positions);
  for (const Vec3& x : r1.positions)
    for (std::size_t a = 0; a < 3; ++a) CHECK((x[a] >= 0.0 && x[a] < 2 * kPi));

  const ProbeSet e = seed_probes(s, ProbeSpec::at({{-1.0, 7.0, 3.0}}));
  CHECK(e.positions[0][0] == doctest::Approx(2 * kPi - 1.0));
  CHECK(e.positions[0][1] == doctest::Approx(7.0 - 2 * kPi));
  CHECK(e.positions[0][2] == 3.0);

  CHECK_THROWS_AS(seed_probes(s, ProbeSpec::at({})), ConfigError);
  CHECK_THROWS_AS(seed_probes(s, ProbeSpec::random(0, 1)), ConfigError);
  CHECK_THROWS_AS(seed_probes(s, ProbeSpec::uniform(0)), ConfigError);
}

TEST_CASE("interpolation of a single harmonic") {
  const FlowState s = init_flow("taylor_green", grid32());
  const FieldSampler spectral(s, Interpolation::spectral);
  const FieldSampler trilinear(s, Interpolation::padded_trilinear);
  // Spacing of the refined grid; trilinear error per axis is at most h^2 k^2 / 8 for unit-amplitude harmonics.
  const double h = 2 * kPi / 64;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 2 * kPi);
  double spec_err = 0.0, tri_err = 0.0;
  for (int m = 0; m < 50; ++m) {
    const Vec3 x{d(rng), d(rng), d(rng)};
    const double exact = std::sin(x[0]) * std::cos(x[1]) * std::cos(x[2]);
    spec_err = std::max(spec_err, std::abs(spectral.at(x).velocity[0] - exact));
    tri_err = std::max(tri_err, std::abs(trilinear.at(x).velocity[0] - exact));
    const double p13 = std::sin(2 * x[0]) * std::sin(2 * x[2]) / 4.0;
    spec_err = std::max(spec_err, std::abs(spectral.at(x).hessian(0, 2) - p13));
  }
  CHECK(spec_err < 1e-13);
  CHECK(tri_err <= 3 * h * h / 8);
  CHECK(tri_err > 1e-6);
}

TEST_CASE("frozen linear flow satisfies the identities up to finite-difference truncation") {
  const Vec3 w0{0.3, 1.0, -0.7};
  const IdentityReport coarse = material_derivative_checks(linear_flow_trajectory(0.02, 21, 0.8, -0.3, w0));
  const IdentityReport fine = material_derivative_checks(linear_flow_trajectory(0.01, 41, 0.8, -0.3, w0));
  CHECK(coarse.fd_order == 2);
  CHECK(coarse.vorticity < 1e-3);
  CHECK(coarse.second_derivative < 1e-3);
  CHECK(coarse.torque < 1e-3);
  // Second-order centred differences: halving the interval divides the error by 4.
  CHECK(coarse.vorticity / fine.vorticity == doctest::Approx(4.0).epsilon(0.01));
  CHECK(coarse.second_derivative / fine.second_derivative == doctest::Approx(4.0).epsilon(0.01));
  CHECK(coarse.torque / fine.torque == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("identity checks on degenerate input") {
  ProbeTrajectory zero;
  for (int i = 0; i < 6; ++i) zero.samples.push_back(make_sample(0.1 * i, Vec3{}, PointValues{}));
  const IdentityReport r = material_derivative_checks(zero);
  CHECK(r.vorticity_numerator == 0.0);
  CHECK(r.second_derivative_numerator == 0.0);
  CHECK(r.torque_numerator == 0.0);
  CHECK(r.vorticity == 0.0);

  zero.samples.resize(4);
  CHECK_THROWS_AS(material_derivative_checks(zero), ContractViolation);
}

TEST_CASE("invariant components in the principal frame") {
  PointValues v;
  v.strain = Sym3::diagonal(1.0, -0.5, -0.5);
  v.vorticity = {1.0, 1.0, 1.0};
  ProbeTrajectory traj;
  traj.samples.push_back(make_sample(0.0, Vec3{}, v));
  auto ic = invariant_components(traj, FramePolicy::principal_axes);
  CHECK(ic[0].c[0] == 0.0);
  CHECK(ic[0].indeterminate[1]);
  CHECK(ic[0].indeterminate[2]);
  CHECK_FALSE(ic[0].indeterminate[0]);

  v.strain = Sym3::diagonal(2.0, -0.5, -1.5);
  v.vorticity = {0.0, 3.0, 0.0};
  traj.samples = {make_sample(0.0, Vec3{}, v)};
  ic = invariant_components(traj, FramePolicy::principal_axes);
  for (int k = 0; k < 3; ++k) CHECK(ic[0].c[k] == doctest::Approx(0.0));

  // Generic case: the components equal w x S w expressed in the eigenbasis.
  v.vorticity = {0.5, -1.0, 2.0};
  traj.samples = {make_sample(0.0, Vec3{}, v)};
  ic = invariant_components(traj, FramePolicy::principal_axes);
  const Vec3 inv = traj.samples[0].invariant;
  for (int k = 0; k < 3; ++k) {
    const Vec3& e = traj.samples[0].strain_frame.eigenvectors[ic[0].labels[k]];
    CHECK(std::abs(ic[0].c[k]) == doctest::Approx(std::abs(dot(inv, e))));
  }
  const auto cart = invariant_components(traj, FramePolicy::fixed_cartesian);
  CHECK(cart[0].c == inv);
}

TEST_CASE("labels follow eigenvectors through an eigenvalue crossing") {
  ProbeTrajectory traj;
  for (int i = 0; i < 11; ++i) {
    const double t = 0.1 * i;
    PointValues v;
    // Eigenvalues along x and y cross at t = 0.5 while the axes stay fixed.
    v.strain = Sym3::diagonal(1.0 - t, t, -1.0);
    v.vorticity = {1.0, 2.0, 0.5};
    traj.samples.push_back(make_sample(t, Vec3{}, v));
  }
  const auto ic = invariant_components(traj, FramePolicy::principal_axes);
  for (std::size_t i = 0; i < ic.size(); ++i) {
    const Vec3& ea = traj.samples[i].strain_frame.eigenvectors[ic[i].labels[0]];
    CHECK(std::abs(ea[0]) == doctest::Approx(1.0));
  }
  CHECK(ic[5].c[2] == 0.0);
  CHECK(ic[5].indeterminate[0]);
  CHECK(ic[5].indeterminate[1]);
  CHECK_FALSE(ic[4].indeterminate[0]);
}

TEST_CASE("convex hull volume") {
  const std::vector<Vec3> tet{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.1, 0.1, 0.1}, {0.2, 0.3, 0.1}};
  CHECK(convex_hull_volume(tet) == doctest::Approx(1.0 / 6.0));
  const std::vector<Vec3> oct{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}, {0.1, 0.2, 0.3}};
  CHECK(convex_hull_volume(oct) == doctest::Approx(4.0 / 3.0));
  // Cloud straddling the periodic boundary.
  const double box = 2 * kPi;
  std::vector<Vec3> shifted;
  for (const Vec3& p : tet) shifted.push_back(Vec3{std::fmod(p[0] * 0.1 - 0.05 + box, box), p[1] * 0.1, p[2] * 0.1});
  CHECK(convex_hull_volume(shifted, box) == doctest::Approx(1e-3 / 6.0));
}

TEST_CASE("taylor_green identity convergence") {
  const TgRun coarse = taylor_green_identities(2e-3, 0.2);
  const TgRun fine = taylor_green_identities(1e-3, 0.2);
  for (std::size_t p = 0; p < coarse.reports.size(); ++p) {
    const IdentityReport& a = coarse.reports[p];
    const IdentityReport& b = fine.reports[p];
    MESSAGE("probe " << p << " r1 " << a.vorticity << " -> " << b.vorticity << " (" << a.vorticity / b.vorticity
                     << "), r2 " << a.second_derivative << " -> " << b.second_derivative << " ("
                     << a.second_derivative / b.second_derivative << "), r3 " << a.torque << " -> " << b.torque << " ("
                     << a.torque / b.torque << ")");
    CHECK(a.vorticity / b.vorticity == doctest::Approx(4.0).epsilon(0.05));
    CHECK(a.second_derivative / b.second_derivative == doctest::Approx(4.0).epsilon(0.05));
    CHECK(a.torque / b.torque == doctest::Approx(4.0).epsilon(0.05));
  }
  CHECK(fine.worst_r1 <= 1e-4);
}

TEST_CASE("resolution refinement and volume preservation") {
  const GridPtr g64 = Grid::create(64);
  FlowState s32 = init_flow("taylor_green", grid32());
  FlowState s64 = init_flow("taylor_green", g64);
  const std::vector<Vec3> start{{1.0, 0.4, 2.2}, {2.5, 1.7, 0.3}};
  ProbeSet a = seed_probes(s32, ProbeSpec::at(start));
  ProbeSet b = seed_probes(s64, ProbeSpec::at(start));
  for (int i = 0; i < 50; ++i) {
    advance(a, s32, 0.01);
    advance(b, s64, 0.01);
  }
  for (std::size_t p = 0; p < start.size(); ++p) CHECK(norm(a.positions[p] - b.positions[p]) <= 1e-4);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> d;
  std::vector<Vec3> cloud;
  for (int m = 0; m < 12; ++m) {
    Vec3 v{d(rng), d(rng), d(rng)};
    cloud.push_back(Vec3{1.2, 0.9, 2.0} + (0.05 / norm(v)) * v);
  }
  FlowState s = init_flow("taylor_green", grid32());
  ProbeSet c = seed_probes(s, ProbeSpec::at(cloud));
  const double v0 = convex_hull_volume(c.positions, 2 * kPi);
  for (int i = 0; i < 50; ++i) advance(c, s, 0.01);
  const double v1 = convex_hull_volume(c.positions, 2 * kPi);
  CHECK(std::abs(v1 - v0) / v0 <= 0.02);
}

TEST_CASE("trajectory CSV export") {
  FlowState s = init_flow("taylor_green", grid32());
  ProbeSet p = seed_probes(s, ProbeSpec::random(2, 1));
  advect(p, s, 0.01, 4);
  std::ostringstream out;
  write_trajectory_csv(out, p.trajectories);
  const std::string text = out.str();
  CHECK(text.rfind("id,t,x1,x2,x3,w1,w2,w3,mu1,mu2,mu3,lamneg,lamzeta,lameta,cos_s,cos_p,c1,c2,c3,res_eq12,res_eq14,res_ggk\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 5);
}

TEST_CASE("invariant bound holds on aligned data") {
  // Pressure Hessian aligned with w: w x S w must be constant.
  ProbeTrajectory traj;
  for (int i = 0; i < 9; ++i) {
    PointValues v;
    v.strain = Sym3::diagonal(1.0, -0.5, -0.5);
    v.vorticity = {2.0, 0.0, 0.0};
    v.hessian = Sym3::diagonal(-3.0, 1.0, 1.0);
    traj.samples.push_back(make_sample(0.05 * i, Vec3{}, v));
  }
  const InvariantBoundReport r = invariant_bound_check(traj, 1e-10);
  CHECK(r.checked == 5);
  CHECK(r.violations == 0);
}
