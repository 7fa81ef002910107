#include "eulerlab/lagrangian_probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "eulerlab/errors.hpp"
#include "eulerlab/finite_difference.hpp"
#include "eulerlab/text_output.hpp"

namespace eulerlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SpectralField stack_fields(const FlowState& s) {
  SpectralField out(s.grid_ptr(), 18);
  int slot = 0;
  for (const SpectralField* f : {&s.velocity(), &s.vorticity(), &s.strain(), &s.hessian()})
    for (int c = 0; c < f->components(); ++c, ++slot) {
      auto src = f->fourier(c);
      auto dst = out.edit_fourier(slot);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  return out;
}

PointValues unpack(const std::vector<double>& v) {
  PointValues p;
  p.velocity = {v[0], v[1], v[2]};
  p.vorticity = {v[3], v[4], v[5]};
  for (int c = 0; c < 6; ++c) {
    p.strain.c[c] = v[6 + c];
    p.hessian.c[c] = v[12 + c];
  }
  return p;
}

Vec3 wrap_into(const Vec3& x, double box) {
  Vec3 out;
  for (std::size_t a = 0; a < 3; ++a) {
    double r = std::fmod(x[a], box);
    if (r < 0.0) r += box;
    if (r >= box) r = 0.0;
    out[a] = r;
  }
  return out;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double safe_ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

double det3(const Vec3& a, const Vec3& b, const Vec3& c) { return dot(a, cross(b, c)); }

}  // namespace

FieldSampler::FieldSampler(const FlowState& state, Interpolation mode)
    : mode_(mode), grid_(state.grid_ptr()), fields_(stack_fields(state)) {
  if (mode_ == Interpolation::padded_trilinear) {
    fields_ = zero_pad(fields_, 2);
    fields_.sync_physical();
  }
}

PointValues FieldSampler::at(const Vec3& x) const {
  std::vector<double> v;
  if (mode_ == Interpolation::spectral) {
    v = evaluate_at(fields_, x);
  } else {
    const Grid& g = fields_.grid();
    const int n = g.n();
    const double h = g.spacing();
    int lo[3];
    double frac[3];
    for (std::size_t a = 0; a < 3; ++a) {
      const double s = x[a] / h;
      const double fl = std::floor(s);
      frac[a] = s - fl;
      lo[a] = static_cast<int>(((static_cast<long long>(fl) % n) + n) % n);
    }
    v.assign(fields_.components(), 0.0);
    for (int corner = 0; corner < 8; ++corner) {
      const int di = (corner >> 2) & 1, dj = (corner >> 1) & 1, dk = corner & 1;
      const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) * (dk ? frac[2] : 1.0 - frac[2]);
      const std::size_t p = g.point_index((lo[0] + di) % n, (lo[1] + dj) % n, (lo[2] + dk) % n);
      for (int c = 0; c < fields_.components(); ++c) v[c] += w * fields_.physical(c)[p];
    }
  }
  for (double c : v)
    if (!std::isfinite(c)) throw NumericalFault("non-finite interpolated value");
  return unpack(v);
}

ProbeSample make_sample(double t, const Vec3& position, const PointValues& values) {
  ProbeSample s;
  s.t = t;
  s.position = position;
  s.values = values;
  const Vec3& w = values.vorticity;
  s.stretching = values.strain * w;
  s.hessian_action = values.hessian * w;
  s.invariant = cross(w, s.stretching);
  s.hessian_torque = cross(w, s.hessian_action);
  s.strain_frame = decompose(values.strain, FrameSource::strain);
  s.hessian_frame = decompose(values.hessian, FrameSource::hessian);
  if (norm(w) > 0.0) {
    s.strain_alignment = alignment(s.strain_frame, values.strain, w);
    s.hessian_alignment = alignment(s.hessian_frame, values.hessian, w);
  }
  return s;
}

ProbeSpec ProbeSpec::uniform(int per_axis) {
  ProbeSpec s;
  s.kind = Kind::uniform;
  s.per_axis = per_axis;
  return s;
}

ProbeSpec ProbeSpec::random(int count, std::uint64_t seed) {
  ProbeSpec s;
  s.kind = Kind::random;
  s.count = count;
  s.seed = seed;
  return s;
}

ProbeSpec ProbeSpec::at(std::vector<Vec3> positions) {
  ProbeSpec s;
  s.kind = Kind::explicit_positions;
  s.positions = std::move(positions);
  return s;
}

ProbeSet seed_probes(const FlowState& state, const ProbeSpec& spec, Interpolation interpolation) {
  const double box = state.grid().box_length();
  ProbeSet set;
  set.interpolation = interpolation;
  switch (spec.kind) {
    case ProbeSpec::Kind::uniform: {
      const int m = spec.per_axis;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k)
            set.positions.push_back({(i + 0.5) * box / m, (j + 0.5) * box / m, (k + 0.5) * box / m});
      break;
    }
    case ProbeSpec::Kind::random: {
      std::mt19937_64 rng(spec.seed);
      for (int p = 0; p < spec.count; ++p) {
        const double x = unit_uniform(rng) * box, y = unit_uniform(rng) * box, z = unit_uniform(rng) * box;
        set.positions.push_back({x, y, z});
      }
      break;
    }
    case ProbeSpec::Kind::explicit_positions:
      for (const Vec3& x : spec.positions) {
        for (std::size_t a = 0; a < 3; ++a)
          if (!std::isfinite(x[a])) throw ConfigError("probe positions must be finite");
        set.positions.push_back(wrap_into(x, box));
      }
      break;
  }
  if (set.positions.empty()) throw ConfigError("probe set is empty");
  set.cell_volume = box * box * box / static_cast<double>(set.positions.size());
  for (std::size_t p = 0; p < set.positions.size(); ++p) set.trajectories.push_back({static_cast<int>(p), {}});
  return set;
}

void record_sample(ProbeSet& probes, const FlowState& state) {
  const FieldSampler sampler(state, probes.interpolation);
  for (std::size_t p = 0; p < probes.positions.size(); ++p) {
    auto& samples = probes.trajectories[p].samples;
    if (!samples.empty() && !(state.time() > samples.back().t))
      throw ContractViolation("probe samples must be recorded at increasing times");
    samples.push_back(make_sample(state.time(), probes.positions[p], sampler.at(probes.positions[p])));
  }
}

void advance(ProbeSet& probes, FlowState& state, double dt) { step(state, dt, probes.positions); }

void advect(ProbeSet& probes, FlowState& state, double dt, int steps, int sample_every) {
  if (sample_every < 1) throw ContractViolation("sample_every must be positive");
  if (probes.trajectories.empty() || probes.trajectories.front().samples.empty()) record_sample(probes, state);
  for (int i = 1; i <= steps; ++i) {
    advance(probes, state, dt);
    if (i % sample_every == 0) record_sample(probes, state);
  }
}

IdentityReport material_derivative_checks(const ProbeTrajectory& traj) {
  const std::size_t n = traj.samples.size();
  if (n < 5) throw ContractViolation("material derivative checks need at least 5 samples");
  std::vector<double> t(n);
  std::vector<Vec3> w(n), sw(n), inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = traj.samples[i].t;
    w[i] = traj.samples[i].values.vorticity;
    sw[i] = traj.samples[i].stretching;
    inv[i] = traj.samples[i].invariant;
  }
  const auto dw = time_derivative(t, w);
  const auto dsw = time_derivative(t, sw);
  const auto dinv = time_derivative(t, inv);

  double n1 = 0, d1 = 0, n2 = 0, d2 = 0, n3 = 0, d3 = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const ProbeSample& s = traj.samples[i];
    const Vec3 e1 = dw[i] - s.stretching;
    const Vec3 e2 = dsw[i] + s.hessian_action;
    const Vec3 e3 = dinv[i] + s.hessian_torque;
    n1 += dot(e1, e1);
    d1 += dot(s.stretching, s.stretching);
    n2 += dot(e2, e2);
    d2 += dot(s.hessian_action, s.hessian_action);
    n3 += dot(e3, e3);
    d3 += dot(s.hessian_torque, s.hessian_torque);
  }
  IdentityReport r;
  r.vorticity_numerator = std::sqrt(n1);
  r.second_derivative_numerator = std::sqrt(n2);
  r.torque_numerator = std::sqrt(n3);
  r.vorticity = safe_ratio(std::sqrt(n1), std::sqrt(d1));
  r.second_derivative = safe_ratio(std::sqrt(n2), std::sqrt(d2));
  r.torque = safe_ratio(std::sqrt(n3), std::sqrt(d3));
  r.samples_used = static_cast<int>(n - 2);
  return r;
}

SampleResiduals sample_residuals(const ProbeTrajectory& traj) {
  const std::size_t n = traj.samples.size();
  SampleResiduals out;
  out.vorticity.assign(n, kNaN);
  out.second_derivative.assign(n, kNaN);
  out.torque.assign(n, kNaN);
  if (n < 3) return out;
  std::vector<double> t(n);
  std::vector<Vec3> w(n), sw(n), inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = traj.samples[i].t;
    w[i] = traj.samples[i].values.vorticity;
    sw[i] = traj.samples[i].stretching;
    inv[i] = traj.samples[i].invariant;
  }
  const auto dw = time_derivative(t, w);
  const auto dsw = time_derivative(t, sw);
  const auto dinv = time_derivative(t, inv);
  auto rel = [](const Vec3& e, const Vec3& ref) { return norm(ref) > 0.0 ? norm(e) / norm(ref) : kNaN; };
  for (std::size_t i = 0; i < n; ++i) {
    const ProbeSample& s = traj.samples[i];
    out.vorticity[i] = rel(dw[i] - s.stretching, s.stretching);
    out.second_derivative[i] = rel(dsw[i] + s.hessian_action, s.hessian_action);
    out.torque[i] = rel(dinv[i] + s.hessian_torque, s.hessian_torque);
  }
  return out;
}

std::vector<InvariantComponents> invariant_components(const ProbeTrajectory& traj, FramePolicy policy) {
  std::vector<InvariantComponents> out;
  out.reserve(traj.samples.size());
  if (policy == FramePolicy::fixed_cartesian) {
    for (const ProbeSample& s : traj.samples) out.push_back({s.invariant, {false, false, false}, {0, 1, 2}});
    return out;
  }

  static constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::array<Vec3, 3> prev{};
  bool first = true;
  for (const ProbeSample& s : traj.samples) {
    const EigenFrame& f = s.strain_frame;
    std::array<int, 3> perm{0, 1, 2};
    if (!first) {
      double best = -1.0;
      for (const auto& p : kPerms) {
        double score = 0.0;
        for (int l = 0; l < 3; ++l) score += std::abs(dot(prev[l], f.eigenvectors[p[l]]));
        if (score > best + 1e-15) {
          best = score;
          perm = p;
        }
      }
    }
    std::array<Vec3, 3> axes;
    std::array<double, 3> mu;
    for (int l = 0; l < 3; ++l) {
      axes[l] = f.eigenvectors[perm[l]];
      if (!first && dot(axes[l], prev[l]) < 0.0) axes[l] *= -1.0;
      mu[l] = f.eigenvalues[perm[l]];
    }
    if (det3(axes[0], axes[1], axes[2]) < 0.0) axes[2] *= -1.0;
    prev = axes;
    first = false;

    const Vec3& w = s.values.vorticity;
    const double wa = dot(w, axes[0]), wb = dot(w, axes[1]), wc = dot(w, axes[2]);
    InvariantComponents ic;
    ic.labels = perm;
    ic.c = {wb * wc * (mu[2] - mu[1]), wa * wc * (mu[0] - mu[2]), wa * wb * (mu[1] - mu[0])};

    const double scale = mu_max(f);
    auto same = [&](int x, int y) { return std::abs(mu[x] - mu[y]) <= kDegeneracyGap * scale; };
    const bool bc = same(1, 2), ac = same(0, 2), ab = same(0, 1);
    if (bc && ac && ab) {
      ic.c = Vec3{};
    } else {
      if (bc) {
        ic.c[0] = 0.0;
        ic.indeterminate[1] = ic.indeterminate[2] = true;
      }
      if (ac) {
        ic.c[1] = 0.0;
        ic.indeterminate[0] = ic.indeterminate[2] = true;
      }
      if (ab) {
        ic.c[2] = 0.0;
        ic.indeterminate[0] = ic.indeterminate[1] = true;
      }
    }
    out.push_back(ic);
  }
  return out;
}

InvariantBoundReport invariant_bound_check(const ProbeTrajectory& traj, double eps_align) {
  const std::size_t n = traj.samples.size();
  InvariantBoundReport r;
  if (n < 5) return r;
  std::vector<double> t(n);
  std::vector<Vec3> inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = traj.samples[i].t;
    inv[i] = traj.samples[i].invariant;
  }
  const auto d = time_derivative(t, inv);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const ProbeSample& s = traj.samples[i];
    if (!s.hessian_alignment || s.hessian_alignment->residual > eps_align) continue;
    const Vec3 wide = (1.0 / (t[i + 2] - t[i - 2])) * (inv[i + 2] - inv[i - 2]);
    // The centred difference at spacing 2h carries four times the truncation error of spacing h.
    const double truncation = 2.0 * (4.0 / 3.0) * norm(wide - d[i]);
    const double torque = norm(s.values.vorticity) * norm(s.hessian_action) * s.hessian_alignment->residual;
    const double floor = 1e-12 * norm(s.values.vorticity) * (norm(s.stretching) + norm(s.hessian_action));
    const double bound = torque + truncation + floor;
    const double measured = norm(d[i]);
    ++r.checked;
    const double ratio = bound > 0.0 ? measured / bound : (measured > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    r.worst_ratio = std::max(r.worst_ratio, ratio);
    if (measured > bound) ++r.violations;
  }
  return r;
}

double convex_hull_volume(const std::vector<Vec3>& input, double box) {
  const std::size_t n = input.size();
  if (n < 4) return 0.0;
  std::vector<Vec3> pts = input;
  if (box > 0.0) {
    for (std::size_t p = 1; p < n; ++p)
      for (std::size_t a = 0; a < 3; ++a) pts[p][a] -= box * std::round((pts[p][a] - pts[0][a]) / box);
  }
  Vec3 centre;
  double extent = 0.0;
  for (const Vec3& p : pts) centre += (1.0 / static_cast<double>(n)) * p;
  for (const Vec3& p : pts) extent = std::max(extent, norm(p - centre));
  const double tol = 1e-12 * extent * extent * extent;

  double volume = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const Vec3 a = pts[j] - pts[i], b = pts[k] - pts[i];
        bool above = false, below = false;
        for (std::size_t m = 0; m < n && !(above && below); ++m) {
          if (m == i || m == j || m == k) continue;
          const double side = det3(a, b, pts[m] - pts[i]);
          if (side > tol) above = true;
          if (side < -tol) below = true;
        }
        if (above && below) continue;
        volume += std::abs(det3(pts[i] - centre, pts[j] - centre, pts[k] - centre)) / 6.0;
      }
  return volume;
}

void write_trajectory_csv(std::ostream& out, const std::vector<ProbeTrajectory>& trajectories) {
  CsvWriter csv(out, {"id", "t", "x1", "x2", "x3", "w1", "w2", "w3", "mu1", "mu2", "mu3", "lamneg", "lamzeta",
                      "lameta", "cos_s", "cos_p", "c1", "c2", "c3", "res_eq12", "res_eq14", "res_ggk"});
  for (const ProbeTrajectory& traj : trajectories) {
    const auto comps = invariant_components(traj, FramePolicy::principal_axes);
    const SampleResiduals res = sample_residuals(traj);
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
      const ProbeSample& s = traj.samples[i];
      const auto& mu = s.strain_frame.eigenvalues;
      const auto& lam = s.hessian_frame.eigenvalues;
      double lamneg = kNaN, lamzeta = lam[0], lameta = lam[1];
      if (s.hessian_alignment) {
        const int b = s.hessian_alignment->best_index;
        lamneg = lam[b];
        std::array<double, 2> rest{};
        int r = 0;
        for (int k = 0; k < 3; ++k)
          if (k != b) rest[r++] = lam[k];
        lamzeta = rest[0];
        lameta = rest[1];
      }
      const double cos_s = s.strain_alignment ? s.strain_alignment->best_cosine() : kNaN;
      const double cos_p = s.hessian_alignment ? s.hessian_alignment->best_cosine() : kNaN;
      const InvariantComponents& ic = comps[i];
      auto comp = [&](int k) { return ic.indeterminate[k] ? kNaN : ic.c[k]; };
      const Vec3& w = s.values.vorticity;
      csv.row({static_cast<double>(traj.id), s.t, s.position[0], s.position[1], s.position[2], w[0], w[1], w[2], mu[0],
               mu[1], mu[2], lamneg, lamzeta, lameta, cos_s, cos_p, comp(0), comp(1), comp(2), res.vorticity[i],
               res.second_derivative[i], res.torque[i]});
    }
  }
}

}  // namespace eulerlab
