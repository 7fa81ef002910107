#include "eulerlab/eigenframe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eulerlab/errors.hpp"

namespace eulerlab {

namespace {

void fix_sign(Vec3& v) {
  std::size_t big = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (std::abs(v[i]) > std::abs(v[big])) big = i;
  if (v[big] < 0.0) v *= -1.0;
}

Vec3 normalized(const Vec3& v) { return (1.0 / norm(v)) * v; }

// Eigenvector of an isolated eigenvalue: the longest cross product of two rows of A - lambda I.
Vec3 isolated_eigenvector(const Sym3& a, double lambda) {
  const Vec3 r0{a(0, 0) - lambda, a(0, 1), a(0, 2)};
  const Vec3 r1{a(1, 0), a(1, 1) - lambda, a(1, 2)};
  const Vec3 r2{a(2, 0), a(2, 1), a(2, 2) - lambda};
  const Vec3 c01 = cross(r0, r1), c02 = cross(r0, r2), c12 = cross(r1, r2);
  const double d01 = dot(c01, c01), d02 = dot(c02, c02), d12 = dot(c12, c12);
  if (d01 >= d02 && d01 >= d12) return normalized(c01);
  if (d02 >= d12) return normalized(c02);
  return normalized(c12);
}

// Unit vectors u, v with (w, u, v) orthonormal.
void complement_basis(const Vec3& w, Vec3& u, Vec3& v) {
  if (std::abs(w[0]) > std::abs(w[1])) {
    const double inv = 1.0 / std::sqrt(w[0] * w[0] + w[2] * w[2]);
    u = {-w[2] * inv, 0.0, w[0] * inv};
  } else {
    const double inv = 1.0 / std::sqrt(w[1] * w[1] + w[2] * w[2]);
    u = {0.0, w[2] * inv, -w[1] * inv};
  }
  v = cross(w, u);
}

// Eigenvector for lambda restricted to the plane spanned by u, v.
Vec3 planar_eigenvector(const Sym3& a, double lambda, const Vec3& u, const Vec3& v) {
  const Sym3 shifted = a - lambda * Sym3::identity();
  const Vec3 au = shifted * u, av = shifted * v;
  double m00 = dot(u, au), m01 = dot(u, av), m11 = dot(v, av);
  const double a00 = std::abs(m00), a01 = std::abs(m01), a11 = std::abs(m11);
  if (a00 >= a11) {
    if (std::max(a00, a01) == 0.0) return u;
    if (a00 >= a01) {
      m01 /= m00;
      m00 = 1.0 / std::sqrt(1.0 + m01 * m01);
      m01 *= m00;
    } else {
      m00 /= m01;
      m01 = 1.0 / std::sqrt(1.0 + m00 * m00);
      m00 *= m01;
    }
    return m01 * u - m00 * v;
  }
  if (std::max(a11, a01) == 0.0) return u;
  if (a11 >= a01) {
    m01 /= m11;
    m11 = 1.0 / std::sqrt(1.0 + m01 * m01);
    m01 *= m11;
  } else {
    m11 /= m01;
    m01 = 1.0 / std::sqrt(1.0 + m11 * m11);
    m11 *= m01;
  }
  return m11 * u - m01 * v;
}

// Cyclic Jacobi for the degenerate case.
void jacobi(const Sym3& s, std::array<double, 3>& values, std::array<Vec3, 3>& vectors) {
  double a[3][3];
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = s(i, j);
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off == 0.0) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - sn * akq;
          a[k][q] = sn * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - sn * aqk;
          a[q][k] = sn * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - sn * vkq;
          v[k][q] = sn * vkp + c * vkq;
        }
      }
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });
  for (int i = 0; i < 3; ++i) {
    values[i] = a[order[i]][order[i]];
    vectors[i] = {v[0][order[i]], v[1][order[i]], v[2][order[i]]};
  }
}

}  // namespace

EigenFrame decompose(const Sym3& m, FrameSource source) {
  for (double c : m.c)
    if (!std::isfinite(c)) throw ContractViolation("eigen-decomposition of a non-finite tensor");

  EigenFrame frame;
  frame.source = source;
  double scale = 0.0;
  for (double c : m.c) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) {
    frame.eigenvectors = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    return frame;
  }
  const Sym3 a = (1.0 / scale) * m;

  // Trigonometric roots of the characteristic polynomial of the deviator.
  const double q = a.trace() / 3.0;
  const Sym3 b = a - q * Sym3::identity();
  const double p = std::sqrt(contract(b, b) / 6.0);
  std::array<double, 3> values{q, q, q};
  if (p > 0.0) {
    const Sym3 c = (1.0 / p) * b;
    const double det = c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(1, 2)) -
                       c(0, 1) * (c(0, 1) * c(2, 2) - c(1, 2) * c(0, 2)) +
                       c(0, 2) * (c(0, 1) * c(1, 2) - c(1, 1) * c(0, 2));
    const double r = std::clamp(det / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    values[0] = q + 2.0 * p * std::cos(phi);
    values[2] = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    values[1] = 3.0 * q - values[0] - values[2];
  }

  const double spread = std::max(std::abs(values[0]), std::abs(values[2]));
  const double gap = std::min(values[0] - values[1], values[1] - values[2]);
  std::array<Vec3, 3> vectors;
  if (p == 0.0 || gap <= kDegeneracyGap * spread) {
    jacobi(a, values, vectors);
    frame.used_fallback = true;
  } else {
    const bool top_isolated = (values[0] - values[1]) >= (values[1] - values[2]);
    const std::size_t iso = top_isolated ? 0 : 2;
    const std::size_t other = top_isolated ? 2 : 0;
    vectors[iso] = isolated_eigenvector(a, values[iso]);
    Vec3 u, v;
    complement_basis(vectors[iso], u, v);
    vectors[1] = normalized(planar_eigenvector(a, values[1], u, v));
    vectors[other] = cross(vectors[iso], vectors[1]);
  }

  fix_sign(vectors[0]);
  fix_sign(vectors[1]);
  vectors[2] = normalized(cross(vectors[0], vectors[1]));

  for (std::size_t i = 0; i < 3; ++i) frame.eigenvalues[i] = values[i] * scale;
  frame.eigenvectors = vectors;
  return frame;
}

EigenFrame decompose(const Mat3& m, FrameSource source) {
  double scale = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      scale = std::max(scale, std::abs(m(i, j)));
      asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
    }
  if (asym > 1e-12 * scale) throw ContractViolation("eigen-decomposition requires a symmetric matrix");
  Sym3 s;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j) s.at(i, j) = 0.5 * (m(i, j) + m(j, i));
  return decompose(s, source);
}

AlignmentMetrics alignment(const EigenFrame& frame, const Sym3& m, const Vec3& w) {
  const double wn = norm(w);
  if (!(wn > 0.0) || !std::isfinite(wn)) throw ContractViolation("alignment needs a non-zero finite vector");
  AlignmentMetrics out;
  for (std::size_t i = 0; i < 3; ++i) out.cosines[i] = std::min(1.0, std::abs(dot(frame.eigenvectors[i], w)) / wn);
  for (int i = 1; i < 3; ++i)
    if (out.cosines[i] > out.cosines[out.best_index]) out.best_index = i;
  const Vec3 mw = m * w;
  out.rayleigh = dot(w, mw) / (wn * wn);
  const double mwn = norm(mw);
  out.residual = mwn == 0.0 ? 0.0 : norm(mw - out.rayleigh * w) / mwn;
  return out;
}

AlignmentMetrics alignment(const Sym3& m, const Vec3& w) { return alignment(decompose(m), m, w); }

double mu_max(const EigenFrame& frame) {
  return std::max({std::abs(frame.eigenvalues[0]), std::abs(frame.eigenvalues[1]), std::abs(frame.eigenvalues[2])});
}

double relative_gap(const EigenFrame& frame) {
  const double scale = mu_max(frame);
  if (scale == 0.0) return 0.0;
  const auto& l = frame.eigenvalues;
  return std::min(l[0] - l[1], l[1] - l[2]) / scale;
}

Sym3 reconstruct(const EigenFrame& frame) {
  Sym3 out;
  for (std::size_t i = 0; i < 3; ++i) out = out + frame.eigenvalues[i] * outer(frame.eigenvectors[i]);
  return out;
}

}  // namespace eulerlab
