#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace eulerlab {

struct Vec3 {
  std::array<double, 3> v{0.0, 0.0, 0.0};

  constexpr Vec3() = default;
  constexpr Vec3(double a, double b, double c) : v{a, b, c} {}

  constexpr double& operator[](std::size_t i) { return v[i]; }
  constexpr double operator[](std::size_t i) const { return v[i]; }

  constexpr Vec3& operator+=(const Vec3& o) {
    for (std::size_t i = 0; i < 3; ++i) v[i] += o.v[i];
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    for (std::size_t i = 0; i < 3; ++i) v[i] -= o.v[i];
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    for (double& x : v) x *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(Vec3 a) { return a *= -1.0; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Symmetric 3x3 tensor stored as (11, 22, 33, 12, 13, 23).
struct Sym3 {
  std::array<double, 6> c{0, 0, 0, 0, 0, 0};

  static constexpr std::size_t index(std::size_t i, std::size_t j) {
    if (i == j) return i;
    if (i > j) {
      const std::size_t t = i;
      i = j;
      j = t;
    }
    return i == 0 ? (j == 1 ? 3 : 4) : 5;
  }

  constexpr double operator()(std::size_t i, std::size_t j) const { return c[index(i, j)]; }
  constexpr double& at(std::size_t i, std::size_t j) { return c[index(i, j)]; }

  static constexpr Sym3 identity() { return Sym3{{1, 1, 1, 0, 0, 0}}; }
  static constexpr Sym3 diagonal(double a, double b, double d) { return Sym3{{a, b, d, 0, 0, 0}}; }

  constexpr double trace() const { return c[0] + c[1] + c[2]; }
  friend constexpr bool operator==(const Sym3&, const Sym3&) = default;
};

constexpr Vec3 operator*(const Sym3& m, const Vec3& x) {
  return {m(0, 0) * x[0] + m(0, 1) * x[1] + m(0, 2) * x[2],
          m(1, 0) * x[0] + m(1, 1) * x[1] + m(1, 2) * x[2],
          m(2, 0) * x[0] + m(2, 1) * x[1] + m(2, 2) * x[2]};
}

/// Double contraction M:M.
constexpr double contract(const Sym3& a, const Sym3& b) {
  return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2] +
         2.0 * (a.c[3] * b.c[3] + a.c[4] * b.c[4] + a.c[5] * b.c[5]);
}

/// Frobenius norm.
inline double frobenius(const Sym3& m) { return std::sqrt(contract(m, m)); }

/// Rank-one tensor v v^T.
constexpr Sym3 outer(const Vec3& a) {
  return Sym3{{a[0] * a[0], a[1] * a[1], a[2] * a[2], a[0] * a[1], a[0] * a[2], a[1] * a[2]}};
}

constexpr Sym3 operator+(Sym3 a, const Sym3& b) {
  for (std::size_t i = 0; i < 6; ++i) a.c[i] += b.c[i];
  return a;
}
constexpr Sym3 operator-(Sym3 a, const Sym3& b) {
  for (std::size_t i = 0; i < 6; ++i) a.c[i] -= b.c[i];
  return a;
}
constexpr Sym3 operator*(double s, Sym3 a) {
  for (double& x : a.c) x *= s;
  return a;
}

/// General 3x3 matrix, row-major. Used for rotations and frames.
struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  constexpr double operator()(std::size_t i, std::size_t j) const { return m[i][j]; }
  constexpr double& operator()(std::size_t i, std::size_t j) { return m[i][j]; }

  static constexpr Mat3 from_columns(const Vec3& a, const Vec3& b, const Vec3& c) {
    Mat3 r;
    for (std::size_t i = 0; i < 3; ++i) {
      r.m[i][0] = a[i];
      r.m[i][1] = b[i];
      r.m[i][2] = c[i];
    }
    return r;
  }
  constexpr Vec3 column(std::size_t j) const { return {m[0][j], m[1][j], m[2][j]}; }
};

constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

constexpr Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) r.m[i][j] = a.m[j][i];
  return r;
}

/// R M R^T, symmetrised.
constexpr Sym3 rotate(const Mat3& r, const Sym3& s) {
  Mat3 full;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) full.m[i][j] = s(i, j);
  const Mat3 out = r * full * transpose(r);
  Sym3 res;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j) res.at(i, j) = 0.5 * (out.m[i][j] + out.m[j][i]);
  return res;
}

}  // namespace eulerlab
