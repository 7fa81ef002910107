#include <doctest.h>

#include <cmath>
#include <random>

#include "eulerlab/eigenframe.hpp"
#include "eulerlab/errors.hpp"

using namespace eulerlab;

namespace {

Sym3 random_sym(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Sym3 s;
  for (double& c : s.c) c = d(rng);
  return s;
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Vec3 a{d(rng), d(rng), d(rng)};
  a *= 1.0 / norm(a);
  Vec3 b{d(rng), d(rng), d(rng)};
  b -= dot(a, b) * a;
  b *= 1.0 / norm(b);
  return Mat3::from_columns(a, b, cross(a, b));
}

double det(const Sym3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(1, 2)) - m(0, 1) * (m(0, 1) * m(2, 2) - m(1, 2) * m(0, 2)) +
         m(0, 2) * (m(0, 1) * m(1, 2) - m(1, 1) * m(0, 2));
}

double second_invariant(const Sym3& m) {
  return m(0, 0) * m(1, 1) + m(1, 1) * m(2, 2) + m(0, 0) * m(2, 2) - m(0, 1) * m(0, 1) - m(0, 2) * m(0, 2) -
         m(1, 2) * m(1, 2);
}

void check_orthonormal_right_handed(const EigenFrame& f) {
  for (int i = 0; i < 3; ++i) {
    CHECK(norm(f.eigenvectors[i]) == doctest::Approx(1.0).epsilon(1e-14));
    for (int j = i + 1; j < 3; ++j) CHECK(std::abs(dot(f.eigenvectors[i], f.eigenvectors[j])) < 1e-12);
  }
  CHECK(dot(cross(f.eigenvectors[0], f.eigenvectors[1]), f.eigenvectors[2]) == doctest::Approx(1.0).epsilon(1e-12));
}

}  // namespace

TEST_CASE("eigenvalues match the characteristic polynomial invariants") {
  std::mt19937_64 rng(20240607);
  for (int s = 0; s < 100; ++s) {
    const Sym3 m = random_sym(rng);
    const EigenFrame f = decompose(m);
    const auto& l = f.eigenvalues;
    CHECK(l[0] >= l[1]);
    CHECK(l[1] >= l[2]);
    CHECK(std::abs(l[0] + l[1] + l[2] - m.trace()) < 1e-13);
    CHECK(std::abs(l[0] * l[1] + l[1] * l[2] + l[0] * l[2] - second_invariant(m)) < 1e-13);
    CHECK(std::abs(l[0] * l[1] * l[2] - det(m)) < 1e-13);
    for (double lam : l) CHECK(std::abs(det(m - lam * Sym3::identity())) < 1e-12);
  }
}

TEST_CASE("eigenpairs reconstruct the tensor") {
  std::mt19937_64 rng(7);
  for (int s = 0; s < 100; ++s) {
    const Sym3 m = random_sym(rng);
    const EigenFrame f = decompose(m);
    check_orthonormal_right_handed(f);
    for (int i = 0; i < 3; ++i) {
      const Vec3 r = m * f.eigenvectors[i] - f.eigenvalues[i] * f.eigenvectors[i];
      CHECK(norm(r) < 1e-12 * frobenius(m));
    }
    CHECK(frobenius(reconstruct(f) - m) < 1e-13 * frobenius(m));
  }
}

TEST_CASE("sign convention: largest component of the first two vectors is positive") {
  std::mt19937_64 rng(11);
  for (int s = 0; s < 50; ++s) {
    const EigenFrame f = decompose(random_sym(rng));
    for (int i = 0; i < 2; ++i) {
      const Vec3& v = f.eigenvectors[i];
      std::size_t big = 0;
      for (std::size_t c = 1; c < 3; ++c)
        if (std::abs(v[c]) > std::abs(v[big])) big = c;
      CHECK(v[big] > 0.0);
    }
  }
}

TEST_CASE("rotation equivariance") {
  std::mt19937_64 rng(99);
  for (int s = 0; s < 50; ++s) {
    const Sym3 m = random_sym(rng);
    const Mat3 r = random_rotation(rng);
    const EigenFrame a = decompose(m);
    const EigenFrame b = decompose(rotate(r, m));
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) < 1e-12);
      const Vec3& v = a.eigenvectors[i];
      const Vec3 rv{dot(Vec3{r(0, 0), r(0, 1), r(0, 2)}, v), dot(Vec3{r(1, 0), r(1, 1), r(1, 2)}, v),
                    dot(Vec3{r(2, 0), r(2, 1), r(2, 2)}, v)};
      CHECK(std::abs(std::abs(dot(rv, b.eigenvectors[i])) - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("axisymmetric strain diag(2,-1,-1)") {
  const Sym3 m = Sym3::diagonal(2.0, -1.0, -1.0);
  const EigenFrame f = decompose(m, FrameSource::strain);
  CHECK(f.source == FrameSource::strain);
  CHECK(f.used_fallback);
  CHECK(f.eigenvalues[0] == doctest::Approx(2.0));
  CHECK(f.eigenvalues[1] == doctest::Approx(-1.0));
  CHECK(f.eigenvalues[2] == doctest::Approx(-1.0));
  CHECK(std::abs(f.eigenvectors[0][0] - 1.0) < 1e-15);
  check_orthonormal_right_handed(f);

  const AlignmentMetrics a = alignment(m, Vec3{3.0, 0.0, 0.0});
  CHECK(a.best_index == 0);
  CHECK(a.best_cosine() == doctest::Approx(1.0));
  CHECK(a.rayleigh == doctest::Approx(2.0));
  CHECK(a.residual == 0.0);
  CHECK(is_aligned(a, kAlignToleranceSynthetic));
  CHECK(mu_max(f) == doctest::Approx(2.0));
}

TEST_CASE("nearly degenerate spectra use the fallback and stay accurate") {
  std::mt19937_64 rng(5);
  const Mat3 r = random_rotation(rng);
  const Sym3 m = rotate(r, Sym3::diagonal(1.0, 1.0 + 1e-12, -3.0));
  const EigenFrame f = decompose(m);
  CHECK(f.used_fallback);
  check_orthonormal_right_handed(f);
  CHECK(frobenius(reconstruct(f) - m) < 1e-13 * frobenius(m));
  CHECK(relative_gap(f) < 1e-9);
}

TEST_CASE("zero and isotropic tensors") {
  const EigenFrame z = decompose(Sym3{});
  CHECK(mu_max(z) == 0.0);
  check_orthonormal_right_handed(z);
  const EigenFrame iso = decompose(3.0 * Sym3::identity());
  for (double l : iso.eigenvalues) CHECK(l == doctest::Approx(3.0));
  check_orthonormal_right_handed(iso);
}

TEST_CASE("misaligned vector geometry") {
  const Sym3 m = Sym3::diagonal(1.0, 0.0, -1.0);
  const Vec3 w{1.0, 1.0, 0.0};
  const AlignmentMetrics a = alignment(m, w);
  CHECK(a.cosines[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(a.cosines[1] == doctest::Approx(std::sqrt(0.5)));
  CHECK(a.cosines[2] == doctest::Approx(0.0));
  CHECK(a.rayleigh == doctest::Approx(0.5));
  // M w = (1,0,0), M w - 0.5 w = (0.5,-0.5,0).
  CHECK(a.residual == doctest::Approx(std::sqrt(0.5)));
  CHECK_FALSE(is_aligned(a, kAlignToleranceMeasured));
}

TEST_CASE("contract violations") {
  CHECK_THROWS_AS(alignment(Sym3::identity(), Vec3{}), ContractViolation);
  Mat3 asym;
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(decompose(asym), ContractViolation);
  Sym3 bad;
  bad.c[0] = std::nan("");
  CHECK_THROWS_AS(decompose(bad), ContractViolation);
  Mat3 sym;
  sym(0, 1) = sym(1, 0) = 2.0;
  const EigenFrame f = decompose(sym);
  CHECK(f.eigenvalues[0] == doctest::Approx(2.0));
  CHECK(f.eigenvalues[2] == doctest::Approx(-2.0));
}
