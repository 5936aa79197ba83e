#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rkflab/mat.hpp"
#include "rkflab/rng.hpp"

using namespace rkflab;

namespace {

Matrix random_spd(int n, RandomStream& rng, double jitter = 0.5) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  Matrix spd = mat_mul(a, transpose(a));
  for (int i = 0; i < n; ++i) spd(i, i) += jitter;
  return spd;
}

}  // namespace

TEST_CASE("cholesky reconstructs the input") {
  RandomStream rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 4);
    const Matrix a = random_spd(n, rng);
    Matrix lower;
    REQUIRE(cholesky(a, lower));
    const Matrix rebuilt = mat_mul(lower, transpose(lower));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(rebuilt(i, j) == doctest::Approx(a(i, j)).epsilon(1e-10));
  }
}

TEST_CASE("cholesky rejects indefinite matrices") {
  Matrix a(2, 2, 0.0);
  a(0, 0) = 1.0;
  a(1, 1) = -1.0;
  Matrix lower;
  CHECK_FALSE(cholesky(a, lower));
}

TEST_CASE("chol_solve solves against dense multiply") {
  RandomStream rng(7);
  const Matrix a = random_spd(4, rng);
  Matrix lower;
  REQUIRE(cholesky(a, lower));
  Vector b(4);
  for (int i = 0; i < 4; ++i) b[i] = rng.normal();
  const Vector x = chol_solve(lower, b);
  const Vector back = mat_vec(a, x);
  for (int i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(b[i]).epsilon(1e-10));
}

TEST_CASE("cholesky_with_jitter throws on a hopeless matrix") {
  Matrix zero(2, 2, 0.0);
  CHECK_THROWS_AS(cholesky_with_jitter(zero), SingularInnovation);
}

TEST_CASE("cholesky_with_jitter rescues a barely indefinite matrix") {
  Matrix a(2, 2, 0.0);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  a(0, 1) = a(1, 0) = 1.0 + 1e-14;  // slightly past singular
  const Matrix lower = cholesky_with_jitter(a);
  CHECK(lower(0, 0) > 0.0);
  CHECK(lower(1, 1) > 0.0);
}

TEST_CASE("det_small closed forms") {
  Matrix a1(1, 1, 3.5);
  CHECK(det_small(a1) == 3.5);
  Matrix a2(2, 2);
  a2(0, 0) = 2.0;
  a2(0, 1) = 1.0;
  a2(1, 0) = 0.5;
  a2(1, 1) = 3.0;
  CHECK(det_small(a2) == doctest::Approx(5.5));
  Matrix a3(3, 3, 0.0);
  a3(0, 0) = 1.0;
  a3(1, 1) = 2.0;
  a3(2, 2) = 3.0;
  a3(0, 2) = 4.0;
  CHECK(det_small(a3) == doctest::Approx(6.0));
  Matrix a4(4, 4, 0.0);
  CHECK_THROWS_AS(det_small(a4), DimensionMismatch);
}

TEST_CASE("symmetrize and congruence keep exact symmetry") {
  RandomStream rng(3);
  Matrix a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = rng.normal();
  const Matrix s = symmetrize(a);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(s(i, j) == s(j, i));

  const Matrix p = random_spd(4, rng);
  Matrix f(2, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) f(i, j) = rng.normal();
  const Matrix c = congruence_const(f, p, nullptr);
  CHECK(c(0, 1) == c(1, 0));
  // against the straightforward product
  const Matrix ref = mat_mul(mat_mul(f, p), transpose(f));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(c(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-12));
}

TEST_CASE("min_eigen_sym matches hand cases") {
  Matrix d(3, 3, 0.0);
  d(0, 0) = 4.0;
  d(1, 1) = -0.5;
  d(2, 2) = 2.0;
  CHECK(min_eigen_sym(d) == doctest::Approx(-0.5));

  Matrix r(2, 2);
  r(0, 0) = 2.0;
  r(1, 1) = 2.0;
  r(0, 1) = r(1, 0) = 1.0;  // eigenvalues 1 and 3
  CHECK(min_eigen_sym(r) == doctest::Approx(1.0));
}

TEST_CASE("affine_map and mul_const helpers match dense algebra") {
  RandomStream rng(11);
  Matrix c(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) c(i, j) = rng.normal();
  Vector x(4);
  for (int i = 0; i < 4; ++i) x[i] = rng.normal();
  Vector bias(3);
  for (int i = 0; i < 3; ++i) bias[i] = rng.normal();
  const Vector y = affine_map(c, x, &bias);
  const Vector ref = vec_add(mat_vec(c, x), bias);
  for (int i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-14));

  Matrix p(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) p(i, j) = rng.normal();
  const Matrix lhs = mul_const_left(c, p);
  const Matrix lhs_ref = mat_mul(c, p);
  const Matrix rhs = mul_const_right(p, transpose(c));
  const Matrix rhs_ref = mat_mul(p, transpose(c));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) CHECK(lhs(i, j) == doctest::Approx(lhs_ref(i, j)));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) CHECK(rhs(i, j) == doctest::Approx(rhs_ref(i, j)));
}
