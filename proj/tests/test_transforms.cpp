#include <cmath>
#include <random>

#include "doctest.h"
#include "geore/manifold.hpp"
#include "geore/rng.hpp"
#include "geore/transforms.hpp"

using namespace geore;
using namespace geore::transforms;

TEST_CASE("Givens blocks") {
  const Mat r0 = givens_block(0.0, GivensKind::Rotation);
  CHECK(max_abs_diff(r0, Mat::identity(2)) == 0.0);

  const Mat f0 = givens_block(0.0, GivensKind::Reflection);
  CHECK(f0(0, 0) == 1.0);
  CHECK(f0(1, 1) == -1.0);
  CHECK(f0(0, 1) == 0.0);

  std::mt19937_64 rng = rng_stream(21, "givens");
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int it = 0; it < 50; ++it)
    for (GivensKind k : {GivensKind::Rotation, GivensKind::Reflection}) {
      const Mat g = givens_block(ang(rng), k);
      CHECK(max_abs_diff(g.transposed() * g, Mat::identity(2)) < 1e-12);
    }
}

TEST_CASE("block-diagonal assembly") {
  const int p = 4, q = 2, d = p + q;
  const Vec zeros(d / 2, 0.0);
  CHECK(max_abs_diff(build_U(zeros), Mat::identity(d)) == 0.0);

  const Mat v0 = build_V(zeros);
  for (int i = 0; i < d; ++i) CHECK(v0(i, i) == (i % 2 == 0 ? 1.0 : -1.0));

  std::mt19937_64 rng = rng_stream(22, "uv");
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int it = 0; it < 30; ++it) {
    Vec theta(d / 2), phi(d / 2);
    for (double& a : theta) a = ang(rng);
    for (double& a : phi) a = ang(rng);
    CHECK(max_abs_diff(build_U(theta).transposed() * build_U(theta), Mat::identity(d)) < 1e-10);
    CHECK(max_abs_diff(build_V(phi).transposed() * build_V(phi), Mat::identity(d)) < 1e-10);
  }
}

TEST_CASE("hyperbolic rotation matrix") {
  const int p = 4, q = 2;
  CHECK(max_abs_diff(build_H(Vec(q, 0.0), p, q), Mat::identity(p + q)) == 0.0);

  std::mt19937_64 rng = rng_stream(23, "h");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Mat J = signature_matrix(p, q);
  for (int it = 0; it < 30; ++it) {
    Vec mu(q);
    for (double& m : mu) m = u(rng);
    for (double m : mu)
      CHECK(std::fabs(std::cosh(m) * std::cosh(m) - std::sinh(m) * std::sinh(m) - 1.0) < 1e-12);
    const Mat H = build_H(mu, p, q);
    CHECK(max_abs_diff(H.transposed() * J * H, J) < 1e-9);
  }
  CHECK_THROWS_AS(build_H(Vec(3, 0.0), p, q), Error);
}

TEST_CASE("relation application") {
  const int p = 4, q = 2, d = p + q;
  std::mt19937_64 rng = rng_stream(24, "fr");
  std::uniform_real_distribution<double> ang(-M_PI, M_PI), u(-1.0, 1.0);

  SUBCASE("all-zero parameters reduce to the reflection at angle zero") {
    const UltraRelParams rel(p, q, Vec(d / 2, 0.0), Vec(d / 2, 0.0), Vec(q, 0.0));
    const Vec x = {1, 2, 3, 4, 5, 6};
    const Vec y = apply_relation(rel, x);
    const Vec expected = {1, -2, 3, -4, 5, -6};  // V at angle 0 flips odd coordinates
    for (int i = 0; i < d; ++i) CHECK(y[i] == doctest::Approx(expected[i]));
    const Vec dense = build_dense(rel) * x;
    for (int i = 0; i < d; ++i) CHECK(y[i] == doctest::Approx(dense[i]).epsilon(1e-14));
  }

  SUBCASE("blockwise equals dense and preserves the bilinear form") {
    const Mat J = signature_matrix(p, q);
    for (int it = 0; it < 100; ++it) {
      Vec theta(d / 2), phi(d / 2), mu(q);
      for (double& a : theta) a = ang(rng);
      for (double& a : phi) a = ang(rng);
      for (double& a : mu) a = 0.5 * u(rng);
      const UltraRelParams rel(p, q, theta, phi, mu);
      const Mat F = build_dense(rel);
      CHECK(max_abs_diff(F.transposed() * J * F, J) < 1e-9);

      Vec x(d);
      for (double& c : x) c = u(rng);
      const Vec fast = apply_relation(rel, x);
      const Vec dense = F * x;
      for (int i = 0; i < d; ++i) CHECK(std::fabs(fast[i] - dense[i]) < 1e-12);

      // transformed manifold points stay on the manifold
      const Vec on = manifold::ultra_normalize(x, p, q, 1.0);
      const Vec fon = apply_relation(rel, on);
      double form = 0.0;
      for (int i = 0; i < d; ++i) form += (i < p ? 1.0 : -1.0) * fon[i] * fon[i];
      CHECK(std::fabs(form + 1.0) < 1e-8);
    }
  }

  SUBCASE("reflection-only relations square to the identity") {
    std::uniform_int_distribution<int> flip(0, 1);
    for (int it = 0; it < 20; ++it) {
      Vec phi(d / 2);
      for (double& a : phi) a = flip(rng) ? 0.0 : -M_PI;
      const UltraRelParams rel(p, q, Vec(d / 2, 0.0), phi, Vec(q, 0.0));
      Vec x(d);
      for (double& c : x) c = u(rng);
      const Vec twice = apply_relation(rel, apply_relation(rel, x));
      for (int i = 0; i < d; ++i) CHECK(twice[i] == doctest::Approx(x[i]).epsilon(1e-9));
    }
  }

  SUBCASE("dimension and signature validation") {
    CHECK_THROWS_AS(UltraRelParams(2, 4, Vec(3, 0.0), Vec(3, 0.0), Vec(4, 0.0)), Error);  // q > p
    CHECK_THROWS_AS(UltraRelParams(3, 2, Vec(2, 0.0), Vec(2, 0.0), Vec(2, 0.0)), Error);  // odd p
    CHECK_THROWS_AS(UltraRelParams(4, 2, Vec(2, 0.0), Vec(3, 0.0), Vec(2, 0.0)), Error);
    const UltraRelParams rel(p, q, Vec(d / 2, 0.0), Vec(d / 2, 0.0), Vec(q, 0.0));
    CHECK_THROWS_AS(apply_relation(rel, Vec(d + 1, 0.0)), Error);
  }
}
