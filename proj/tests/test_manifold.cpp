#include <cmath>
#include <random>

#include "doctest.h"
#include "geore/manifold.hpp"
#include "geore/rng.hpp"

using namespace geore;
using namespace geore::manifold;

namespace {

PseudoPoint random_point(const Signature& sig, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec raw(static_cast<std::size_t>(sig.dim()));
  for (double& x : raw) x = u(rng);
  raw[0] += raw[0] >= 0 ? 0.5 : -0.5;
  return project_to_manifold(raw, sig);
}

}  // namespace

TEST_CASE("pseudo inner product signs") {
  const Signature sig(2, 1, -1.0);
  CHECK(pseudo_inner({1, 0, 0}, {1, 0, 0}, sig) == -1.0);
  CHECK(pseudo_inner({0, 1, 0}, {0, 1, 0}, sig) == 1.0);

  // random pair against a direct loop with explicit signs
  std::mt19937_64 rng = rng_stream(1, "inner");
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Signature s6(3, 3, -1.0);
  Vec x(6), y(6);
  for (int i = 0; i < 6; ++i) {
    x[static_cast<std::size_t>(i)] = u(rng);
    y[static_cast<std::size_t>(i)] = u(rng);
  }
  double manual = 0.0;
  for (int i = 0; i < 6; ++i) manual += (i < 3 ? -1.0 : 1.0) * x[i] * y[i];
  CHECK(pseudo_inner(x, y, s6) == doctest::Approx(manual).epsilon(1e-14));
}

TEST_CASE("sphere projection and its inverse") {
  const Signature sig(1, 2, -1.0);
  const Vec x = {3.0, 4.0, 0.0};
  const Vec z = sphere_project(x, sig);
  CHECK(z[0] == doctest::Approx(0.6));
  CHECK(z[1] == doctest::Approx(0.8));
  CHECK(z[2] == 0.0);

  const Vec back = sphere_unproject(z, sig);
  CHECK(pseudo_inner(back, back, sig) == doctest::Approx(-1.0).epsilon(1e-12));

  // identity on points already on the manifold
  std::mt19937_64 rng = rng_stream(2, "psi");
  const PseudoPoint p = random_point(sig, rng);
  const Vec rt = sphere_unproject(sphere_project(p.coords, sig), sig);
  for (std::size_t i = 0; i < rt.size(); ++i)
    CHECK(rt[i] == doctest::Approx(p.coords[i]).epsilon(1e-12));

  CHECK_THROWS_AS(sphere_project(Vec{0.0, 0.0, 1.0}, sig), Error);
  CHECK_THROWS_AS(sphere_unproject(Vec{2.0, 0.0, 0.0}, sig), Error);
}

TEST_CASE("double projection lands on the manifold") {
  const Signature sig(1, 2, -1.0);
  const PseudoPoint p = project_to_manifold({2.0, 0.0, 1.0}, sig);
  CHECK(p.coords[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(p.coords[1] == 0.0);
  CHECK(p.coords[2] == 1.0);
  CHECK(constraint_residual(p) < 1e-9);

  std::mt19937_64 rng = rng_stream(3, "proj");
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int it = 0; it < 50; ++it) {
    Vec raw = {u(rng), u(rng), u(rng), u(rng), u(rng)};
    const Signature s(2, 3, -2.25);
    const PseudoPoint q = project_to_manifold(raw, s);
    CHECK(constraint_residual(q) < 1e-9);
    // idempotent on manifold points
    const PseudoPoint q2 = project_to_manifold(q.coords, s);
    for (std::size_t i = 0; i < q.coords.size(); ++i)
      CHECK(q2.coords[i] == doctest::Approx(q.coords[i]).epsilon(1e-12));
  }
}

TEST_CASE("zero-time guard perturbs only degenerate inputs") {
  const Signature sig(2, 2, -1.0);
  std::mt19937_64 rng = rng_stream(4, "guard");
  Vec zero_time = {0.0, 0.0, 1.0, 2.0};
  perturb_zero_time(zero_time, sig, rng);
  CHECK((zero_time[0] != 0.0 || zero_time[1] != 0.0));
  CHECK(std::fabs(zero_time[0]) <= 0.02);
  Vec fine = {0.5, 0.0, 1.0, 2.0};
  const Vec before = fine;
  perturb_zero_time(fine, sig, rng);
  CHECK(fine == before);
}

TEST_CASE("table exp and log maps") {
  std::mt19937_64 rng = rng_stream(5, "explog");
  std::uniform_real_distribution<double> u(-0.4, 0.4);

  SUBCASE("zero tangent and coincident points") {
    const Vec xe = {1.0, 2.0};
    CHECK(exp_map(MapKind::Euclidean, xe, {0.0, 0.0}, 0.0) == xe);
    CHECK(log_map(MapKind::Euclidean, xe, xe, 0.0) == Vec{0.0, 0.0});

    Vec xs = {1.0, 0.0, 0.0};
    CHECK(exp_map(MapKind::Sphere, xs, {0.0, 0.0, 0.0}, 1.0) == xs);
    for (double c : log_map(MapKind::Sphere, xs, xs, 1.0)) CHECK(c == 0.0);

    Vec xh = {1.0, 0.0, 0.0};
    CHECK(exp_map(MapKind::Hyperboloid, xh, {0.0, 0.0, 0.0}, -1.0) == xh);
    for (double c : log_map(MapKind::Hyperboloid, xh, xh, -1.0)) CHECK(c == 0.0);
  }

  SUBCASE("round trips at random small tangents") {
    for (int it = 0; it < 30; ++it) {
      const double K = 2.0;
      Vec x = {1.0 / std::sqrt(K), 0.0, 0.0};
      Vec v = {0.0, u(rng), u(rng)};
      const Vec y = exp_map(MapKind::Sphere, x, v, K);
      CHECK(dot(y, y) == doctest::Approx(1.0 / K).epsilon(1e-10));
      const Vec rt = log_map(MapKind::Sphere, x, y, K);
      for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(rt[i] == doctest::Approx(v[i]).epsilon(1e-6));

      const double Kh = -1.0;
      Vec xh = {1.0, 0.0, 0.0};
      Vec vh = {0.0, u(rng), u(rng)};
      const Vec yh = exp_map(MapKind::Hyperboloid, xh, vh, Kh);
      CHECK(lorentz_inner(yh, yh) == doctest::Approx(-1.0).epsilon(1e-10));
      const Vec rth = log_map(MapKind::Hyperboloid, xh, yh, Kh);
      for (std::size_t i = 0; i < vh.size(); ++i)
        CHECK(rth[i] == doctest::Approx(vh[i]).epsilon(1e-6));
    }
  }

  SUBCASE("domain violations beyond the slack raise") {
    const Vec x = {1.0, 0.0};
    CHECK_THROWS_AS(log_map(MapKind::Sphere, x, {2.0, 0.0}, 1.0), Error);
    CHECK_THROWS_AS(exp_map(MapKind::Sphere, x, {0.1, 0.0}, -1.0), Error);
    CHECK_THROWS_AS(exp_map(MapKind::Hyperboloid, x, {0.1, 0.0}, 1.0), Error);
  }
}

TEST_CASE("diffeomorphic exp and log") {
  std::mt19937_64 rng = rng_stream(6, "diffeo");
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  const Signature sig(2, 3, -1.0);
  const PseudoPoint o = south_pole(sig);

  SUBCASE("zero tangent fixes the pole") {
    const PseudoPoint y = diffeo_exp(o, TangentVec{o, Vec(5, 0.0)});
    for (std::size_t i = 0; i < y.coords.size(); ++i)
      CHECK(y.coords[i] == doctest::Approx(o.coords[i]).epsilon(1e-14));
  }

  SUBCASE("round trip at the pole") {
    for (int it = 0; it < 30; ++it) {
      Vec dir(5);
      for (double& x : dir) x = u(rng);
      dir[0] = 0.0;  // tangent at the pole: first time coordinate fixed
      const TangentVec v{o, dir};
      const PseudoPoint y = diffeo_exp(o, v);
      CHECK(constraint_residual(y) < 1e-9);
      const TangentVec back = diffeo_log(o, y);
      CHECK(tangency_residual(back) < 1e-9);  // tangent space shared at the pole
      for (std::size_t i = 0; i < dir.size(); ++i)
        CHECK(back.dir[i] == doctest::Approx(dir[i]).epsilon(1e-6));
    }
  }

  SUBCASE("pure-time tangents follow the circular geodesic formula") {
    for (int it = 0; it < 20; ++it) {
      Vec dir(5, 0.0);
      dir[1] = u(rng);
      dir[2] = u(rng);
      const PseudoPoint y = diffeo_exp(o, TangentVec{o, dir});
      const double q = -pseudo_inner(dir, dir, sig);
      const double lam = std::sqrt(q);
      for (std::size_t i = 0; i < dir.size(); ++i) {
        const double ref =
            std::cos(lam) * o.coords[i] + (lam > 0 ? std::sin(lam) * dir[i] / lam : 0.0);
        CHECK(y.coords[i] == doctest::Approx(ref).epsilon(1e-9));
      }
    }
  }

  SUBCASE("non-pole reference points are rejected") {
    std::mt19937_64 r2 = rng_stream(7, "diffeo2");
    const PseudoPoint x = random_point(sig, r2);
    CHECK_THROWS_AS(diffeo_exp(x, TangentVec{x, Vec(5, 0.0)}), Error);
  }
}

TEST_CASE("parallel transport") {
  std::mt19937_64 rng = rng_stream(8, "transport");
  const Signature sig(3, 2, -1.0);

  auto random_tangent = [&](const PseudoPoint& x) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(x.coords.size());
    for (double& c : v) c = u(rng);
    const double a = pseudo_inner(v, x.coords, sig) / pseudo_inner(x.coords, x.coords, sig);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= a * x.coords[i];
    return TangentVec{x, v};
  };

  for (int it = 0; it < 50; ++it) {
    const PseudoPoint x = random_point(sig, rng);
    const PseudoPoint y = random_point(sig, rng);
    const TangentVec z1 = random_tangent(x), z2 = random_tangent(x);

    const TangentVec same = parallel_transport(x, x, z1);
    for (std::size_t i = 0; i < z1.dir.size(); ++i)
      CHECK(same.dir[i] == doctest::Approx(z1.dir[i]).epsilon(1e-12));

    const TangentVec p1 = parallel_transport(x, y, z1);
    const TangentVec p2 = parallel_transport(x, y, z2);
    const double before = pseudo_inner(z1.dir, z2.dir, sig);
    const double after = pseudo_inner(p1.dir, p2.dir, sig);
    CHECK(std::fabs(after - before) / std::max(1.0, std::fabs(before)) < 1e-6);
    CHECK(tangency_residual(p1) < 1e-8);
  }

  // broken pair: transports to the antipode instead
  const PseudoPoint x = random_point(sig, rng);
  const PseudoPoint anti = antipode(x);
  const TangentVec z = random_tangent(x);
  const TangentVec moved = parallel_transport(x, anti, z);
  CHECK(tangency_residual(moved) < 1e-8);
}

TEST_CASE("geodesic exp inverts the log and carries bias translations") {
  std::mt19937_64 rng = rng_stream(19, "pexp");
  const Signature sig(3, 2, -1.0);
  for (int it = 0; it < 40; ++it) {
    const PseudoPoint x = random_point(sig, rng);
    const PseudoPoint y = random_point(sig, rng);
    if (pseudo_inner(x.coords, y.coords, sig) >= -sig.beta - 1e-6) continue;
    const PseudoPoint back = pseudo_exp(x, pseudo_log(x, y));
    for (std::size_t i = 0; i < y.coords.size(); ++i)
      CHECK(back.coords[i] == doctest::Approx(y.coords[i]).epsilon(1e-8));
  }

  // bias translation: zero bias is the identity, outputs stay on the
  // manifold, and broken points route through the antipodal branch
  const PseudoPoint o = south_pole(sig);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int it = 0; it < 30; ++it) {
    const PseudoPoint h = random_point(sig, rng);
    Vec bias(o.coords.size());
    for (double& c : bias) c = u(rng);
    const double a = pseudo_inner(bias, o.coords, sig) / sig.beta;
    for (std::size_t i = 0; i < bias.size(); ++i) bias[i] -= a * o.coords[i];

    const PseudoPoint same = bias_translate(h, Vec(o.coords.size(), 0.0));
    for (std::size_t i = 0; i < h.coords.size(); ++i)
      CHECK(same.coords[i] == doctest::Approx(h.coords[i]).epsilon(1e-9));

    const PseudoPoint moved = bias_translate(h, bias);
    CHECK(constraint_residual(moved) < 1e-8);
    const PseudoPoint moved_anti = bias_translate(antipode(o), bias);
    CHECK(constraint_residual(moved_anti) < 1e-8);
  }
}

TEST_CASE("layout permutation carries the canonical invariant") {
  const int p = 4, q = 2;
  std::mt19937_64 rng = rng_stream(20, "layout");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Signature canonical(p, q, -1.0);
  for (int it = 0; it < 20; ++it) {
    Vec raw(p + q);
    for (double& c : raw) c = u(rng);
    raw[p] += raw[p] >= 0 ? 0.4 : -0.4;
    const Vec on = ultra_normalize(raw, p, q, 1.0);
    const PseudoPoint canon{canonical, ultra_to_canonical(on, p, q)};
    CHECK(constraint_residual(canon) < 1e-9);
    const Vec rt = canonical_to_ultra(canon.coords, p, q);
    CHECK(rt == on);
  }
}

TEST_CASE("broken geodesic distance") {
  std::mt19937_64 rng = rng_stream(9, "broken");
  for (const Signature& sig : {Signature(3, 2, -1.0), Signature(2, 2, -4.0)}) {
    for (int it = 0; it < 30; ++it) {
      const PseudoPoint x = random_point(sig, rng);
      const PseudoPoint y = random_point(sig, rng);
      CHECK(broken_distance(x, x) == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(broken_distance(x, antipode(x)) ==
            doctest::Approx(M_PI * sig.alpha()).epsilon(1e-12));
      CHECK(broken_distance(x, y) == doctest::Approx(broken_distance(y, x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("Manhattan-like distance in the space-first layout") {
  const int p = 4, q = 2;
  const double alpha = 1.0;
  std::mt19937_64 rng = rng_stream(10, "manhattan");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand_ultra = [&]() {
    Vec raw(p + q);
    for (double& x : raw) x = u(rng);
    raw[p] += raw[p] >= 0 ? 0.4 : -0.4;
    return ultra_normalize(raw, p, q, alpha);
  };

  for (int it = 0; it < 40; ++it) {
    const Vec x = rand_ultra(), y = rand_ultra();
    CHECK(manhattan_distance(x, x, p, q, alpha) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(manhattan_distance(x, y, p, q, alpha) ==
          doctest::Approx(manhattan_distance(y, x, p, q, alpha)).epsilon(1e-12));
    if (manhattan_distance(x, y, p, q, alpha) < 1e-9)
      for (int i = 0; i < p + q; ++i) CHECK(std::fabs(x[i] - y[i]) <= 1e-7);
  }

  // fiber pair: identical space parts, time parts rotated by a known angle
  const Vec x = rand_ultra();
  Vec y = x;
  const double phi = 0.9;
  const double a0 = y[p], a1 = y[p + 1];
  y[p] = std::cos(phi) * a0 - std::sin(phi) * a1;
  y[p + 1] = std::sin(phi) * a0 + std::cos(phi) * a1;
  const double tn = block_norm(x, p, p + q);
  CHECK(manhattan_distance(x, y, p, q, alpha) == doctest::Approx(tn * phi).epsilon(1e-9));

  // the printed fiber projection at the same point is the identity (alpha=1)
  const Vec rho = fiber_project(x, x, p, q, alpha);
  for (int i = 0; i < p + q; ++i) CHECK(rho[i] == doctest::Approx(x[i]).epsilon(1e-12));
}
