#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geore/drivers.hpp"
#include "geore/eval.hpp"
#include "geore/models.hpp"
#include "geore/numerics.hpp"
#include "geore/rng.hpp"

// Property suites behind `verify`: geometry (manifold + algebra identities),
// patterns (the relation-pattern constructions), soundness (box-model
// guarantees) and gradients (every model loss against the finite-difference
// oracle). All suites are deterministic.

namespace geore {
namespace verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

struct Suite {
  std::vector<CheckResult> results;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    results.push_back({name, ok, detail});
  }

  void residual(const std::string& name, double worst, double tol) {
    std::ostringstream os;
    os << "worst " << worst << " (tol " << tol << ")";
    results.push_back({name, worst <= tol, os.str()});
  }
};

inline Vec random_vec(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline manifold::PseudoPoint random_point(const manifold::Signature& sig, std::mt19937_64& rng) {
  Vec raw = random_vec(static_cast<std::size_t>(sig.dim()), rng);
  double tn = 0.0;
  for (int i = 0; i < sig.time; ++i) tn += raw[i] * raw[i];
  if (tn < 1e-4) raw[0] += 0.5;
  return manifold::project_to_manifold(raw, sig);
}

// Random tangent at x: project an ambient vector onto T_x with the
// pseudo-metric (v - <v,x>/<x,x> x).
inline manifold::TangentVec random_tangent(const manifold::PseudoPoint& x, std::mt19937_64& rng,
                                           double scale = 1.0) {
  Vec v = random_vec(x.coords.size(), rng, -scale, scale);
  const double c =
      manifold::pseudo_inner(v, x.coords, x.sig) / manifold::pseudo_inner(x.coords, x.coords, x.sig);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * x.coords[i];
  return manifold::TangentVec{x, v};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// geometry + algebra

inline std::vector<CheckResult> suite_geometry() {
  using namespace manifold;
  detail::Suite s;
  std::mt19937_64 rng = rng_stream(7, "verify-geometry");

  const std::vector<Signature> sigs = {Signature(3, 2, -1.0), Signature(4, 3, -2.25),
                                       Signature(2, 1, -1.0)};

  {  // psi round trips and the projection constraint
    double worst_rt = 0.0, worst_con = 0.0;
    for (const auto& sig : sigs)
      for (int it = 0; it < 50; ++it) {
        const PseudoPoint p = detail::random_point(sig, rng);
        const Vec rt = sphere_unproject(sphere_project(p.coords, sig), sig);
        for (std::size_t i = 0; i < rt.size(); ++i)
          worst_rt = std::max(worst_rt, std::fabs(rt[i] - p.coords[i]));
        // psi o psi^{-1} on the product manifold side
        Vec z = sphere_project(detail::random_vec(static_cast<std::size_t>(sig.dim()), rng), sig);
        const Vec z2 = sphere_project(sphere_unproject(z, sig), sig);
        for (std::size_t i = 0; i < z.size(); ++i)
          worst_rt = std::max(worst_rt, std::fabs(z2[i] - z[i]));
        worst_con = std::max(worst_con, constraint_residual(p));
      }
    s.residual("geom/psi-roundtrip", worst_rt, 1e-9);
    s.residual("geom/projection-constraint", worst_con, 1e-9);
  }

  {  // table exp/log round trips
    double worst = 0.0;
    for (int it = 0; it < 60; ++it) {
      // Euclidean
      {
        Vec x = detail::random_vec(4, rng), v = detail::random_vec(4, rng, -0.5, 0.5);
        Vec rt = log_map(MapKind::Euclidean, x, exp_map(MapKind::Euclidean, x, v, 0.0), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i)
          worst = std::max(worst, std::fabs(rt[i] - v[i]));
      }
      // Sphere of curvature K > 0
      {
        const double K = 0.5 + 1.5 * (it % 3);
        Vec x = detail::random_vec(4, rng);
        const double n = norm2(x);
        for (double& c : x) c /= n * std::sqrt(K);
        Vec v = detail::random_vec(4, rng, -0.3, 0.3);
        const double proj = dot(v, x) / dot(x, x);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * x[i];
        Vec y = exp_map(MapKind::Sphere, x, v, K);
        Vec rt = log_map(MapKind::Sphere, x, y, K);
        for (std::size_t i = 0; i < v.size(); ++i)
          worst = std::max(worst, std::fabs(rt[i] - v[i]) / std::max(1.0, std::fabs(v[i])));
        Vec zero = log_map(MapKind::Sphere, x, x, K);
        for (double c : zero) worst = std::max(worst, std::fabs(c));
      }
      // Hyperboloid of curvature K < 0
      {
        const double K = -1.0 - (it % 2);
        Vec sp = detail::random_vec(3, rng, -0.8, 0.8);
        Vec x(4);
        const double r2 = -1.0 / K;
        x[0] = std::sqrt(r2 + sp[0] * sp[0] + sp[1] * sp[1] + sp[2] * sp[2]);
        for (int i = 0; i < 3; ++i) x[i + 1] = sp[i];
        Vec v = detail::random_vec(4, rng, -0.3, 0.3);
        const double proj = lorentz_inner(v, x) / lorentz_inner(x, x);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * x[i];
        Vec y = exp_map(MapKind::Hyperboloid, x, v, K);
        Vec rt = log_map(MapKind::Hyperboloid, x, y, K);
        for (std::size_t i = 0; i < v.size(); ++i)
          worst = std::max(worst, std::fabs(rt[i] - v[i]) / std::max(1.0, std::fabs(v[i])));
      }
    }
    s.residual("geom/explog-roundtrip", worst, 1e-6);
  }

  {  // diffeomorphic maps at zero-space reference points
    double worst = 0.0, worst_time = 0.0;
    for (const auto& sig : sigs) {
      const PseudoPoint o = south_pole(sig);
      for (int it = 0; it < 40; ++it) {
        TangentVec v = detail::random_tangent(o, rng, 0.4);
        const PseudoPoint y = diffeo_exp(o, v);
        worst = std::max(worst, constraint_residual(y));
        const TangentVec back = diffeo_log(o, y);
        for (std::size_t i = 0; i < v.dir.size(); ++i)
          worst = std::max(worst,
                           std::fabs(back.dir[i] - v.dir[i]) / std::max(1.0, std::fabs(v.dir[i])));
      }
      // pure-time tangents follow the circular closed-form geodesic
      for (int it = 0; it < 20 && sig.time >= 2; ++it) {
        TangentVec v = detail::random_tangent(o, rng, 0.4);
        for (int i = sig.time; i < sig.dim(); ++i) v.dir[i] = 0.0;
        const PseudoPoint y = diffeo_exp(o, v);
        const double q = -pseudo_inner(v.dir, v.dir, sig);  // timelike: positive
        const double lam = std::sqrt(q) / sig.alpha();
        Vec ref(o.coords.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
          ref[i] = std::cos(lam) * o.coords[i] +
                   (lam > 1e-15 ? std::sin(lam) * v.dir[i] / lam : 0.0);
        for (std::size_t i = 0; i < ref.size(); ++i)
          worst_time = std::max(worst_time, std::fabs(y.coords[i] - ref[i]));
      }
      // zero tangent fixes the pole
      const PseudoPoint same = diffeo_exp(o, TangentVec{o, Vec(o.coords.size(), 0.0)});
      for (std::size_t i = 0; i < same.coords.size(); ++i)
        worst = std::max(worst, std::fabs(same.coords[i] - o.coords[i]));
    }
    s.residual("geom/diffeo-roundtrip", worst, 1e-6);
    s.residual("geom/diffeo-pure-time-geodesic", worst_time, 1e-9);
  }

  {  // parallel transport: metric preservation, tangency, identity at y=x
    double worst_metric = 0.0, worst_tan = 0.0, worst_id = 0.0;
    for (const auto& sig : sigs) {
      for (int it = 0; it < 60; ++it) {
        const PseudoPoint x = detail::random_point(sig, rng);
        PseudoPoint y = detail::random_point(sig, rng);
        const TangentVec z1 = detail::random_tangent(x, rng);
        const TangentVec z2 = detail::random_tangent(x, rng);
        const TangentVec p1 = parallel_transport(x, y, z1);
        const TangentVec p2 = parallel_transport(x, y, z2);
        const double before = pseudo_inner(z1.dir, z2.dir, sig);
        const double after = pseudo_inner(p1.dir, p2.dir, sig);
        worst_metric =
            std::max(worst_metric, std::fabs(after - before) / std::max(1.0, std::fabs(before)));
        worst_tan = std::max(worst_tan, tangency_residual(p1));
        const TangentVec back = parallel_transport(x, x, z1);
        for (std::size_t i = 0; i < z1.dir.size(); ++i)
          worst_id = std::max(worst_id, std::fabs(back.dir[i] - z1.dir[i]));
      }
    }
    s.residual("geom/transport-metric", worst_metric, 1e-6);
    s.residual("geom/transport-tangency", worst_tan, 1e-8);
    s.residual("geom/transport-identity", worst_id, 1e-12);
  }

  {  // broken distance
    double worst_anti = 0.0, worst_sym = 0.0, worst_self = 0.0;
    for (const auto& sig : sigs)
      for (int it = 0; it < 40; ++it) {
        const PseudoPoint x = detail::random_point(sig, rng);
        const PseudoPoint y = detail::random_point(sig, rng);
        worst_anti = std::max(worst_anti, std::fabs(broken_distance(x, antipode(x)) -
                                                    M_PI * sig.alpha()));
        worst_sym = std::max(worst_sym,
                             std::fabs(broken_distance(x, y) - broken_distance(y, x)));
        worst_self = std::max(worst_self, broken_distance(x, x));
      }
    s.residual("geom/broken-antipodal", worst_anti, 1e-9);
    s.residual("geom/broken-symmetry", worst_sym, 1e-9);
    s.residual("geom/broken-self", worst_self, 1e-12);
  }

  {  // Manhattan-like distance (space-first layout)
    const int p = 4, q = 2;
    const double alpha = 1.0;
    double worst_self = 0.0, worst_sym = 0.0, worst_fiber = 0.0;
    bool indiscernible = true;
    auto rand_ultra = [&](std::mt19937_64& r) {
      Vec raw = detail::random_vec(p + q, r);
      raw[p] += raw[p] >= 0 ? 0.3 : -0.3;
      return manifold::ultra_normalize(raw, p, q, alpha);
    };
    for (int it = 0; it < 80; ++it) {
      const Vec x = rand_ultra(rng), y = rand_ultra(rng);
      worst_self = std::max(worst_self, manhattan_distance(x, x, p, q, alpha));
      worst_sym = std::max(worst_sym, std::fabs(manhattan_distance(x, y, p, q, alpha) -
                                                manhattan_distance(y, x, p, q, alpha)));
      double md = 0.0;
      for (int i = 0; i < p + q; ++i) md = std::max(md, std::fabs(x[i] - y[i]));
      if (manhattan_distance(x, y, p, q, alpha) < 1e-9 && md > 1e-7) indiscernible = false;
      // fiber pair: same space part, rotated time part
      Vec z = x;
      const double c = std::cos(0.7), sn = std::sin(0.7);
      const double a0 = z[p], a1 = z[p + 1];
      z[p] = c * a0 - sn * a1;
      z[p + 1] = sn * a0 + c * a1;
      const double tn = manifold::block_norm(x, p, p + q);
      worst_fiber = std::max(worst_fiber,
                             std::fabs(manhattan_distance(x, z, p, q, alpha) - tn * 0.7));
    }
    s.residual("geom/manhattan-self", worst_self, 1e-9);
    s.residual("geom/manhattan-symmetry", worst_sym, 1e-12);
    s.residual("geom/manhattan-fiber-leg", worst_fiber, 1e-9);
    s.check("geom/manhattan-indiscernibles", indiscernible);
  }

  // ----- algebra -----
  using namespace transforms;
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);

  {
    double worst = 0.0;
    for (int it = 0; it < 100; ++it)
      for (GivensKind k : {GivensKind::Rotation, GivensKind::Reflection}) {
        const Mat g = givens_block(ang(rng), k);
        worst = std::max(worst, max_abs_diff(g.transposed() * g, Mat::identity(2)));
      }
    s.residual("alg/givens-orthogonality", worst, 1e-12);
  }

  {
    double worst_uv = 0.0, worst_cs = 0.0, worst_hj = 0.0, worst_j = 0.0, worst_block = 0.0,
           worst_manifold = 0.0;
    const int p = 6, q = 4, d = p + q;
    const Mat J = signature_matrix(p, q);
    for (int it = 0; it < 100; ++it) {
      Vec theta(d / 2), phi(d / 2), mu(q);
      for (double& a : theta) a = ang(rng);
      for (double& a : phi) a = ang(rng);
      for (double& a : mu) a = ang(rng) * 0.3;
      const Mat U = build_U(theta), V = build_V(phi), H = build_H(mu, p, q);
      worst_uv = std::max(worst_uv, max_abs_diff(U.transposed() * U, Mat::identity(d)));
      worst_uv = std::max(worst_uv, max_abs_diff(V.transposed() * V, Mat::identity(d)));
      for (double m : mu)
        worst_cs = std::max(worst_cs, std::fabs(std::cosh(m) * std::cosh(m) -
                                                std::sinh(m) * std::sinh(m) - 1.0));
      worst_hj = std::max(worst_hj, max_abs_diff(H.transposed() * J * H, J));
      const UltraRelParams rel(p, q, theta, phi, mu);
      const Mat F = build_dense(rel);
      worst_j = std::max(worst_j, max_abs_diff(F.transposed() * J * F, J));
      const Vec x = detail::random_vec(static_cast<std::size_t>(d), rng);
      const Vec fx = apply_relation(rel, x);
      const Vec fx_dense = F * x;
      for (int i = 0; i < d; ++i)
        worst_block = std::max(worst_block, std::fabs(fx[i] - fx_dense[i]));
      Vec on = manifold::ultra_normalize(x, p, q, 1.0);
      const Vec fon = apply_relation(rel, on);
      const double before = manifold::pseudo_inner_t(on, on, 0) -
                            2.0 * manifold::block_dot(on, on, p, d);
      const double after = manifold::pseudo_inner_t(fon, fon, 0) -
                           2.0 * manifold::block_dot(fon, fon, p, d);
      worst_manifold = std::max(worst_manifold, std::fabs(after - before));
    }
    s.residual("alg/uv-orthogonality", worst_uv, 1e-10);
    s.residual("alg/cosh-sinh-identity", worst_cs, 1e-12);
    s.residual("alg/h-j-orthogonality", worst_hj, 1e-9);
    s.residual("alg/j-orthogonality", worst_j, 1e-9);
    s.residual("alg/blockwise-vs-dense", worst_block, 1e-12);
    s.residual("alg/manifold-preservation", worst_manifold, 1e-8);
  }

  {
    using namespace hypercomplex;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rnd = [&]() { return HNum<double>(u(rng), u(rng), u(rng), u(rng)); };
    const HNum<double> one = HNum<double>::one();
    const HNum<double> I(0, 1, 0, 0), Jv(0, 0, 1, 0), K(0, 0, 0, 1);
    auto hdiff = [&](const HNum<double>& a, const HNum<double>& b) {
      return std::max({std::fabs(a.s - b.s), std::fabs(a.x - b.x), std::fabs(a.y - b.y),
                       std::fabs(a.z - b.z)});
    };

    double unit_worst = 0.0;
    for (Algebra k : {Algebra::Quaternion, Algebra::Hyperbolic, Algebra::Split}) {
      const HNum<double> q = rnd();
      unit_worst = std::max(unit_worst, hdiff(hamilton(one, q, k), q));
      unit_worst = std::max(unit_worst, hdiff(hamilton(q, one, k), q));
      // ij = k = -ji in every kind
      unit_worst = std::max(unit_worst, hdiff(hamilton(I, Jv, k), K));
      HNum<double> mk(0, 0, 0, -1);
      unit_worst = std::max(unit_worst, hdiff(hamilton(Jv, I, k), mk));
    }
    // quaternion: jk = i, ki = j, i^2 = -1; split: j^2 = +1, jk = -i
    unit_worst = std::max(unit_worst, hdiff(hamilton(Jv, K, Algebra::Quaternion), I));
    unit_worst = std::max(unit_worst, hdiff(hamilton(K, I, Algebra::Quaternion), Jv));
    unit_worst = std::max(
        unit_worst, hdiff(hamilton(I, I, Algebra::Quaternion), HNum<double>(-1, 0, 0, 0)));
    unit_worst = std::max(
        unit_worst, hdiff(hamilton(Jv, Jv, Algebra::Split), HNum<double>(1, 0, 0, 0)));
    unit_worst = std::max(unit_worst,
                          hdiff(hamilton(Jv, K, Algebra::Split), HNum<double>(0, -1, 0, 0)));
    unit_worst = std::max(
        unit_worst, hdiff(hamilton(I, I, Algebra::Hyperbolic), HNum<double>(1, 0, 0, 0)));
    s.residual("alg/hamilton-tables", unit_worst, 0.0);

    double worst_mult = 0.0, worst_dist = 0.0, worst_assoc = 0.0, worst_rotor = 0.0;
    for (int it = 0; it < 200; ++it) {
      const HNum<double> a = rnd(), b = rnd(), c = rnd();
      for (Algebra k : {Algebra::Quaternion, Algebra::Split}) {
        const double lhs = hnorm(hamilton(a, b, k), k);
        const double rhs = hnorm(a, k) * hnorm(b, k);
        worst_mult = std::max(worst_mult, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs)));
      }
      for (Algebra k : {Algebra::Quaternion, Algebra::Hyperbolic, Algebra::Split}) {
        const HNum<double> bc = b + c;
        worst_dist = std::max(
            worst_dist, hdiff(hamilton(a, bc, k), hamilton(a, b, k) + hamilton(a, c, k)));
        worst_dist = std::max(
            worst_dist, hdiff(hamilton(bc, a, k), hamilton(b, a, k) + hamilton(c, a, k)));
      }
      worst_assoc = std::max(
          worst_assoc,
          hdiff(hamilton(hamilton(a, b, Algebra::Quaternion), c, Algebra::Quaternion),
                 hamilton(a, hamilton(b, c, Algebra::Quaternion), Algebra::Quaternion)));
      const HNum<double> r = hnormalize_rotor(a);
      worst_rotor =
          std::max(worst_rotor, std::fabs(hnorm(r, Algebra::Quaternion) - 1.0));
      const double rotated = hnorm(hamilton(b, r, Algebra::Quaternion), Algebra::Quaternion);
      worst_rotor = std::max(worst_rotor,
                             std::fabs(rotated - hnorm(b, Algebra::Quaternion)));
    }
    s.residual("alg/norm-multiplicativity", worst_mult, 1e-9);
    s.residual("alg/distributivity", worst_dist, 1e-10);
    s.residual("alg/quaternion-associativity", worst_assoc, 1e-10);
    s.residual("alg/rotor-normalization", worst_rotor, 1e-9);
  }

  return s.results;
}

// ---------------------------------------------------------------------------
// patterns

namespace detail {

inline double wrap_angle(double a) {
  while (a >= M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

// A two-entity ShrinkE instance with hand-planted relation parameters.
struct PlantedShrink {
  models::ShrinkEModel model;
  Vec params;

  PlantedShrink(int n_rel, int d) : model(2, n_rel, d) { params.assign(model.num_params(), 0.0); }

  void set_entity(int e, const Vec& v) {
    std::copy(v.begin(), v.end(),
              params.begin() + model.off_ent + static_cast<std::size_t>(e) * model.d);
  }
  void set_theta(int r, const Vec& th) {
    std::copy(th.begin(), th.end(),
              params.begin() + model.off_theta + static_cast<std::size_t>(r) * (model.d / 2));
  }
  void set_translation(int r, const Vec& b) {
    std::copy(b.begin(), b.end(),
              params.begin() + model.off_b + static_cast<std::size_t>(r) * model.d);
  }
  void set_delta(int r, const Vec& dl) {
    std::copy(dl.begin(), dl.end(),
              params.begin() + model.off_delta + static_cast<std::size_t>(r) * model.d);
  }
  Vec rotate(int r, const Vec& x) const {
    Vec out(x.size());
    for (int k = 0; k < model.d / 2; ++k) {
      const double th = params[model.off_theta + static_cast<std::size_t>(r) * (model.d / 2) + k];
      const double c = std::cos(th), sn = std::sin(th);
      out[2 * k] = c * x[2 * k] - sn * x[2 * k + 1];
      out[2 * k + 1] = sn * x[2 * k] + c * x[2 * k + 1];
    }
    return out;
  }
  double score(int h, int r, int t) const {
    return model.score(params, models::HyperIdFact{{h, r, t}, {}});
  }
  boxes::Box span(int h, int r) const { return model.query_box(params, h, r, {}); }
};

}  // namespace detail

inline std::vector<CheckResult> suite_patterns() {
  detail::Suite s;
  std::mt19937_64 rng = rng_stream(11, "verify-patterns");
  std::uniform_real_distribution<double> ang(-M_PI, M_PI), u(-1.0, 1.0);

  // ----- relation-transform constructions -----
  {
    const int p = 6, q = 4, d = p + q;
    double worst_sym = 0.0, worst_inv = 0.0, worst_comp = 0.0;
    std::uniform_int_distribution<int> flip(0, 1);
    for (int it = 0; it < 50; ++it) {
      // symmetry: Phi in {0, -pi}, U = I, H = I -> applying twice is identity
      Vec phi(d / 2), zero(d / 2, 0.0), mu0(q, 0.0);
      for (double& a : phi) a = flip(rng) ? 0.0 : -M_PI;
      const transforms::UltraRelParams sym(p, q, zero, phi, mu0);
      const Vec x = detail::random_vec(static_cast<std::size_t>(d), rng);
      const Vec xx = transforms::apply_relation(sym, transforms::apply_relation(sym, x));
      for (int i = 0; i < d; ++i) worst_sym = std::max(worst_sym, std::fabs(xx[i] - x[i]));

      // inversion: Theta1 + Theta2 = 0 -> the rotations cancel
      Vec th1(d / 2), th2(d / 2);
      for (int i = 0; i < d / 2; ++i) {
        th1[i] = ang(rng);
        th2[i] = -th1[i];
      }
      Vec y = x;
      transforms::apply_angle_blocks(y, th1, transforms::GivensKind::Rotation);
      transforms::apply_angle_blocks(y, th2, transforms::GivensKind::Rotation);
      for (int i = 0; i < d; ++i) worst_inv = std::max(worst_inv, std::fabs(y[i] - x[i]));

      // composition: Theta1 = Theta2 + Theta3 (mod 2 pi)
      Vec th3(d / 2), comp(d / 2);
      for (int i = 0; i < d / 2; ++i) {
        th3[i] = ang(rng);
        comp[i] = detail::wrap_angle(th2[i] + th3[i]);
      }
      Vec lhs = x, rhs = x;
      transforms::apply_angle_blocks(lhs, comp, transforms::GivensKind::Rotation);
      transforms::apply_angle_blocks(rhs, th2, transforms::GivensKind::Rotation);
      transforms::apply_angle_blocks(rhs, th3, transforms::GivensKind::Rotation);
      for (int i = 0; i < d; ++i) worst_comp = std::max(worst_comp, std::fabs(lhs[i] - rhs[i]));
    }
    s.residual("pat/relation-symmetry", worst_sym, 1e-9);
    s.residual("pat/relation-inversion", worst_inv, 1e-9);
    s.residual("pat/relation-composition", worst_comp, 1e-9);
  }

  // ----- hyper-relational box constructions -----
  {
    const int d = 8;
    std::uniform_int_distribution<int> flip(0, 1);
    double worst_sym = 0.0, worst_inv = 0.0, worst_comp = 0.0;
    bool anti_ok = true, impl_ok = true, excl_ok = true, inter_ok = true;
    for (int it = 0; it < 40; ++it) {
      detail::PlantedShrink ps(4, d);
      ps.set_entity(0, detail::random_vec(d, rng));
      Vec th_sym(d / 2);
      for (double& a : th_sym) a = flip(rng) ? 0.0 : -M_PI;
      ps.set_theta(0, th_sym);
      ps.set_entity(1, detail::random_vec(d, rng));
      worst_sym = std::max(worst_sym, std::fabs(ps.score(0, 0, 1) - ps.score(1, 0, 0)));

      // anti-symmetry at a generic angle: a perfectly satisfied triple whose
      // reverse scores strictly worse
      detail::PlantedShrink pa(1, d);
      Vec th_gen(d / 2, M_PI / 3.0);
      pa.set_theta(0, th_gen);
      const Vec e0 = detail::random_vec(d, rng);
      pa.set_entity(0, e0);
      pa.set_entity(1, pa.rotate(0, e0));
      if (!(pa.score(0, 0, 1) > pa.score(1, 0, 0) + 1e-6)) anti_ok = false;
      worst_inv = std::max(worst_inv, std::fabs(pa.score(0, 0, 1)));

      // inversion: Theta2 = -Theta1; a satisfied triple satisfies its inverse
      detail::PlantedShrink pi(2, d);
      Vec t1(d / 2), t2(d / 2);
      for (int i = 0; i < d / 2; ++i) {
        t1[i] = ang(rng);
        t2[i] = -t1[i];
      }
      pi.set_theta(0, t1);
      pi.set_theta(1, t2);
      pi.set_entity(0, e0);
      pi.set_entity(1, pi.rotate(0, e0));
      worst_inv = std::max(worst_inv, std::fabs(pi.score(0, 0, 1) - pi.score(1, 1, 0)));

      // composition: Theta1 = Theta2 + Theta3
      detail::PlantedShrink pc(3, d);
      Vec c2(d / 2), c3(d / 2), c1(d / 2);
      for (int i = 0; i < d / 2; ++i) {
        c2[i] = ang(rng);
        c3[i] = ang(rng);
        c1[i] = detail::wrap_angle(c2[i] + c3[i]);
      }
      pc.set_theta(0, c1);
      pc.set_theta(1, c2);
      pc.set_theta(2, c3);
      pc.set_entity(0, e0);
      pc.set_entity(1, pc.rotate(2, pc.rotate(1, e0)));
      worst_comp = std::max(worst_comp, std::fabs(pc.score(0, 0, 1)));

      // implication: delta_r1 <= delta_r2 with shared rotation/translation
      detail::PlantedShrink pm(3, d);
      Vec th = detail::random_vec(d / 2, rng), b = detail::random_vec(d, rng);
      Vec d2 = detail::random_vec(d, rng, -1.0, 2.0), d1(d), d3(d);
      for (int i = 0; i < d; ++i) {
        d1[i] = d2[i] - std::fabs(u(rng));
        d3[i] = std::min(d1[i], d2[i]) - std::fabs(u(rng));
      }
      for (int r = 0; r < 3; ++r) {
        pm.set_theta(r, th);
        pm.set_translation(r, b);
      }
      pm.set_delta(0, d1);
      pm.set_delta(1, d2);
      pm.set_delta(2, d3);
      pm.set_entity(0, detail::random_vec(d, rng));
      const boxes::Box b1 = pm.span(0, 0), b2 = pm.span(0, 1), b3 = pm.span(0, 2);
      if (!boxes::box_in_box(b1, b2)) impl_ok = false;
      if (!boxes::box_in_box(b3, boxes::box_intersection(b1, b2))) inter_ok = false;

      // exclusion: same spans translated far apart intersect emptily
      detail::PlantedShrink pe(2, d);
      pe.set_theta(0, th);
      pe.set_theta(1, th);
      pe.set_delta(0, d1);
      pe.set_delta(1, d1);
      pe.set_translation(0, b);
      Vec b_far = b;
      b_far[0] += 50.0;
      pe.set_translation(1, b_far);
      pe.set_entity(0, detail::random_vec(d, rng));
      if (!boxes::is_empty(boxes::box_intersection(pe.span(0, 0), pe.span(0, 1)))) excl_ok = false;
    }
    s.residual("pat/shrink-symmetry", worst_sym, 1e-9);
    s.check("pat/shrink-antisymmetry", anti_ok);
    s.residual("pat/shrink-inversion", worst_inv, 1e-9);
    s.residual("pat/shrink-composition", worst_comp, 1e-9);
    s.check("pat/shrink-implication", impl_ok);
    s.check("pat/shrink-exclusion", excl_ok);
    s.check("pat/shrink-intersection", inter_ok);
  }

  // ----- qualifier monotonicity over random facts and qualifier subsets -----
  // The box containment Box(full) subset-of Box(partial) is exact in every
  // configuration. The score-level reading is checked at the model's working
  // width (d=200): in very low dimensions an asymmetric shrink can re-center
  // the box onto the tail and raise the score, a property of the printed
  // distance, not of this implementation.
  {
    std::size_t violations = 0, containment_violations = 0;
    const int cases = 1000;
    models::ShrinkEModel model(12, 6, 200);
    Vec params;
    std::mt19937_64 init_rng = rng_stream(13, "monotonicity-init");
    model.init(params, init_rng);
    std::uniform_int_distribution<int> ent(0, model.n_ent - 1), rel(0, model.n_rel - 1),
        nq(1, 4);
    for (int it = 0; it < cases; ++it) {
      models::HyperIdFact full;
      full.primal = {ent(rng), rel(rng), ent(rng)};
      const int m = nq(rng);
      for (int i = 0; i < m; ++i) full.qualifiers.emplace_back(rel(rng), ent(rng));
      models::HyperIdFact part = full;
      part.qualifiers.clear();
      std::uniform_int_distribution<int> keep(0, 1);
      for (const auto& qv : full.qualifiers)
        if (keep(rng)) part.qualifiers.push_back(qv);
      const double f_full = model.score(params, full);
      const double f_part = model.score(params, part);
      if (f_part < f_full) ++violations;
      const auto box_full = model.query_box(params, full.primal.h, full.primal.r, full.qualifiers);
      const auto box_part = model.query_box(params, part.primal.h, part.primal.r, part.qualifiers);
      for (int i = 0; i < model.d; ++i)
        if (box_full.lo[i] < box_part.lo[i] || box_full.hi[i] > box_part.hi[i])
          ++containment_violations;
    }
    std::ostringstream os;
    os << violations << " score violations over " << cases
       << " random (fact, subset) pairs at d=200";
    s.check("pat/shrink-monotonicity", violations == 0, os.str());
    std::ostringstream os2;
    os2 << containment_violations << " corner violations over " << cases << " pairs";
    s.check("pat/shrink-qualifier-containment", containment_violations == 0, os2.str());
  }

  // ----- nested-fact pattern matrices -----
  {
    using namespace hypercomplex;
    const int hd = 2;
    auto rnd_hv = [&](std::mt19937_64& r) {
      HVec<double> v(hd);
      std::uniform_real_distribution<double> q(-1.0, 1.0);
      for (auto& e : v) e = HNum<double>(q(r), q(r), q(r), q(r));
      return v;
    };
    auto zero_hv = [&]() { return HVec<double>(hd, HNum<double>()); };
    auto one_hv = [&]() { return HVec<double>(hd, HNum<double>::one()); };
    auto neg_one_hv = [&]() { return HVec<double>(hd, HNum<double>(-1, 0, 0, 0)); };
    auto hv_diff = [&](const HVec<double>& a, const HVec<double>& b) {
      double w = 0.0;
      for (int i = 0; i < hd; ++i) {
        w = std::max(w, std::fabs(a[i].s - b[i].s));
        w = std::max(w, std::fabs(a[i].x - b[i].x));
        w = std::max(w, std::fabs(a[i].y - b[i].y));
        w = std::max(w, std::fabs(a[i].z - b[i].z));
      }
      return w;
    };
    auto ht_diff = [&](const HTriple<double>& a, const HTriple<double>& b) {
      return std::max({hv_diff(a[0], b[0]), hv_diff(a[1], b[1]), hv_diff(a[2], b[2])});
    };
    auto zero_mat = [&]() {
      HMat3<double> m;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = zero_hv();
      return m;
    };

    double worst = 0.0;
    for (Algebra kind : {Algebra::Quaternion, Algebra::Hyperbolic, Algebra::Split}) {
      for (int it = 0; it < 100; ++it) {
        const HVec<double> h = rnd_hv(rng), r = rnd_hv(rng), t = rnd_hv(rng), y = rnd_hv(rng);
        const HTriple<double> T{h, r, t};

        // R-symmetry: anti-diagonal with R22 = 1 swaps head and tail
        HMat3<double> rs = zero_mat();
        rs[0][2] = one_hv();
        rs[1][1] = one_hv();
        rs[2][0] = one_hv();
        worst = std::max(worst, ht_diff(hmat_rotate(T, rs, kind), HTriple<double>{t, r, h}));

        // R-inverse: R22 = -1 realizes r2 = -r1 in both directions
        HMat3<double> ri = rs;
        ri[1][1] = neg_one_hv();
        HVec<double> r2(hd);
        for (int i = 0; i < hd; ++i) r2[i] = HNum<double>(-r[i].s, -r[i].x, -r[i].y, -r[i].z);
        worst = std::max(worst, ht_diff(hmat_rotate(T, ri, kind), HTriple<double>{t, r2, h}));
        worst = std::max(worst,
                         ht_diff(hmat_rotate(HTriple<double>{t, r2, h}, ri, kind), T));

        // R-implication: diag(1, R22, 1) maps (x, r1, y) to (x, r1 x R22, y)
        HMat3<double> rm = zero_mat();
        rm[0][0] = one_hv();
        rm[2][2] = one_hv();
        rm[1][1] = rnd_hv(rng);
        const HVec<double> rimp = hv_hamilton(r, rm[1][1], kind);
        worst = std::max(worst, ht_diff(hmat_rotate(T, rm, kind), HTriple<double>{h, rimp, t}));

        // R-inverse-implication: anti-diagonal with free R22
        HMat3<double> rii = zero_mat();
        rii[0][2] = one_hv();
        rii[2][0] = one_hv();
        rii[1][1] = rnd_hv(rng);
        const HVec<double> rii_r = hv_hamilton(r, rii[1][1], kind);
        worst = std::max(worst, ht_diff(hmat_rotate(T, rii, kind), HTriple<double>{t, rii_r, h}));

        // E-implication: upper-left block moves the head for every tail y
        HMat3<double> em = zero_mat();
        em[0][0] = rnd_hv(rng);
        em[1][0] = rnd_hv(rng);
        em[1][1] = one_hv();
        em[2][2] = one_hv();
        const HVec<double> x2 =
            hv_add(hv_hamilton(h, em[0][0], kind), hv_hamilton(r, em[1][0], kind));
        worst = std::max(worst, ht_diff(hmat_rotate(HTriple<double>{h, r, y}, em, kind),
                                        HTriple<double>{x2, r, y}));

        // E-R-inverse-implication: anti-diagonal with entity/relation factors
        HMat3<double> eri = zero_mat();
        eri[0][2] = one_hv();
        eri[1][1] = rnd_hv(rng);
        eri[2][0] = rnd_hv(rng);
        const HVec<double> y2 = hv_hamilton(t, eri[2][0], kind);
        const HVec<double> er2 = hv_hamilton(r, eri[1][1], kind);
        worst = std::max(worst, ht_diff(hmat_rotate(T, eri, kind), HTriple<double>{y2, er2, h}));

        // dual E-implication: diagonal entity factors move both endpoints
        HMat3<double> dm = zero_mat();
        dm[0][0] = rnd_hv(rng);
        dm[1][1] = one_hv();
        dm[2][2] = rnd_hv(rng);
        const HVec<double> dy1 = hv_hamilton(h, dm[0][0], kind);
        const HVec<double> dy2 = hv_hamilton(t, dm[2][2], kind);
        worst = std::max(worst, ht_diff(hmat_rotate(T, dm, kind), HTriple<double>{dy1, r, dy2}));
      }
    }
    s.residual("pat/nested-matrices", worst, 1e-12);
  }

  return s.results;
}

// ---------------------------------------------------------------------------
// soundness

inline std::vector<CheckResult> suite_soundness() {
  using namespace boxes;
  detail::Suite s;
  std::mt19937_64 rng = rng_stream(17, "verify-soundness");
  std::uniform_real_distribution<double> u01(0.05, 0.95), wid(0.05, 0.3), mg(0.02, 0.1);
  const int d = 3;
  const double eps = 0.01, temp = 1.0;

  auto rand_box = [&]() {
    Vec lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      lo[i] = u01(rng) * 0.6;
      hi[i] = lo[i] + wid(rng);
    }
    return Box(lo, hi);
  };
  auto grow = [&](const Box& b) {
    Vec lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      lo[i] = b.lo[i] - mg(rng);
      hi[i] = b.hi[i] + mg(rng);
    }
    return Box(lo, hi);
  };

  const int trials = 50;
  {
    bool ok = true;
    for (int it = 0; it < trials; ++it) {
      const Box c = rand_box(), dd = grow(c);
      if (disjoint_soft(c, dd, temp) != 0.0) ok = false;
      if (!box_in_box(c, dd)) ok = false;
    }
    s.check("snd/nf1", ok, "loss 0 and subclass box inside superclass box");
  }
  {
    bool ok = true;
    for (int it = 0; it < trials; ++it) {
      Box c = rand_box();
      Box c2 = c;
      for (int i = 0; i < d; ++i) {  // overlap c on a corner
        c2.lo[i] = c.lo[i] + 0.4 * (c.hi[i] - c.lo[i]);
        c2.hi[i] = c.hi[i] + wid(rng);
      }
      const Box inter = box_intersection(c, c2);
      const Box e = grow(inter);
      if (disjoint_soft(inter, e, temp) != 0.0) ok = false;
      if (!box_in_box(inter, e)) ok = false;
    }
    s.check("snd/nf2", ok);
  }
  {
    bool ok = true;
    for (int it = 0; it < trials; ++it) {
      const Box c = rand_box();
      AffineRoleMap t;
      for (int i = 0; i < d; ++i) {
        t.scale.push_back(0.3 + u01(rng));
        t.shift.push_back(u01(rng) * 0.2 - 0.1);
      }
      const Box mapped = affine_map_box(t, c);
      const Box dd = grow(mapped);
      if (disjoint_soft(mapped, dd, temp) != 0.0) ok = false;
      if (!box_in_box(affine_map_box(t, c), dd)) ok = false;
      // NF4 with the inverse map
      const Box pre = affine_map_box_inverse(t, c);
      const Box d2 = grow(pre);
      if (disjoint_soft(pre, d2, temp) != 0.0) ok = false;
      if (!box_in_box(pre, d2)) ok = false;
      // round trip of the role map
      const Box rt = affine_map_box_inverse(t, affine_map_box(t, c));
      for (int i = 0; i < d; ++i)
        if (std::fabs(rt.lo[i] - c.lo[i]) > 1e-12 || std::fabs(rt.hi[i] - c.hi[i]) > 1e-12)
          ok = false;
    }
    s.check("snd/nf3-nf4", ok);
  }
  {
    bool ok = true;
    for (int it = 0; it < trials; ++it) {
      Box c = rand_box();
      c.hi[0] = c.lo[0] - 2.0 * eps;  // empty by more than eps in dim 0
      const double loss = std::max(0.0, c.hi[0] - c.lo[0] + eps);
      if (loss != 0.0 || !is_empty(c)) ok = false;
    }
    s.check("snd/nf1-bottom", ok);
  }
  {
    bool ok = true;
    for (int it = 0; it < trials; ++it) {
      const Box c = rand_box();
      Box c2 = rand_box();
      const double shift = c.hi[0] - c2.lo[0] + 2.0 * eps + mg(rng);
      c2.lo[0] += shift;
      c2.hi[0] += shift;
      const double num = modified_volume(box_intersection(c, c2), eps);
      const double loss = num / (modified_volume(c, eps) + modified_volume(c2, eps));
      if (loss != 0.0) ok = false;
      if (c2.lo[0] <= c.hi[0]) ok = false;  // truly disjoint as sets
    }
    s.check("snd/nf2-bottom", ok);
  }
  {
    bool ok = true;
    models::BoxELModel model(3, 2, 1, d);
    Vec params;
    model.init(params, rng);
    for (int it = 0; it < trials; ++it) {
      // concept assertion: interior point scores exactly zero
      const Box c = rand_box();
      Vec pt(d);
      for (int i = 0; i < d; ++i) pt[i] = 0.5 * (c.lo[i] + c.hi[i]);
      double loss = 0.0;
      for (int i = 0; i < d; ++i) {
        loss += sq(std::max(0.0, pt[i] - c.hi[i]));
        loss += sq(std::max(0.0, c.lo[i] - pt[i]));
      }
      if (loss != 0.0 || !point_in_box(pt, c)) ok = false;
      // role assertion: target constructed by the same affine arithmetic
      AffineRoleMap t;
      for (int i = 0; i < d; ++i) {
        t.scale.push_back(0.5 + u01(rng));
        t.shift.push_back(u01(rng) * 0.2);
      }
      Vec pa(d);
      for (int i = 0; i < d; ++i) pa[i] = u01(rng);
      const Vec pb = affine_apply(t, pa);
      Vec diff(d);
      double acc = 0.0;
      for (int i = 0; i < d; ++i) acc += sq(affine_apply(t, pa)[i] - pb[i]);
      if (sqrt_safe(acc) != 0.0) ok = false;
    }
    s.check("snd/abox", ok);
  }
  {
    // flagged inconsistent forms raise errors
    models::BoxELModel model(2, 1, 1, d);
    Vec params;
    model.init(params, rng);
    bool threw1 = false, threw2 = false;
    models::IdElAxiom bad1;
    bad1.form = data::ElForm::NF1Bot;
    bad1.c = models::ConceptRef{true, 0};
    try {
      model.axiom_loss(params, bad1);
    } catch (const Error&) {
      threw1 = true;
    }
    models::IdElAxiom bad2;
    bad2.form = data::ElForm::NF2Bot;
    bad2.c = models::ConceptRef{true, 0};
    bad2.c2 = models::ConceptRef{true, 0};
    try {
      model.axiom_loss(params, bad2);
    } catch (const Error&) {
      threw2 = true;
    }
    s.check("snd/inconsistent-axioms", threw1 && threw2);
  }
  {
    // Disjoint measurement lemma on the modified volume
    bool ok = true;
    for (int it = 0; it < 100; ++it) {
      const Box b1 = rand_box(), b2 = rand_box();
      const double dj = disjoint_measure(b1, b2, eps);
      if (dj < 0.0 || dj > 1.0 + 1e-12) ok = false;
      const Box inside = rand_box();
      if (disjoint_measure(inside, grow(inside), eps) != 0.0) ok = false;
    }
    s.check("snd/disjoint-lemma", ok);
  }

  // ----- constraint-ball guarantees -----
  {
    using namespace poincare;
    bool ok = true;
    double worst_orth = 0.0, worst_near = 0.0;
    std::uniform_real_distribution<double> cn(0.15, 0.9);
    for (int it = 0; it < 100; ++it) {
      Vec c = detail::random_vec(3, rng);
      const double n = norm2(c);
      const double target = cn(rng);
      for (double& x : c) x *= target / n;
      const EnclosingBall b = enclosing_ball(c);
      worst_orth = std::max(worst_orth,
                            std::fabs(dot(b.center, b.center) - (1.0 + b.radius * b.radius)));
      worst_near = std::max(worst_near, std::fabs(norm2(b.center) - b.radius - target));
      // membership at the center and at radius distance
      if (membership_loss(b.center, b) != 0.0) ok = false;
      if (std::fabs(nonmembership_loss(b.center, b) - b.radius) > 1e-12) ok = false;
    }
    // insideness iff: sampled points of the inner ball are inside the outer
    for (int it = 0; it < 50; ++it) {
      Vec c1 = detail::random_vec(3, rng), c2 = detail::random_vec(3, rng);
      for (Vec* c : {&c1, &c2}) {
        const double n = norm2(*c);
        const double t = cn(rng);
        for (double& x : *c) x *= t / n;
      }
      const EnclosingBall b1 = enclosing_ball(c1), b2 = enclosing_ball(c2);
      const double li = inside_loss(b1, b2);
      const bool geometric =
          norm2(Vec{b1.center[0] - b2.center[0], b1.center[1] - b2.center[1],
                    b1.center[2] - b2.center[2]}) +
              b1.radius <=
          b2.radius;
      if ((li == 0.0) != geometric) ok = false;
      const double ld = disjoint_loss(b1, b2);
      const bool apart =
          norm2(Vec{b1.center[0] - b2.center[0], b1.center[1] - b2.center[1],
                    b1.center[2] - b2.center[2]}) >= b1.radius + b2.radius;
      if ((ld == 0.0) != apart) ok = false;
      // transitivity bound
      const EnclosingBall b3 = enclosing_ball(detail::random_vec(3, rng, 0.1, 0.4));
      if (inside_loss(b1, b2) == 0.0 && inside_loss(b2, b3) == 0.0)
        if (inside_loss(b1, b3) > 0.0) ok = false;
    }
    s.residual("snd/ball-orthogonality", worst_orth, 1e-8);
    s.residual("snd/ball-nearest-point", worst_near, 1e-10);
    s.check("snd/ball-correctness", ok);
  }

  return s.results;
}

// ---------------------------------------------------------------------------
// gradients

namespace detail {

// Analytic batch gradient vs central differences at `points` random parameter
// points, with kink rejection (subgradients at max/abs boundaries differ
// legitimately; those coordinates are skipped by the non-convergence test).
struct GradProbe {
  double worst = 0.0;
  int points_checked = 0;
};

template <class Driver>
GradProbe probe_gradients(const Driver& drv, std::uint64_t seed, int points, double tol) {
  GradProbe probe;
  std::mt19937_64 rng = rng_stream(seed, "grad-suite");
  std::vector<int> batch(drv.count());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = static_cast<int>(i);
  Vec base;
  std::mt19937_64 init_rng = rng_stream(seed, "grad-init");
  drv.init(base, init_rng);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (int pt = 0; pt < points; ++pt) {
    Vec params = base;
    for (double& p : params) p += jitter(rng);
    drv.project(params);
    const std::uint64_t neg_state = rng();
    auto loss_at = [&](const Vec& p) {
      std::mt19937_64 r(neg_state);
      return drv.eval_loss(p, batch, r);
    };
    ad::Tape tape;
    std::vector<ad::Var> pv = tape.leaves(params);
    std::mt19937_64 r(neg_state);
    ad::Var loss = drv.batch_loss(tape, pv, batch, r);
    if (loss.tape() == nullptr) continue;  // constant loss at this point
    const Vec adj = tape.gradient(loss);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double hi = 1e-5 * std::max(1.0, std::fabs(params[i]));
      auto cd = [&](double step) {
        Vec p = params;
        p[i] += step;
        const double fp = loss_at(p);
        p[i] = params[i] - step;
        const double fm = loss_at(p);
        return (fp - fm) / (2.0 * step);
      };
      const double fd = cd(hi);
      const double rel =
          std::fabs(adj[i] - fd) / std::max({1.0, std::fabs(adj[i]), std::fabs(fd)});
      if (rel <= tol) continue;
      const double fd2 = cd(hi / 8.0);
      const double drift = std::fabs(fd - fd2) / std::max({1.0, std::fabs(fd), std::fabs(fd2)});
      if (drift > tol) continue;  // non-smooth point, rejected
      probe.worst = std::max(probe.worst, rel);
    }
    ++probe.points_checked;
  }
  return probe;
}

}  // namespace detail

inline std::vector<CheckResult> suite_gradients(int points = 20) {
  detail::Suite s;
  const double tol = 1e-4;
  std::mt19937_64 rng = rng_stream(23, "grad-data");
  std::uniform_int_distribution<int> e6(0, 5), r2(0, 1);

  {
    std::vector<models::IdTriple> facts;
    for (int i = 0; i < 8; ++i) facts.push_back({e6(rng), r2(rng), e6(rng)});
    drivers::UltraEDriver drv(models::UltraEModel(6, 2, 4, 2), std::move(facts), 2, 0.0);
    const auto p = detail::probe_gradients(drv, 101, points, tol);
    s.residual("grad/relational-manifold", p.worst, tol);
  }
  {
    std::vector<models::HyperIdFact> facts;
    std::uniform_int_distribution<int> r3(0, 2), nq(0, 2);
    for (int i = 0; i < 6; ++i) {
      models::HyperIdFact f;
      f.primal = {e6(rng), r3(rng), e6(rng)};
      const int m = nq(rng);
      for (int k = 0; k < m; ++k) f.qualifiers.emplace_back(r3(rng), e6(rng));
      facts.push_back(std::move(f));
    }
    drivers::ShrinkEDriver drv(models::ShrinkEModel(6, 3, 4), std::move(facts), 2, 0.1);
    const auto p = detail::probe_gradients(drv, 102, points, tol);
    s.residual("grad/hyper-relational", p.worst, tol);
  }
  {
    using hypercomplex::Algebra;
    for (Algebra kind : {Algebra::Quaternion, Algebra::Hyperbolic, Algebra::Split}) {
      std::vector<models::IdTriple> atomic;
      std::uniform_int_distribution<int> e5(0, 4);
      for (int i = 0; i < 6; ++i) atomic.push_back({e5(rng), r2(rng), e5(rng)});
      std::vector<models::NestedIdFact> nested;
      for (int i = 0; i < 3; ++i)
        nested.push_back({atomic[static_cast<std::size_t>(i)], r2(rng),
                          atomic[static_cast<std::size_t>(i + 2)]});
      drivers::NestEDriver drv(models::NestEModel(5, 2, 2, 2, kind), std::move(atomic),
                               std::move(nested), 2);
      const auto p = detail::probe_gradients(drv, 103 + static_cast<int>(kind), points, tol);
      const char* tag = kind == Algebra::Quaternion   ? "grad/nested-quaternion"
                        : kind == Algebra::Hyperbolic ? "grad/nested-hyperbolic"
                                                      : "grad/nested-split";
      s.residual(tag, p.worst, tol);
    }
  }
  {
    using data::ElForm;
    std::vector<data::ElAxiom> axioms;
    auto ax = [&](ElForm f, std::string c, std::string c2, std::string r, std::string dd,
                  std::string a, std::string b) {
      data::ElAxiom x;
      x.form = f;
      x.c = std::move(c);
      x.c2 = std::move(c2);
      x.r = std::move(r);
      x.d = std::move(dd);
      x.a = std::move(a);
      x.b = std::move(b);
      axioms.push_back(std::move(x));
    };
    ax(ElForm::ConceptAssertion, "A", "", "", "", "ind1", "");
    ax(ElForm::RoleAssertion, "", "", "rr", "", "ind1", "ind2");
    ax(ElForm::NF1, "A", "", "", "B", "", "");
    ax(ElForm::NF2, "A", "B", "", "C", "", "");
    ax(ElForm::NF3, "A", "", "rr", "B", "", "");
    ax(ElForm::NF4, "C", "", "rr", "A", "", "");
    ax(ElForm::NF2Bot, "B", "C", "", "", "", "");
    ax(ElForm::NF1Bot, "D", "", "", "", "", "");
    models::BoxELData resolved = models::resolve_el(axioms);
    const int nc = static_cast<int>(resolved.vocab.concept_names.size());
    const int ni = static_cast<int>(resolved.vocab.individual_names.size());
    const int nr = static_cast<int>(resolved.vocab.role_names.size());
    drivers::BoxELDriver drv(models::BoxELModel(nc, ni, nr, 3), std::move(resolved), 0.05);
    const auto p = detail::probe_gradients(drv, 107, points, tol);
    s.residual("grad/ontology-boxes", p.worst, tol);
  }
  {
    poincare::HexGraph hex;
    const int a = hex.add_label("a"), b = hex.add_label("b"), c = hex.add_label("c"),
              dd = hex.add_label("d");
    hex.hier = {{b, a}, {c, a}, {dd, b}};
    hex.excl = {{b, c}};
    hex.validate();
    drivers::HmiDriver drv(models::HmiModel(4, 3), hex);
    const auto p = detail::probe_gradients(drv, 108, points, tol);
    s.residual("grad/constraint-balls", p.worst, tol);
  }
  {
    // oracle sanity: exact on quadratics, and a deliberately broken gradient
    // is caught
    auto quad = [](const Vec& p) { return p[0] * p[0] + 3.0 * p[0] * p[1] + p[2]; };
    const Vec at = {0.7, -1.3, 2.0};
    const Vec fd = finite_diff_grad(quad, at, 1e-5);
    const Vec exact = {2.0 * at[0] + 3.0 * at[1], 3.0 * at[0], 1.0};
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::fabs(fd[i] - exact[i]));
    s.residual("grad/oracle-quadratic", worst, 1e-8);
    Vec scaled = exact;
    for (double& g : scaled) g *= 2.0;
    const GradCheckReport rep = check_gradients(quad, scaled, at);
    s.check("grad/oracle-detects-mismatch", std::fabs(rep.max_rel_err - 0.5) < 1e-3,
            "scaled-by-2 gradient reports rel err 0.5");
  }

  return s.results;
}

// ---------------------------------------------------------------------------

inline std::vector<CheckResult> run_suites(const std::string& which, bool inject_failure = false) {
  std::vector<CheckResult> all;
  auto append = [&](std::vector<CheckResult> v) {
    for (auto& c : v) all.push_back(std::move(c));
  };
  if (which == "geometry" || which == "all") append(suite_geometry());
  if (which == "patterns" || which == "all") append(suite_patterns());
  if (which == "soundness" || which == "all") append(suite_soundness());
  if (which == "gradients" || which == "all") append(suite_gradients());
  if (all.empty()) throw Error("unknown suite: " + which);
  if (inject_failure) all.push_back({"injected-failure", false, "requested via flag"});
  return all;
}

}  // namespace verify
}  // namespace geore
