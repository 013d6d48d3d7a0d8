#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "geore/autodiff.hpp"
#include "geore/numerics.hpp"

// Pseudo-hyperboloid Q^{s,t}_beta geometry. Canonical layout is time-first:
// x = (t_0..t_{tp-1}, s_0..s_{sp-1}) with <x,x>_t = -|t|^2 + |s|^2 = beta < 0.
// The space-first layout used by the relational model is handled by the
// *_ultra entry points at the bottom.

namespace geore {
namespace manifold {

struct Signature {
  int space = 0;    // s
  int time = 1;     // t_plus (number of time coordinates)
  double beta = -1.0;

  Signature() = default;
  Signature(int s, int t_plus, double b) : space(s), time(t_plus), beta(b) {
    if (space < 0 || time < 1) throw Error("Signature: need s >= 0 and t_plus >= 1");
    if (beta >= 0.0) throw Error("Signature: beta must be negative");
  }
  int dim() const { return space + time; }
  double alpha() const { return std::sqrt(-beta); }
};

template <class S>
S pseudo_inner_t(const std::vector<S>& x, const std::vector<S>& y, int t_plus) {
  if (x.size() != y.size()) throw Error("pseudo_inner: dimension mismatch");
  S acc(0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (static_cast<int>(i) < t_plus)
      acc = acc - x[i] * y[i];
    else
      acc = acc + x[i] * y[i];
  }
  return acc;
}

inline double pseudo_inner(const Vec& x, const Vec& y, const Signature& sig) {
  if (static_cast<int>(x.size()) != sig.dim()) throw Error("pseudo_inner: dimension mismatch");
  return pseudo_inner_t(x, y, sig.time);
}

inline double lorentz_inner(const Vec& x, const Vec& y) { return pseudo_inner_t(x, y, 1); }

struct PseudoPoint {
  Signature sig;
  Vec coords;
};

struct TangentVec {
  PseudoPoint base;
  Vec dir;
};

inline double constraint_residual(const PseudoPoint& p) {
  return std::fabs(pseudo_inner(p.coords, p.coords, p.sig) - p.sig.beta);
}

inline double tangency_residual(const TangentVec& t) {
  return std::fabs(pseudo_inner(t.base.coords, t.dir, t.base.sig));
}

template <class S>
S block_norm(const std::vector<S>& x, int lo, int hi) {
  S acc(0.0);
  for (int i = lo; i < hi; ++i) acc = acc + x[i] * x[i];
  using std::sqrt;
  return sqrt(acc);
}

template <class S>
S block_dot(const std::vector<S>& x, const std::vector<S>& y, int lo, int hi) {
  S acc(0.0);
  for (int i = lo; i < hi; ++i) acc = acc + x[i] * y[i];
  return acc;
}

template <class S>
S acos_clamped(const S& c) {
  if (val(c) >= 1.0 - 1e-12) return S(0.0);
  if (val(c) <= -1.0 + 1e-12) return S(M_PI);
  using std::acos;
  return acos(c);
}

template <class S>
S acosh_clamped(const S& z) {
  if (val(z) <= 1.0 + 1e-12) return S(0.0);
  using std::acosh;
  return acosh(z);
}

// psi: time part rescaled to norm sqrt(|beta|), space part unchanged.
template <class S>
std::vector<S> sphere_project(const std::vector<S>& x, const Signature& sig) {
  if (static_cast<int>(x.size()) != sig.dim()) throw Error("sphere_project: dimension mismatch");
  S tn = block_norm(x, 0, sig.time);
  if (val(tn) < 1e-12) throw Error("sphere_project: zero time part");
  std::vector<S> z = x;
  const double a = sig.alpha();
  for (int i = 0; i < sig.time; ++i) z[i] = x[i] * (S(a) / tn);
  return z;
}

// psi^{-1}: time part rescaled by sqrt(|beta| + |v|^2) / sqrt(|beta|).
template <class S>
std::vector<S> sphere_unproject(const std::vector<S>& z, const Signature& sig) {
  if (static_cast<int>(z.size()) != sig.dim()) throw Error("sphere_unproject: dimension mismatch");
  const double a = sig.alpha();
  S tn = block_norm(z, 0, sig.time);
  if (std::fabs(val(tn) - a) > 1e-9)
    throw Error("sphere_unproject: time part not on the sphere of radius sqrt(|beta|)");
  S sn2 = block_dot(z, z, sig.time, sig.dim());
  using std::sqrt;
  S scale = sqrt(S(-sig.beta) + sn2) / S(a);
  std::vector<S> x = z;
  for (int i = 0; i < sig.time; ++i) x[i] = z[i] * scale;
  return x;
}

inline PseudoPoint project_to_manifold(const Vec& x, const Signature& sig) {
  return PseudoPoint{sig, sphere_unproject(sphere_project(x, sig), sig)};
}

// Zero-time guard used at initialization: each time coordinate perturbed
// uniformly in [-eps, eps] when the time part vanishes.
inline void perturb_zero_time(Vec& x, const Signature& sig, std::mt19937_64& rng,
                              double eps = 0.02) {
  double tn = 0.0;
  for (int i = 0; i < sig.time; ++i) tn += x[i] * x[i];
  if (tn > 1e-18) return;
  std::uniform_real_distribution<double> u(-eps, eps);
  for (int i = 0; i < sig.time; ++i) x[i] = u(rng);
}

enum class MapKind { Euclidean, Sphere, Hyperboloid };

namespace detail {
inline double clamp_domain(double v, double lo, double hi, const char* ctx) {
  const double slack = 1e-9, hard = 1e-6;
  if (v < lo - hard || v > hi + hard) throw Error(std::string(ctx) + ": argument out of domain");
  if (v < lo + slack && v < lo) return lo;
  if (v > hi - slack && v > hi) return hi;
  return std::min(std::max(v, lo), hi);
}
}  // namespace detail

// Exponential/logarithmic maps of the three constant-curvature table kinds.
// Sphere points satisfy <x,x> = 1/K (K > 0); hyperboloid points satisfy
// <x,x><sub>L</sub> = 1/K (K < 0) with one time coordinate first.
inline Vec exp_map(MapKind kind, const Vec& x, const Vec& v, double curvature) {
  switch (kind) {
    case MapKind::Euclidean: {
      Vec y = x;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += v[i];
      return y;
    }
    case MapKind::Sphere: {
      if (curvature <= 0.0) throw Error("exp_map sphere: curvature must be positive");
      const double rk = std::sqrt(curvature);
      const double nv = norm2(v);
      if (nv < 1e-15) return x;
      const double c = std::cos(rk * nv), s = std::sin(rk * nv);
      Vec y(x.size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = c * x[i] + s * v[i] / (rk * nv);
      return y;
    }
    case MapKind::Hyperboloid: {
      if (curvature >= 0.0) throw Error("exp_map hyperboloid: curvature must be negative");
      const double rk = std::sqrt(-curvature);
      double q = lorentz_inner(v, v);
      if (q < -1e-9) throw Error("exp_map hyperboloid: tangent not spacelike");
      q = std::max(q, 0.0);
      const double nv = std::sqrt(q);
      if (nv < 1e-15) return x;
      const double c = std::cosh(rk * nv), s = std::sinh(rk * nv);
      Vec y(x.size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = c * x[i] + s * v[i] / (rk * nv);
      return y;
    }
  }
  throw Error("exp_map: bad kind");
}

inline Vec log_map(MapKind kind, const Vec& x, const Vec& y, double curvature) {
  switch (kind) {
    case MapKind::Euclidean: {
      Vec v = y;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= x[i];
      return v;
    }
    case MapKind::Sphere: {
      const double c = detail::clamp_domain(curvature * dot(x, y), -1.0, 1.0, "log_map sphere");
      Vec w(x.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = y[i] - c * x[i];
      const double nw = norm2(w);
      if (nw < 1e-15) return Vec(x.size(), 0.0);
      const double theta = std::acos(c);
      Vec v(x.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = theta / std::sqrt(1.0 - c * c) * w[i];
      return v;
    }
    case MapKind::Hyperboloid: {
      double c = curvature * lorentz_inner(x, y);
      if (c < 1.0) c = detail::clamp_domain(c, 1.0, c + 1.0, "log_map hyperboloid");
      Vec w(x.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = y[i] - c * x[i];
      if (c - 1.0 < 1e-15) return Vec(x.size(), 0.0);
      const double lam = std::acosh(c);
      Vec v(x.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = lam / std::sqrt(c * c - 1.0) * w[i];
      return v;
    }
  }
  throw Error("log_map: bad kind");
}

// Geodesic log on Q^{s,t}_beta itself, branch chosen by <x,y>_t.
// Only defined for g-connected pairs: <x,y>_t < |beta|.
// Pairs within rounding distance of the g-connectedness boundary are treated
// as broken; the two distance branches agree there (lambda -> pi).
inline double broken_tol(const Signature& sig) { return 1e-9 * std::max(1.0, -sig.beta); }

inline Vec pseudo_log(const PseudoPoint& x, const PseudoPoint& y) {
  const Signature& sig = x.sig;
  const double u = pseudo_inner(x.coords, y.coords, sig);
  if (u >= -sig.beta - broken_tol(sig)) throw Error("pseudo_log: points are g-disconnected");
  const double c = u / sig.beta;  // >= 1 spacelike, (-1,1) timelike, ~1 null
  const std::size_t n = x.coords.size();
  Vec out(n, 0.0);
  if (c >= 1.0 + 1e-9) {
    const double lam = std::acosh(c);
    const double sh = std::sinh(lam);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = lam * (y.coords[i] - c * x.coords[i]) / sh;
  } else if (c > 1.0 - 1e-9) {
    for (std::size_t i = 0; i < n; ++i) out[i] = y.coords[i] - x.coords[i];
  } else {
    const double lam = std::acos(std::max(-1.0 + 1e-15, c));
    const double sn = std::sin(lam);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = lam * (y.coords[i] - c * x.coords[i]) / sn;
  }
  return out;
}

// Geodesic exp on Q^{s,t}_beta, branch chosen by the causal character of v.
inline PseudoPoint pseudo_exp(const PseudoPoint& x, const Vec& v) {
  const Signature& sig = x.sig;
  const double q = pseudo_inner(v, v, sig);
  const double a = sig.alpha();
  const std::size_t n = x.coords.size();
  Vec out(n, 0.0);
  if (std::fabs(q) < 1e-14) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x.coords[i] + v[i];
  } else if (q > 0.0) {
    const double lam = std::sqrt(q) / a;
    for (std::size_t i = 0; i < n; ++i)
      out[i] = std::cosh(lam) * x.coords[i] + std::sinh(lam) / lam * v[i];
  } else {
    const double lam = std::sqrt(-q) / a;
    for (std::size_t i = 0; i < n; ++i)
      out[i] = std::cos(lam) * x.coords[i] + std::sin(lam) / lam * v[i];
  }
  return PseudoPoint{sig, out};
}

inline double geodesic_distance(const PseudoPoint& x, const PseudoPoint& y) {
  const Vec xi = pseudo_log(x, y);
  return std::sqrt(std::fabs(pseudo_inner(xi, xi, x.sig)));
}

inline PseudoPoint antipode(const PseudoPoint& p) {
  PseudoPoint q = p;
  for (double& c : q.coords) c = -c;
  return q;
}

// d(x,y) for connected pairs; pi*sqrt(|beta|) + d(x,-y) for broken pairs.
inline double broken_distance(const PseudoPoint& x, const PseudoPoint& y) {
  const Signature& sig = x.sig;
  const double u = pseudo_inner(x.coords, y.coords, sig);
  if (u < -sig.beta - broken_tol(sig)) return geodesic_distance(x, y);
  const PseudoPoint ny = antipode(y);
  const double u2 = pseudo_inner(x.coords, ny.coords, sig);
  double leg = 0.0;
  if (u2 < -sig.beta - broken_tol(sig)) leg = geodesic_distance(x, ny);
  return M_PI * sig.alpha() + leg;
}

// Parallel transport of zeta from T_x to T_y along the geodesic, with the
// antipodal detour when y lies outside the normal neighborhood of x.
inline TangentVec parallel_transport(const PseudoPoint& x, const PseudoPoint& y,
                                     const TangentVec& zeta) {
  const Signature& sig = x.sig;
  PseudoPoint dest = y;
  if (pseudo_inner(x.coords, y.coords, sig) >= -sig.beta - broken_tol(sig)) dest = antipode(y);
  const Vec xi = pseudo_log(x, dest);
  const double q = pseudo_inner(xi, xi, sig);
  const double zdotxi = pseudo_inner(zeta.dir, xi, sig);
  const std::size_t n = x.coords.size();
  Vec out(n, 0.0);
  const double a = sig.alpha();
  if (std::fabs(q) < 1e-12) {
    const double coef = zdotxi / (-sig.beta);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = zeta.dir[i] + coef * (x.coords[i] + 0.5 * xi[i]);
  } else if (q > 0.0) {
    const double lam = std::sqrt(q) / a;
    const double w = zdotxi / q;
    for (std::size_t i = 0; i < n; ++i)
      out[i] = w * (lam * std::sinh(lam) * x.coords[i] + std::cosh(lam) * xi[i]) +
               zeta.dir[i] - w * xi[i];
  } else {
    const double lam = std::sqrt(-q) / a;
    const double w = zdotxi / q;
    for (std::size_t i = 0; i < n; ++i)
      out[i] = w * (-lam * std::sin(lam) * x.coords[i] + std::cos(lam) * xi[i]) +
               zeta.dir[i] - w * xi[i];
  }
  return TangentVec{dest, out};
}

namespace detail {

// Sphere block helpers on the first t_plus coordinates (radius sqrt(|beta|),
// Euclidean metric on the block).
inline Vec sphere_block_exp(const Vec& u, const Vec& xi, double a) {
  const double n = norm2(xi);
  if (n < 1e-15) return u;
  const double theta = n / a;
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = std::cos(theta) * u[i] + std::sin(theta) * a * xi[i] / n;
  return out;
}

inline Vec sphere_block_log(const Vec& u, const Vec& w, double a) {
  const double c = clamp_domain(dot(u, w) / (a * a), -1.0, 1.0, "diffeo sphere log");
  Vec perp(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) perp[i] = w[i] - c * u[i];
  const double np = norm2(perp);
  if (np < 1e-15) return Vec(u.size(), 0.0);
  const double theta = std::acos(c);
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = theta * a / np * perp[i];
  return out;
}

inline void require_zero_space(const PseudoPoint& x) {
  for (int i = x.sig.time; i < x.sig.dim(); ++i)
    if (std::fabs(x.coords[i]) > 1e-9)
      throw Error("diffeo map: reference point must have zero space part");
}

}  // namespace detail

// Diffeomorphic exp/log through psi: sphere x Euclidean component maps with
// the identity pushforward available at zero-space-part reference points.
inline PseudoPoint diffeo_exp(const PseudoPoint& x, const TangentVec& v) {
  detail::require_zero_space(x);
  const Signature& sig = x.sig;
  const double a = sig.alpha();
  Vec u(x.coords.begin(), x.coords.begin() + sig.time);
  Vec xi_t(v.dir.begin(), v.dir.begin() + sig.time);
  Vec u2 = detail::sphere_block_exp(u, xi_t, a);
  Vec z(sig.dim());
  for (int i = 0; i < sig.time; ++i) z[i] = u2[i];
  for (int i = sig.time; i < sig.dim(); ++i) z[i] = v.dir[i];
  return PseudoPoint{sig, sphere_unproject(z, sig)};
}

inline TangentVec diffeo_log(const PseudoPoint& x, const PseudoPoint& y) {
  detail::require_zero_space(x);
  const Signature& sig = x.sig;
  const double a = sig.alpha();
  const Vec zy = sphere_project(y.coords, sig);
  Vec u(x.coords.begin(), x.coords.begin() + sig.time);
  Vec uy(zy.begin(), zy.begin() + sig.time);
  Vec xi_t = detail::sphere_block_log(u, uy, a);
  Vec dir(sig.dim());
  for (int i = 0; i < sig.time; ++i) dir[i] = xi_t[i];
  for (int i = sig.time; i < sig.dim(); ++i) dir[i] = y.coords[i];
  return TangentVec{x, dir};
}

inline PseudoPoint south_pole(const Signature& sig) {
  Vec c(sig.dim(), 0.0);
  c[0] = sig.alpha();
  return PseudoPoint{sig, c};
}

// Translation by a pole tangent: transport b to the point of interest and
// shoot the geodesic; broken points route through the antipode, with the
// result reflected back.
inline PseudoPoint bias_translate(const PseudoPoint& h, const Vec& bias) {
  const Signature& sig = h.sig;
  const PseudoPoint o = south_pole(sig);
  const bool broken =
      pseudo_inner(o.coords, h.coords, sig) >= -sig.beta - broken_tol(sig);
  const PseudoPoint dest = broken ? antipode(h) : h;
  const TangentVec moved = parallel_transport(o, dest, TangentVec{o, bias});
  PseudoPoint out = pseudo_exp(dest, moved.dir);
  if (broken)
    for (double& c : out.coords) c = -c;
  return out;
}

// ---------------------------------------------------------------------------
// Space-first layout used by the relational embedding model:
// x = (x_p space, x_q time), |x_p|^2 - |x_q|^2 = -alpha^2.
// The canonical (time-first) invariants apply through this permutation.

inline Vec ultra_to_canonical(const Vec& x, int p, int q) {
  if (static_cast<int>(x.size()) != p + q) throw Error("ultra_to_canonical: dimension mismatch");
  Vec out(x.size());
  for (int i = 0; i < q; ++i) out[i] = x[p + i];
  for (int i = 0; i < p; ++i) out[q + i] = x[i];
  return out;
}

inline Vec canonical_to_ultra(const Vec& x, int p, int q) {
  if (static_cast<int>(x.size()) != p + q) throw Error("canonical_to_ultra: dimension mismatch");
  Vec out(x.size());
  for (int i = 0; i < q; ++i) out[p + i] = x[i];
  for (int i = 0; i < p; ++i) out[i] = x[q + i];
  return out;
}

template <class S>
std::vector<S> ultra_normalize(const std::vector<S>& x, int p, int q, double alpha) {
  if (static_cast<int>(x.size()) != p + q) throw Error("ultra_normalize: dimension mismatch");
  S tn = block_norm(x, p, p + q);
  if (val(tn) < 1e-12) throw Error("ultra_normalize: zero time part");
  S sn2 = block_dot(x, x, 0, p);
  using std::sqrt;
  S target = sqrt(S(alpha * alpha) + sn2);
  std::vector<S> out = x;
  for (int i = p; i < p + q; ++i) out[i] = x[i] * (target / tn);
  return out;
}

// Conic-section projection: keeps x's space part, takes y's time part scaled
// by alpha * |x_p| / |y_p|. The distance legs depend on it only through the
// space part and the time direction.
inline Vec fiber_project(const Vec& x, const Vec& y, int p, int q, double alpha) {
  const double xs = block_norm(x, 0, p);
  const double ys = block_norm(y, 0, p);
  if (ys < 1e-12) throw Error("fiber_project: zero space part in target");
  Vec rho(p + q);
  for (int i = 0; i < p; ++i) rho[i] = x[i];
  for (int i = p; i < p + q; ++i) rho[i] = alpha * y[i] * xs / ys;
  return rho;
}

// Manhattan-like distance: a circular leg inside the cheaper of the two
// conic sections plus a hyperbolic leg between the space parts, each being
// the exact geodesic distance of the corresponding section.
template <class S>
S manhattan_distance_ultra(const std::vector<S>& x, const std::vector<S>& y, int p, int q,
                           double alpha) {
  using std::sqrt;
  const double a2 = alpha * alpha;
  S xt = block_norm(x, p, p + q), yt = block_norm(y, p, p + q);
  S ct = block_dot(x, y, p, p + q) / (xt * yt);
  S theta = acos_clamped(ct);
  S sphere_leg = vmin(xt, yt) * theta;

  S xs2 = block_dot(x, x, 0, p), ys2 = block_dot(y, y, 0, p);
  S z = (sqrt((S(a2) + xs2) * (S(a2) + ys2)) - block_dot(x, y, 0, p)) / S(a2);
  S hyper_leg = S(alpha) * acosh_clamped(z);
  return sphere_leg + hyper_leg;
}

inline double manhattan_distance(const Vec& x, const Vec& y, int p, int q, double alpha) {
  return manhattan_distance_ultra<double>(x, y, p, q, alpha);
}

}  // namespace manifold
}  // namespace geore
