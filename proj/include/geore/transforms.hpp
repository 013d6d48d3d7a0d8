#pragma once

#include <cmath>
#include <vector>

#include "geore/autodiff.hpp"
#include "geore/numerics.hpp"

// Relation machinery for the space-first manifold layout: Givens circular
// rotations/reflections and hyperbolic rotations, composed as f_r = U H V.
// The blockwise application is O(d); the dense builders exist as oracles.
//
// At signature (p, 1) the full J-orthogonal group is the Lorentz
// transformation family (space rotation/reflection times a boost), which is
// how the fully-parameterized variant of this map relates to Lorentz-model
// and Poincare-ball relation maps; this library keeps the linear-parameter
// block form (even p, q) and leaves dense parameterizations out.

namespace geore {
namespace transforms {

enum class GivensKind { Rotation, Reflection };

struct UltraRelParams {
  int p = 0, q = 0;
  Vec theta;  // (p+q)/2 rotation angles for U
  Vec phi;    // (p+q)/2 reflection angles for V
  Vec mu;     // q hyperbolic rotation scalars for H

  UltraRelParams(int p_, int q_, Vec th, Vec ph, Vec m)
      : p(p_), q(q_), theta(std::move(th)), phi(std::move(ph)), mu(std::move(m)) {
    if (p <= 0 || q <= 0 || p % 2 != 0 || q % 2 != 0)
      throw Error("UltraRelParams: p and q must be positive and even");
    if (q > p) throw Error("UltraRelParams: q <= p required");
    const std::size_t half = static_cast<std::size_t>(p + q) / 2;
    if (theta.size() != half || phi.size() != half)
      throw Error("UltraRelParams: angle count must be (p+q)/2");
    if (mu.size() != static_cast<std::size_t>(q))
      throw Error("UltraRelParams: mu count must be q");
  }

  int dim() const { return p + q; }
};

inline Mat givens_block(double theta, GivensKind kind) {
  Mat g(2, 2);
  const double c = std::cos(theta), s = std::sin(theta);
  if (kind == GivensKind::Rotation) {
    g(0, 0) = c; g(0, 1) = -s;
    g(1, 0) = s; g(1, 1) = c;
  } else {
    g(0, 0) = c; g(0, 1) = s;
    g(1, 0) = s; g(1, 1) = -c;
  }
  return g;
}

namespace detail {
inline Mat block_diag_angles(const Vec& angles, GivensKind kind) {
  const int d = static_cast<int>(angles.size()) * 2;
  Mat m(d, d);
  for (std::size_t b = 0; b < angles.size(); ++b) {
    const Mat g = givens_block(angles[b], kind);
    const int o = static_cast<int>(b) * 2;
    m(o, o) = g(0, 0); m(o, o + 1) = g(0, 1);
    m(o + 1, o) = g(1, 0); m(o + 1, o + 1) = g(1, 1);
  }
  return m;
}
}  // namespace detail

// U: rotation blocks over the space dims then the time dims.
inline Mat build_U(const Vec& theta) { return detail::block_diag_angles(theta, GivensKind::Rotation); }

// V: reflection blocks in the same layout.
inline Mat build_V(const Vec& phi) { return detail::block_diag_angles(phi, GivensKind::Reflection); }

// H: [C 0 S; 0 I_{p-q} 0; S 0 C], coupling space coord i with time coord p+i.
inline Mat build_H(const Vec& mu, int p, int q) {
  if (static_cast<int>(mu.size()) != q) throw Error("build_H: |mu| must equal q");
  const int d = p + q;
  Mat m = Mat::identity(d);
  for (int i = 0; i < q; ++i) {
    const double ch = std::cosh(mu[i]), sh = std::sinh(mu[i]);
    m(i, i) = ch;
    m(i, p + i) = sh;
    m(p + i, i) = sh;
    m(p + i, p + i) = ch;
  }
  return m;
}

inline Mat signature_matrix(int p, int q) {
  Mat j = Mat::identity(p + q);
  for (int i = p; i < p + q; ++i) j(i, i) = -1.0;
  return j;
}

inline Mat build_dense(const UltraRelParams& r) {
  return build_U(r.theta) * build_H(r.mu, r.p, r.q) * build_V(r.phi);
}

template <class S>
void apply_angle_blocks(std::vector<S>& x, const Vec& angles, GivensKind kind) {
  for (std::size_t b = 0; b < angles.size(); ++b) {
    const double c = std::cos(angles[b]), s = std::sin(angles[b]);
    const std::size_t i = 2 * b;
    const S a = x[i], bb = x[i + 1];
    if (kind == GivensKind::Rotation) {
      x[i] = a * c - bb * s;
      x[i + 1] = a * s + bb * c;
    } else {
      x[i] = a * c + bb * s;
      x[i + 1] = a * s - bb * c;
    }
  }
}

// f_r(x) = U H V x evaluated blockwise without materializing any matrix.
template <class S>
std::vector<S> apply_relation(const UltraRelParams& r, const std::vector<S>& x) {
  if (static_cast<int>(x.size()) != r.dim()) throw Error("apply_relation: dimension mismatch");
  std::vector<S> y = x;
  apply_angle_blocks(y, r.phi, GivensKind::Reflection);
  for (int i = 0; i < r.q; ++i) {
    const double ch = std::cosh(r.mu[i]), sh = std::sinh(r.mu[i]);
    const S a = y[i], b = y[r.p + i];
    y[i] = a * ch + b * sh;
    y[r.p + i] = a * sh + b * ch;
  }
  apply_angle_blocks(y, r.theta, GivensKind::Rotation);
  return y;
}

// Learned-angle variant: same pipeline, angles as tape scalars.
template <class S>
std::vector<S> apply_relation_t(const std::vector<S>& theta, const std::vector<S>& phi,
                                const std::vector<S>& mu, int p, int q,
                                const std::vector<S>& x) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  if (static_cast<int>(x.size()) != p + q) throw Error("apply_relation_t: dimension mismatch");
  std::vector<S> y = x;
  for (std::size_t b = 0; b < phi.size(); ++b) {
    const S c = cos(phi[b]), s = sin(phi[b]);
    const std::size_t i = 2 * b;
    const S a = y[i], bb = y[i + 1];
    y[i] = a * c + bb * s;
    y[i + 1] = a * s - bb * c;
  }
  for (int i = 0; i < q; ++i) {
    const S ch = cosh(mu[i]), sh = sinh(mu[i]);
    const S a = y[i], b = y[p + i];
    y[i] = a * ch + b * sh;
    y[p + i] = a * sh + b * ch;
  }
  for (std::size_t b = 0; b < theta.size(); ++b) {
    const S c = cos(theta[b]), s = sin(theta[b]);
    const std::size_t i = 2 * b;
    const S a = y[i], bb = y[i + 1];
    y[i] = a * c - bb * s;
    y[i + 1] = a * s + bb * c;
  }
  return y;
}

}  // namespace transforms
}  // namespace geore
