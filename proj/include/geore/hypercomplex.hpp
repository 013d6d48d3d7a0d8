#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "geore/autodiff.hpp"
#include "geore/numerics.hpp"

// Generalized 4D hypercomplex numbers: quaternions, hyperbolic quaternions
// and split quaternions share the anticommuting unit products ij=k, ji=-k;
// they differ in the unit squares and the jk/ki family signs. The induced
// quadratic forms are the hypersphere, the Lorentz form and the
// pseudo-hyperboloid form respectively.

namespace geore {
namespace hypercomplex {

enum class Algebra { Quaternion, Hyperbolic, Split };

struct UnitTable {
  double i2, j2, k2;  // squares of the imaginary units
  double jk, kj;      // jk = jk_i * i, kj = kj_i * i
  double ki, ik;      // ki = ki_j * j, ik = ik_j * j
  double ij, ji;      // ij = ij_k * k, ji = ji_k * k
};

inline const UnitTable& table(Algebra a) {
  static const UnitTable q{-1, -1, -1, +1, -1, +1, -1, +1, -1};
  static const UnitTable h{+1, +1, +1, +1, -1, +1, -1, +1, -1};
  static const UnitTable s{-1, +1, +1, -1, +1, +1, -1, +1, -1};
  switch (a) {
    case Algebra::Quaternion: return q;
    case Algebra::Hyperbolic: return h;
    case Algebra::Split: return s;
  }
  throw Error("hypercomplex: bad algebra tag");
}

template <class S>
struct HNum {
  S s{0.0}, x{0.0}, y{0.0}, z{0.0};

  HNum() = default;
  HNum(S s_, S x_, S y_, S z_) : s(s_), x(x_), y(y_), z(z_) {}
  static HNum one() { return HNum(S(1.0), S(0.0), S(0.0), S(0.0)); }
};

template <class S>
HNum<S> operator+(const HNum<S>& a, const HNum<S>& b) {
  return HNum<S>(a.s + b.s, a.x + b.x, a.y + b.y, a.z + b.z);
}

template <class S>
HNum<S> operator-(const HNum<S>& a, const HNum<S>& b) {
  return HNum<S>(a.s - b.s, a.x - b.x, a.y - b.y, a.z - b.z);
}

template <class S>
HNum<S> scale(const HNum<S>& a, const S& c) {
  return HNum<S>(a.s * c, a.x * c, a.y * c, a.z * c);
}

template <class S>
HNum<S> hamilton(const HNum<S>& a, const HNum<S>& b, Algebra kind) {
  const UnitTable& t = table(kind);
  return HNum<S>(
      a.s * b.s + t.i2 * a.x * b.x + t.j2 * a.y * b.y + t.k2 * a.z * b.z,
      a.s * b.x + a.x * b.s + t.jk * a.y * b.z + t.kj * a.z * b.y,
      a.s * b.y + a.y * b.s + t.ki * a.z * b.x + t.ik * a.x * b.z,
      a.s * b.z + a.z * b.s + t.ij * a.x * b.y + t.ji * a.y * b.x);
}

// Signed quadratic form of the algebra: sphere / Lorentz / pseudo-hyperboloid.
template <class S>
S hnorm(const HNum<S>& a, Algebra kind) {
  switch (kind) {
    case Algebra::Quaternion: return a.s * a.s + a.x * a.x + a.y * a.y + a.z * a.z;
    case Algebra::Hyperbolic: return a.s * a.s - a.x * a.x - a.y * a.y - a.z * a.z;
    case Algebra::Split: return a.s * a.s + a.x * a.x - a.y * a.y - a.z * a.z;
  }
  throw Error("hnorm: bad algebra tag");
}

// Rotors are normalized by the Euclidean 4-norm for every algebra kind.
template <class S>
HNum<S> hnormalize_rotor(const HNum<S>& r) {
  using std::sqrt;
  S n2 = r.s * r.s + r.x * r.x + r.y * r.y + r.z * r.z;
  if (val(n2) <= 0.0) throw Error("hnormalize_rotor: zero rotor");
  S inv = S(1.0) / sqrt(n2);
  return scale(r, inv);
}

template <class S>
S hinner(const HNum<S>& a, const HNum<S>& b) {
  return a.s * b.s + a.x * b.x + a.y * b.y + a.z * b.z;
}

// Cartesian product of d 4D numbers; every operation is element-wise.
template <class S>
using HVec = std::vector<HNum<S>>;

template <class S>
HVec<S> hv_add(const HVec<S>& a, const HVec<S>& b) {
  if (a.size() != b.size()) throw Error("hv_add: dimension mismatch");
  HVec<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <class S>
HVec<S> hv_hamilton(const HVec<S>& a, const HVec<S>& b, Algebra kind) {
  if (a.size() != b.size()) throw Error("hv_hamilton: dimension mismatch");
  HVec<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = hamilton(a[i], b[i], kind);
  return out;
}

template <class S>
HVec<S> hv_normalize(const HVec<S>& a) {
  HVec<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = hnormalize_rotor(a[i]);
  return out;
}

template <class S>
S hv_inner(const HVec<S>& a, const HVec<S>& b) {
  if (a.size() != b.size()) throw Error("hv_inner: dimension mismatch");
  S acc(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) acc = acc + hinner(a[i], b[i]);
  return acc;
}

// Atomic triple as a 1x3 row, nested relation as a 3x3 matrix.
template <class S>
using HTriple = std::array<HVec<S>, 3>;
template <class S>
using HMat3 = std::array<std::array<HVec<S>, 3>, 3>;

template <class S>
HTriple<S> hmat_rotate(const HTriple<S>& t, const HMat3<S>& r, Algebra kind) {
  HTriple<S> out;
  for (int j = 0; j < 3; ++j) {
    HVec<S> acc = hv_hamilton(t[0], r[0][j], kind);
    acc = hv_add(acc, hv_hamilton(t[1], r[1][j], kind));
    acc = hv_add(acc, hv_hamilton(t[2], r[2][j], kind));
    out[j] = std::move(acc);
  }
  return out;
}

template <class S>
HTriple<S> ht_add(const HTriple<S>& a, const HTriple<S>& b) {
  return HTriple<S>{hv_add(a[0], b[0]), hv_add(a[1], b[1]), hv_add(a[2], b[2])};
}

// Matrix inner product: sum of the component inner products.
template <class S>
S ht_inner(const HTriple<S>& a, const HTriple<S>& b) {
  return hv_inner(a[0], b[0]) + hv_inner(a[1], b[1]) + hv_inner(a[2], b[2]);
}

}  // namespace hypercomplex
}  // namespace geore
