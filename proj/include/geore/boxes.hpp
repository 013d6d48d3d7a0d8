#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "geore/autodiff.hpp"
#include "geore/numerics.hpp"

// Axis-aligned boxes shared by the ontology and hyper-relational models.
// Emptiness (some lo_i >= hi_i) is a representable state, never an error.

namespace geore {
namespace boxes {

template <class S>
struct BoxT {
  std::vector<S> lo, hi;

  BoxT() = default;
  BoxT(std::vector<S> l, std::vector<S> h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size()) throw Error("Box: corner dimension mismatch");
  }
  std::size_t dim() const { return lo.size(); }
};

using Box = BoxT<double>;

inline bool is_empty(const Box& b) {
  for (std::size_t i = 0; i < b.dim(); ++i)
    if (b.lo[i] >= b.hi[i]) return true;
  return false;
}

inline bool point_in_box(const Vec& p, const Box& b) {
  for (std::size_t i = 0; i < b.dim(); ++i)
    if (p[i] < b.lo[i] || p[i] > b.hi[i]) return false;
  return true;
}

// a subset of b, with empty a contained in anything.
inline bool box_in_box(const Box& a, const Box& b) {
  if (is_empty(a)) return true;
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.lo[i] < b.lo[i] || a.hi[i] > b.hi[i]) return false;
  return true;
}

template <class S>
S modified_volume(const BoxT<S>& b, double eps) {
  if (eps <= 0.0) throw Error("modified_volume: eps must be positive");
  S vol(1.0);
  for (std::size_t i = 0; i < b.dim(); ++i)
    vol = vol * vmax(S(0.0), b.hi[i] - b.lo[i] + S(eps));
  return vol;
}

template <class S>
S softplus_volume(const BoxT<S>& b, double temp) {
  if (temp <= 0.0) throw Error("softplus_volume: temperature must be positive");
  S vol(1.0);
  for (std::size_t i = 0; i < b.dim(); ++i) vol = vol * softplus_t(b.hi[i] - b.lo[i], temp);
  return vol;
}

template <class S>
BoxT<S> box_intersection(const BoxT<S>& a, const BoxT<S>& b) {
  if (a.dim() != b.dim()) throw Error("box_intersection: dimension mismatch");
  BoxT<S> out;
  out.lo.reserve(a.dim());
  out.hi.reserve(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    out.lo.push_back(vmax(a.lo[i], b.lo[i]));
    out.hi.push_back(vmin(a.hi[i], b.hi[i]));
  }
  return out;
}

// Disjoint(B1, B2) = 1 - Vol(B1 n B2) / Vol(B1). The modified-volume form is
// the one the soundness statements are about; the softplus form is what the
// training losses use.
template <class S>
S disjoint_measure(const BoxT<S>& b1, const BoxT<S>& b2, double eps) {
  S v1 = modified_volume(b1, eps);
  if (val(v1) == 0.0) throw Error("disjoint_measure: left box has zero modified volume");
  return S(1.0) - modified_volume(box_intersection(b1, b2), eps) / v1;
}

template <class S>
S disjoint_soft(const BoxT<S>& b1, const BoxT<S>& b2, double temp) {
  return S(1.0) - softplus_volume(box_intersection(b1, b2), temp) / softplus_volume(b1, temp);
}

template <class S>
struct AffineRoleMapT {
  std::vector<S> scale;  // nonnegative diagonal
  std::vector<S> shift;
};

using AffineRoleMap = AffineRoleMapT<double>;

template <class S>
std::vector<S> affine_apply(const AffineRoleMapT<S>& t, const std::vector<S>& x) {
  if (t.scale.size() != x.size()) throw Error("affine_apply: dimension mismatch");
  std::vector<S> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = t.scale[i] * x[i] + t.shift[i];
  return out;
}

template <class S>
std::vector<S> affine_apply_inverse(const AffineRoleMapT<S>& t, const std::vector<S>& x) {
  std::vector<S> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (val(t.scale[i]) == 0.0) throw Error("affine inverse: zero scale entry");
    out[i] = (x[i] - t.shift[i]) / t.scale[i];
  }
  return out;
}

// Corner map; ordering is preserved because the scales are nonnegative.
template <class S>
BoxT<S> affine_map_box(const AffineRoleMapT<S>& t, const BoxT<S>& b) {
  return BoxT<S>(affine_apply(t, b.lo), affine_apply(t, b.hi));
}

template <class S>
BoxT<S> affine_map_box_inverse(const AffineRoleMapT<S>& t, const BoxT<S>& b) {
  return BoxT<S>(affine_apply_inverse(t, b.lo), affine_apply_inverse(t, b.hi));
}

template <class S>
S side_length_sum(const BoxT<S>& b) {
  S acc(0.0);
  for (std::size_t i = 0; i < b.dim(); ++i) acc = acc + vmax(S(0.0), b.hi[i] - b.lo[i]);
  return acc;
}

// |e-c|_1 / |max(0, M-m)|_1 + (|e-m|_1 + |e-M|_1 - |max(0, M-m)|_1)^2
template <class S>
S point_to_box_distance(const std::vector<S>& e, const BoxT<S>& b) {
  if (e.size() != b.dim()) throw Error("point_to_box_distance: dimension mismatch");
  S den = side_length_sum(b);
  if (val(den) == 0.0) throw Error("point_to_box_distance: box empty in every dimension");
  S num(0.0), outer(0.0);
  for (std::size_t i = 0; i < b.dim(); ++i) {
    S c = (b.lo[i] + b.hi[i]) * S(0.5);
    num = num + vabs(e[i] - c);
    outer = outer + vabs(e[i] - b.lo[i]) + vabs(e[i] - b.hi[i]);
  }
  return num / den + sq(outer - den);
}

template <class S>
BoxT<S> span_box(const std::vector<S>& center, const std::vector<S>& delta, double temp) {
  if (center.size() != delta.size()) throw Error("span_box: dimension mismatch");
  BoxT<S> out;
  out.lo.reserve(center.size());
  out.hi.reserve(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    S w = softplus_t(delta[i], temp);
    out.lo.push_back(center[i] - w);
    out.hi.push_back(center[i] + w);
  }
  return out;
}

// lo' = lo + sigmoid(s) . L, hi' = hi - sigmoid(S) . L with L = hi - lo.
template <class S>
BoxT<S> shrink_box(const BoxT<S>& b, const std::vector<S>& s_lo, const std::vector<S>& s_hi) {
  if (s_lo.size() != b.dim() || s_hi.size() != b.dim())
    throw Error("shrink_box: dimension mismatch");
  BoxT<S> out;
  out.lo.reserve(b.dim());
  out.hi.reserve(b.dim());
  for (std::size_t i = 0; i < b.dim(); ++i) {
    S len = b.hi[i] - b.lo[i];
    out.lo.push_back(b.lo[i] + sigmoid(s_lo[i]) * len);
    out.hi.push_back(b.hi[i] - sigmoid(s_hi[i]) * len);
  }
  return out;
}

}  // namespace boxes
}  // namespace geore
