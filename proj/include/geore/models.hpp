#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "geore/autodiff.hpp"
#include "geore/boxes.hpp"
#include "geore/data.hpp"
#include "geore/hypercomplex.hpp"
#include "geore/manifold.hpp"
#include "geore/numerics.hpp"
#include "geore/poincare.hpp"
#include "geore/transforms.hpp"

// The four scoring/loss families on top of the geometry modules. Parameters
// live in one flat vector per model; every score and loss is templated so the
// same code runs on doubles (scoring) and on tape scalars (training).

namespace geore {
namespace models {

struct IdTriple {
  int h = 0, r = 0, t = 0;
  bool operator==(const IdTriple& o) const { return h == o.h && r == o.r && t == o.t; }
  bool operator<(const IdTriple& o) const {
    if (h != o.h) return h < o.h;
    if (r != o.r) return r < o.r;
    return t < o.t;
  }
};

struct ParamGroup {
  std::string name;
  std::size_t offset = 0, size = 0;
};

template <class S>
std::vector<S> slice(const std::vector<S>& params, std::size_t off, std::size_t n) {
  return std::vector<S>(params.begin() + off, params.begin() + off + n);
}

// ---------------------------------------------------------------------------
// Pseudo-Riemannian relational model (space-first layout, alpha fixed).

struct UltraEModel {
  int n_ent = 0, n_rel = 0, p = 0, q = 0, d = 0;
  double alpha = 1.0;
  double margin = 2.0;  // global additive margin in the score
  std::size_t off_ent = 0, off_bh = 0, off_bt = 0, off_theta = 0, off_phi = 0, off_mu = 0,
              total = 0;

  UltraEModel(int ents, int rels, int p_, int q_, double margin_ = 2.0)
      : n_ent(ents), n_rel(rels), p(p_), q(q_), d(p_ + q_), margin(margin_) {
    if (p <= 0 || q <= 0 || p % 2 || q % 2) throw Error("UltraEModel: p, q must be even positive");
    if (q > p) throw Error("UltraEModel: q <= p required");
    off_ent = 0;
    off_bh = off_ent + static_cast<std::size_t>(n_ent) * d;
    off_bt = off_bh + n_ent;
    off_theta = off_bt + n_ent;
    off_phi = off_theta + static_cast<std::size_t>(n_rel) * (d / 2);
    off_mu = off_phi + static_cast<std::size_t>(n_rel) * (d / 2);
    total = off_mu + static_cast<std::size_t>(n_rel) * q;
  }

  std::size_t num_params() const { return total; }

  std::vector<ParamGroup> param_groups() const {
    return {{"entities", off_ent, static_cast<std::size_t>(n_ent) * d},
            {"bias_head", off_bh, static_cast<std::size_t>(n_ent)},
            {"bias_tail", off_bt, static_cast<std::size_t>(n_ent)},
            {"theta", off_theta, static_cast<std::size_t>(n_rel) * (d / 2)},
            {"phi", off_phi, static_cast<std::size_t>(n_rel) * (d / 2)},
            {"mu", off_mu, static_cast<std::size_t>(n_rel) * q}};
  }

  // Entities start uniform with the first time coordinate offset toward the
  // pole, so the initial time directions cluster instead of straddling the
  // antipodal seam (the pseudo-hyperboloid analog of origin-centered init).
  void init(Vec& params, std::mt19937_64& rng) const {
    params.assign(total, 0.0);
    const double s = 0.1 / std::sqrt(static_cast<double>(d));
    std::uniform_real_distribution<double> ent_u(-s, s), ang(-M_PI, M_PI);
    for (std::size_t i = off_ent; i < off_bh; ++i) params[i] = ent_u(rng);
    for (int e = 0; e < n_ent; ++e)
      params[off_ent + static_cast<std::size_t>(e) * d + p] += 0.5;
    for (std::size_t i = off_theta; i < off_mu; ++i) params[i] = ang(rng);
    for (std::size_t i = off_mu; i < total; ++i) params[i] = ent_u(rng);
  }

  void check_ids(int h, int r, int t) const {
    if (h < 0 || h >= n_ent || t < 0 || t >= n_ent) throw Error("unknown entity id");
    if (r < 0 || r >= n_rel) throw Error("unknown relation id");
  }

  template <class S>
  std::vector<S> entity_point(const std::vector<S>& P, int e) const {
    if (e < 0 || e >= n_ent) throw Error("unknown entity id");
    auto raw = slice(P, off_ent + static_cast<std::size_t>(e) * d, d);
    return manifold::ultra_normalize(raw, p, q, alpha);
  }

  template <class S>
  S score(const std::vector<S>& P, int h, int r, int t) const {
    check_ids(h, r, t);
    auto eh = entity_point(P, h);
    auto et = entity_point(P, t);
    auto theta = slice(P, off_theta + static_cast<std::size_t>(r) * (d / 2), d / 2);
    auto phi = slice(P, off_phi + static_cast<std::size_t>(r) * (d / 2), d / 2);
    auto mu = slice(P, off_mu + static_cast<std::size_t>(r) * q, q);
    auto fh = transforms::apply_relation_t(theta, phi, mu, p, q, eh);
    S dist = manifold::manhattan_distance_ultra(fh, et, p, q, alpha);
    return S(0.0) - dist * dist + P[off_bh + h] + P[off_bt + t] + S(margin);
  }
};

// ---------------------------------------------------------------------------
// Hyper-relational box model: rotate+translate the head, span a query box,
// shrink it per qualifier, intersect, and score by point-to-box distance.

struct HyperIdFact {
  IdTriple primal;
  std::vector<std::pair<int, int>> qualifiers;  // (key relation id, value entity id)
};

struct ShrinkEModel {
  int n_ent = 0, n_rel = 0, d = 0;
  double temp = 1.0;
  std::size_t off_ent = 0, off_theta = 0, off_b = 0, off_delta = 0, off_qrel = 0, off_w1 = 0,
              off_b1 = 0, off_w2 = 0, off_b2 = 0, total = 0;

  ShrinkEModel(int ents, int rels, int d_, double temp_ = 1.0)
      : n_ent(ents), n_rel(rels), d(d_), temp(temp_) {
    if (d <= 0 || d % 2) throw Error("ShrinkEModel: d must be even positive");
    const std::size_t dd = static_cast<std::size_t>(d);
    off_ent = 0;
    off_theta = off_ent + static_cast<std::size_t>(n_ent) * dd;
    off_b = off_theta + static_cast<std::size_t>(n_rel) * (dd / 2);
    off_delta = off_b + static_cast<std::size_t>(n_rel) * dd;
    off_qrel = off_delta + static_cast<std::size_t>(n_rel) * dd;
    off_w1 = off_qrel + static_cast<std::size_t>(n_rel) * dd;
    off_b1 = off_w1 + 2 * dd * 3 * dd;
    off_w2 = off_b1 + 2 * dd;
    off_b2 = off_w2 + 2 * dd * 2 * dd;
    total = off_b2 + 2 * dd;
  }

  std::size_t num_params() const { return total; }

  std::vector<ParamGroup> param_groups() const {
    const std::size_t dd = static_cast<std::size_t>(d);
    return {{"entities", off_ent, static_cast<std::size_t>(n_ent) * dd},
            {"theta", off_theta, static_cast<std::size_t>(n_rel) * (dd / 2)},
            {"translation", off_b, static_cast<std::size_t>(n_rel) * dd},
            {"offset", off_delta, static_cast<std::size_t>(n_rel) * dd},
            {"qualifier_rel", off_qrel, static_cast<std::size_t>(n_rel) * dd},
            {"mlp_w1", off_w1, 6 * dd * dd},
            {"mlp_b1", off_b1, 2 * dd},
            {"mlp_w2", off_w2, 4 * dd * dd},
            {"mlp_b2", off_b2, 2 * dd}};
  }

  void init(Vec& params, std::mt19937_64& rng) const {
    params.assign(total, 0.0);
    const double s = 0.1 / std::sqrt(static_cast<double>(d));
    std::uniform_real_distribution<double> u(-s, s), ang(-M_PI, M_PI);
    for (std::size_t i = off_ent; i < off_theta; ++i) params[i] = u(rng);
    for (std::size_t i = off_theta; i < off_b; ++i) params[i] = ang(rng);
    for (std::size_t i = off_b; i < off_w1; ++i) params[i] = u(rng);
    std::uniform_real_distribution<double> w(-1.0 / std::sqrt(3.0 * d), 1.0 / std::sqrt(3.0 * d));
    for (std::size_t i = off_w1; i < total; ++i) params[i] = w(rng);
  }

  template <class S>
  boxes::BoxT<S> query_box(const std::vector<S>& P, int h, int r,
                           const std::vector<std::pair<int, int>>& qualifiers) const {
    if (h < 0 || h >= n_ent || r < 0 || r >= n_rel) throw Error("unknown entity or relation id");
    for (const auto& [k, v] : qualifiers)
      if (k < 0 || k >= n_rel || v < 0 || v >= n_ent)
        throw Error("unknown qualifier key or value id");
    using std::cos;
    using std::sin;
    const std::size_t dd = static_cast<std::size_t>(d);
    auto eh = slice(P, off_ent + static_cast<std::size_t>(h) * dd, dd);
    auto theta = slice(P, off_theta + static_cast<std::size_t>(r) * (dd / 2), dd / 2);
    auto b = slice(P, off_b + static_cast<std::size_t>(r) * dd, dd);
    auto delta = slice(P, off_delta + static_cast<std::size_t>(r) * dd, dd);

    // H_r(e_h) = Theta_r e_h + b_r with Givens rotation blocks.
    std::vector<S> center(dd);
    for (std::size_t k = 0; k < dd / 2; ++k) {
      const S c = cos(theta[k]), s = sin(theta[k]);
      center[2 * k] = c * eh[2 * k] - s * eh[2 * k + 1] + b[2 * k];
      center[2 * k + 1] = s * eh[2 * k] + c * eh[2 * k + 1] + b[2 * k + 1];
    }
    boxes::BoxT<S> span = boxes::span_box(center, delta, temp);
    boxes::BoxT<S> out = span;
    for (const auto& [k, v] : qualifiers) {
      auto sv = shrink_vectors(P, r, k, v);
      out = boxes::box_intersection(out, boxes::shrink_box(span, sv.first, sv.second));
    }
    return out;
  }

  // One hidden tanh layer of width 2d over concat(r, k, v); output splits
  // into the two shrink vectors.
  template <class S>
  std::pair<std::vector<S>, std::vector<S>> shrink_vectors(const std::vector<S>& P, int r, int k,
                                                           int v) const {
    using std::tanh;
    const std::size_t dd = static_cast<std::size_t>(d);
    std::vector<S> in;
    in.reserve(3 * dd);
    auto push = [&](std::size_t off) {
      for (std::size_t i = 0; i < dd; ++i) in.push_back(P[off + i]);
    };
    push(off_qrel + static_cast<std::size_t>(r) * dd);
    push(off_qrel + static_cast<std::size_t>(k) * dd);
    push(off_ent + static_cast<std::size_t>(v) * dd);
    std::vector<S> hid(2 * dd, S(0.0));
    for (std::size_t i = 0; i < 2 * dd; ++i) {
      S acc = P[off_b1 + i];
      const std::size_t row = off_w1 + i * 3 * dd;
      for (std::size_t j = 0; j < 3 * dd; ++j) acc = acc + P[row + j] * in[j];
      hid[i] = tanh(acc);
    }
    std::vector<S> lo(dd), hi(dd);
    for (std::size_t i = 0; i < 2 * dd; ++i) {
      S acc = P[off_b2 + i];
      const std::size_t row = off_w2 + i * 2 * dd;
      for (std::size_t j = 0; j < 2 * dd; ++j) acc = acc + P[row + j] * hid[j];
      if (i < dd)
        lo[i] = acc;
      else
        hi[i - dd] = acc;
    }
    return {std::move(lo), std::move(hi)};
  }

  template <class S>
  S score(const std::vector<S>& P, const HyperIdFact& f) const {
    const std::size_t dd = static_cast<std::size_t>(d);
    if (f.primal.t < 0 || f.primal.t >= n_ent) throw Error("unknown entity id");
    auto box = query_box(P, f.primal.h, f.primal.r, f.qualifiers);
    auto et = slice(P, off_ent + static_cast<std::size_t>(f.primal.t) * dd, dd);
    if (val(boxes::side_length_sum(box)) == 0.0)
      return S(-std::numeric_limits<double>::infinity());
    return S(0.0) - boxes::point_to_box_distance(et, box);
  }
};

// ---------------------------------------------------------------------------
// Nested-fact hypercomplex model.

struct NestedIdFact {
  IdTriple head;
  int nrel = 0;
  IdTriple tail;
};

struct NestEModel {
  using Algebra = hypercomplex::Algebra;
  int n_ent = 0, n_rel = 0, n_nrel = 0, d = 0;
  Algebra kind = Algebra::Quaternion;
  double lambda1 = 0.5;
  std::size_t off_ent = 0, off_rot = 0, off_trans = 0, off_nrot = 0, off_ntrans = 0, total = 0;

  NestEModel(int ents, int rels, int nrels, int d_, Algebra k, double l1 = 0.5)
      : n_ent(ents), n_rel(rels), n_nrel(nrels), d(d_), kind(k), lambda1(l1) {
    if (d <= 0) throw Error("NestEModel: d must be positive");
    const std::size_t dd = static_cast<std::size_t>(d);
    off_ent = 0;
    off_rot = off_ent + static_cast<std::size_t>(n_ent) * 4 * dd;
    off_trans = off_rot + static_cast<std::size_t>(n_rel) * 4 * dd;
    off_nrot = off_trans + static_cast<std::size_t>(n_rel) * 4 * dd;
    off_ntrans = off_nrot + static_cast<std::size_t>(n_nrel) * 36 * dd;
    total = off_ntrans + static_cast<std::size_t>(n_nrel) * 12 * dd;
  }

  std::size_t num_params() const { return total; }

  std::vector<ParamGroup> param_groups() const {
    const std::size_t dd = static_cast<std::size_t>(d);
    return {{"entities", off_ent, static_cast<std::size_t>(n_ent) * 4 * dd},
            {"rotors", off_rot, static_cast<std::size_t>(n_rel) * 4 * dd},
            {"translations", off_trans, static_cast<std::size_t>(n_rel) * 4 * dd},
            {"nested_rotors", off_nrot, static_cast<std::size_t>(n_nrel) * 36 * dd},
            {"nested_translations", off_ntrans, static_cast<std::size_t>(n_nrel) * 12 * dd}};
  }

  void init(Vec& params, std::mt19937_64& rng) const {
    params.assign(total, 0.0);
    const double s = 0.1 / std::sqrt(static_cast<double>(4 * d));
    std::uniform_real_distribution<double> u(-s, s);
    for (double& p : params) p = u(rng);
  }

  template <class S>
  hypercomplex::HVec<S> hvec_at(const std::vector<S>& P, std::size_t off) const {
    hypercomplex::HVec<S> v(static_cast<std::size_t>(d));
    const std::size_t dd = static_cast<std::size_t>(d);
    for (std::size_t i = 0; i < dd; ++i)
      v[i] = hypercomplex::HNum<S>(P[off + i], P[off + dd + i], P[off + 2 * dd + i],
                                   P[off + 3 * dd + i]);
    return v;
  }

  template <class S>
  hypercomplex::HVec<S> entity(const std::vector<S>& P, int e) const {
    return hvec_at(P, off_ent + static_cast<std::size_t>(e) * 4 * d);
  }

  template <class S>
  S atomic_score(const std::vector<S>& P, int h, int r, int t) const {
    using namespace hypercomplex;
    if (h < 0 || h >= n_ent || t < 0 || t >= n_ent) throw Error("unknown entity id");
    if (r < 0 || r >= n_rel) throw Error("unknown relation id");
    auto eh = entity(P, h);
    auto et = entity(P, t);
    auto rot = hv_normalize(hvec_at(P, off_rot + static_cast<std::size_t>(r) * 4 * d));
    auto tr = hvec_at(P, off_trans + static_cast<std::size_t>(r) * 4 * d);
    auto hp = hv_hamilton(hv_add(eh, tr), rot, kind);
    return hv_inner(hp, et);
  }

  template <class S>
  hypercomplex::HTriple<S> triple_matrix(const std::vector<S>& P, const IdTriple& t) const {
    return hypercomplex::HTriple<S>{entity(P, t.h),
                                    hvec_at(P, off_rot + static_cast<std::size_t>(t.r) * 4 * d),
                                    entity(P, t.t)};
  }

  template <class S>
  S nested_score(const std::vector<S>& P, const NestedIdFact& f) const {
    using namespace hypercomplex;
    if (f.nrel < 0 || f.nrel >= n_nrel) throw Error("unknown nested relation id");
    auto ti = triple_matrix(P, f.head);
    auto tj = triple_matrix(P, f.tail);
    const std::size_t base = off_nrot + static_cast<std::size_t>(f.nrel) * 36 * d;
    HMat3<S> rot;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        rot[i][j] = hvec_at(P, base + static_cast<std::size_t>(i * 3 + j) * 4 * d);
    const std::size_t tbase = off_ntrans + static_cast<std::size_t>(f.nrel) * 12 * d;
    HTriple<S> trans{hvec_at(P, tbase), hvec_at(P, tbase + 4 * static_cast<std::size_t>(d)),
                     hvec_at(P, tbase + 8 * static_cast<std::size_t>(d))};
    auto moved = hmat_rotate(ht_add(ti, trans), rot, kind);
    return ht_inner(moved, tj);
  }
};

// ---------------------------------------------------------------------------
// EL++ box model.

struct ConceptRef {
  bool nominal = false;  // true: index into individuals, box is a point
  int idx = -1;
};

struct IdElAxiom {
  data::ElForm form = data::ElForm::NF1;
  ConceptRef c, c2, d;
  int role = -1;
  int ind_a = -1, ind_b = -1;
};

struct BoxELModel {
  int n_con = 0, n_ind = 0, n_role = 0, d = 0;
  double eps = 0.01, temp = 1.0, phi = 0.05;
  std::size_t off_con = 0, off_ind = 0, off_scale = 0, off_shift = 0, total = 0;

  BoxELModel(int cons, int inds, int roles, int d_)
      : n_con(cons), n_ind(inds), n_role(roles), d(d_) {
    if (d <= 0) throw Error("BoxELModel: d must be positive");
    const std::size_t dd = static_cast<std::size_t>(d);
    off_con = 0;
    off_ind = off_con + static_cast<std::size_t>(n_con) * 2 * dd;
    off_scale = off_ind + static_cast<std::size_t>(n_ind) * dd;
    off_shift = off_scale + static_cast<std::size_t>(n_role) * dd;
    total = off_shift + static_cast<std::size_t>(n_role) * dd;
  }

  std::size_t num_params() const { return total; }

  std::vector<ParamGroup> param_groups() const {
    const std::size_t dd = static_cast<std::size_t>(d);
    return {{"concept_corners", off_con, static_cast<std::size_t>(n_con) * 2 * dd},
            {"individuals", off_ind, static_cast<std::size_t>(n_ind) * dd},
            {"role_scale_raw", off_scale, static_cast<std::size_t>(n_role) * dd},
            {"role_shift", off_shift, static_cast<std::size_t>(n_role) * dd}};
  }

  // Boxes start non-empty inside the unit box; role maps start near identity.
  void init(Vec& params, std::mt19937_64& rng) const {
    params.assign(total, 0.0);
    std::uniform_real_distribution<double> lo(0.0, 0.4), wid(0.2, 0.5), pt(0.1, 0.9);
    const std::size_t dd = static_cast<std::size_t>(d);
    for (int c = 0; c < n_con; ++c)
      for (std::size_t i = 0; i < dd; ++i) {
        const double m = lo(rng);
        params[off_con + c * 2 * dd + i] = m;
        params[off_con + c * 2 * dd + dd + i] = m + wid(rng);
      }
    for (std::size_t i = off_ind; i < off_scale; ++i) params[i] = pt(rng);
    // softplus(0.5413) ~= 1
    for (std::size_t i = off_scale; i < off_shift; ++i) params[i] = 0.5413;
  }

  template <class S>
  boxes::BoxT<S> box_of(const std::vector<S>& P, const ConceptRef& ref) const {
    const std::size_t dd = static_cast<std::size_t>(d);
    if (ref.idx < 0 || ref.idx >= (ref.nominal ? n_ind : n_con))
      throw Error("unknown concept or individual id");
    if (ref.nominal) {
      auto p = slice(P, off_ind + static_cast<std::size_t>(ref.idx) * dd, dd);
      return boxes::BoxT<S>(p, p);
    }
    const std::size_t base = off_con + static_cast<std::size_t>(ref.idx) * 2 * dd;
    return boxes::BoxT<S>(slice(P, base, dd), slice(P, base + dd, dd));
  }

  template <class S>
  boxes::AffineRoleMapT<S> role_map(const std::vector<S>& P, int role) const {
    const std::size_t dd = static_cast<std::size_t>(d);
    boxes::AffineRoleMapT<S> t;
    t.scale.resize(dd);
    t.shift.resize(dd);
    for (std::size_t i = 0; i < dd; ++i) {
      t.scale[i] = softplus(P[off_scale + static_cast<std::size_t>(role) * dd + i]);
      t.shift[i] = P[off_shift + static_cast<std::size_t>(role) * dd + i];
    }
    return t;
  }

  template <class S>
  S axiom_loss(const std::vector<S>& P, const IdElAxiom& ax) const {
    using data::ElForm;
    switch (ax.form) {
      case ElForm::NF1:
        return boxes::disjoint_soft(box_of(P, ax.c), box_of(P, ax.d), temp);
      case ElForm::NF1Bot: {
        if (ax.c.nominal) throw Error("inconsistent axiom: nominal subsumed by bottom");
        auto b = box_of(P, ax.c);
        return vmax(S(0.0), b.hi[0] - b.lo[0] + S(eps));
      }
      case ElForm::NF2:
        return boxes::disjoint_soft(boxes::box_intersection(box_of(P, ax.c), box_of(P, ax.c2)),
                                    box_of(P, ax.d), temp);
      case ElForm::NF2Bot: {
        if (ax.c.nominal && ax.c2.nominal && ax.c.idx == ax.c2.idx)
          throw Error("inconsistent axiom: nominal conjunction with itself subsumed by bottom");
        auto b1 = box_of(P, ax.c);
        auto b2 = box_of(P, ax.c2);
        S num = boxes::modified_volume(boxes::box_intersection(b1, b2), eps);
        return num / (boxes::modified_volume(b1, eps) + boxes::modified_volume(b2, eps));
      }
      case ElForm::NF3:
        return boxes::disjoint_soft(boxes::affine_map_box(role_map(P, ax.role), box_of(P, ax.c)),
                                    box_of(P, ax.d), temp);
      case ElForm::NF4:
        return boxes::disjoint_soft(
            boxes::affine_map_box_inverse(role_map(P, ax.role), box_of(P, ax.c)),
            box_of(P, ax.d), temp);
      case ElForm::ConceptAssertion: {
        const std::size_t dd = static_cast<std::size_t>(d);
        auto pt = slice(P, off_ind + static_cast<std::size_t>(ax.ind_a) * dd, dd);
        auto b = box_of(P, ax.c);
        S acc(0.0);
        for (std::size_t i = 0; i < dd; ++i) {
          acc = acc + sq(vmax(S(0.0), pt[i] - b.hi[i]));
          acc = acc + sq(vmax(S(0.0), b.lo[i] - pt[i]));
        }
        return acc;
      }
      case ElForm::RoleAssertion: {
        const std::size_t dd = static_cast<std::size_t>(d);
        auto pa = slice(P, off_ind + static_cast<std::size_t>(ax.ind_a) * dd, dd);
        auto pb = slice(P, off_ind + static_cast<std::size_t>(ax.ind_b) * dd, dd);
        auto mapped = boxes::affine_apply(role_map(P, ax.role), pa);
        S acc(0.0);
        for (std::size_t i = 0; i < dd; ++i) acc = acc + sq(mapped[i] - pb[i]);
        return sqrt_safe(acc);
      }
    }
    throw Error("axiom_loss: bad form");
  }

  // Unit-box regularizer over all sign-nonempty concept boxes.
  template <class S>
  S regularizer(const std::vector<S>& P) const {
    const std::size_t dd = static_cast<std::size_t>(d);
    S acc(0.0);
    for (int c = 0; c < n_con; ++c) {
      const std::size_t base = off_con + static_cast<std::size_t>(c) * 2 * dd;
      bool empty = false;
      for (std::size_t i = 0; i < dd; ++i)
        if (val(P[base + i]) >= val(P[base + dd + i])) empty = true;
      if (empty) continue;
      for (std::size_t i = 0; i < dd; ++i) {
        acc = acc + vmax(S(0.0), P[base + dd + i] - S(1.0 - eps));
        acc = acc + vmax(S(0.0), S(0.0) - P[base + i] - S(eps));
      }
    }
    return acc;
  }

  // phi-weighted pull-apart for a sampled non-subsumption pair.
  template <class S>
  S non_subsumption_loss(const std::vector<S>& P, const ConceptRef& c,
                         const ConceptRef& dref) const {
    auto b1 = box_of(P, c);
    auto b2 = box_of(P, dref);
    return S(phi) * (S(1.0) - boxes::disjoint_soft(b1, b2, temp));
  }

  // Margin loss for a corrupted role assertion.
  template <class S>
  S role_negative_loss(const std::vector<S>& P, int role, int a, int b, double gamma = 1.0) const {
    const std::size_t dd = static_cast<std::size_t>(d);
    auto pa = slice(P, off_ind + static_cast<std::size_t>(a) * dd, dd);
    auto pb = slice(P, off_ind + static_cast<std::size_t>(b) * dd, dd);
    auto mapped = boxes::affine_apply(role_map(P, role), pa);
    S acc(0.0);
    for (std::size_t i = 0; i < dd; ++i) acc = acc + sq(mapped[i] - pb[i]);
    return vmax(S(0.0), S(gamma) - sqrt_safe(acc));
  }

  double subsumption_score(const Vec& P, const ConceptRef& c, const ConceptRef& dref) const {
    auto b1 = box_of(P, c);
    auto b2 = box_of(P, dref);
    const double v1 = boxes::modified_volume(b1, eps);
    if (v1 == 0.0) throw Error("subsumption_score: zero-volume subject box");
    return boxes::modified_volume(boxes::box_intersection(b1, b2), eps) / v1;
  }
};

// Resolve name-based axioms against vocabularies of concepts/individuals/roles.
struct BoxELData {
  data::Vocab vocab;
  std::vector<IdElAxiom> axioms;
  std::vector<std::pair<int, int>> nf1_pairs;  // concept-to-concept subsumptions
};

inline BoxELData resolve_el(const std::vector<data::ElAxiom>& axioms) {
  BoxELData out;
  for (const auto& ax : axioms) {  // individuals first, so nominals resolve
    if (ax.form == data::ElForm::ConceptAssertion) out.vocab.ind(ax.a);
    if (ax.form == data::ElForm::RoleAssertion) {
      out.vocab.ind(ax.a);
      out.vocab.ind(ax.b);
    }
  }
  auto ref = [&](const std::string& name) {
    auto it = out.vocab.individual.find(name);
    if (it != out.vocab.individual.end()) return ConceptRef{true, it->second};
    return ConceptRef{false, out.vocab.con(name)};
  };
  for (const auto& ax : axioms) {
    IdElAxiom id;
    id.form = ax.form;
    switch (ax.form) {
      case data::ElForm::NF1:
        id.c = ref(ax.c);
        id.d = ref(ax.d);
        if (!id.c.nominal && !id.d.nominal) out.nf1_pairs.emplace_back(id.c.idx, id.d.idx);
        break;
      case data::ElForm::NF2:
        id.c = ref(ax.c);
        id.c2 = ref(ax.c2);
        id.d = ref(ax.d);
        break;
      case data::ElForm::NF3:
        id.c = ref(ax.c);
        id.role = out.vocab.rol(ax.r);
        id.d = ref(ax.d);
        break;
      case data::ElForm::NF4:
        id.role = out.vocab.rol(ax.r);
        id.c = ref(ax.c);
        id.d = ref(ax.d);
        break;
      case data::ElForm::NF1Bot: id.c = ref(ax.c); break;
      case data::ElForm::NF2Bot:
        id.c = ref(ax.c);
        id.c2 = ref(ax.c2);
        break;
      case data::ElForm::ConceptAssertion:
        id.c = ref(ax.c);
        id.ind_a = out.vocab.lookup(out.vocab.individual, ax.a, "individual");
        break;
      case data::ElForm::RoleAssertion:
        id.role = out.vocab.rol(ax.r);
        id.ind_a = out.vocab.lookup(out.vocab.individual, ax.a, "individual");
        id.ind_b = out.vocab.lookup(out.vocab.individual, ax.b, "individual");
        break;
    }
    out.axioms.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Label-ball model for the constraint geometry (direct label embeddings).

struct HmiModel {
  int n_labels = 0, dim = 0;
  double margin = 1e-3;

  HmiModel(int labels, int dim_, double margin_ = 1e-3)
      : n_labels(labels), dim(dim_), margin(margin_) {}

  std::size_t num_params() const {
    return static_cast<std::size_t>(n_labels) * static_cast<std::size_t>(dim);
  }

  std::vector<ParamGroup> param_groups() const { return {{"label_centers", 0, num_params()}}; }

  void init(Vec& params, std::mt19937_64& rng) const {
    params.assign(num_params(), 0.0);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> rad(0.3, 0.7);
    for (int l = 0; l < n_labels; ++l) {
      Vec dir(static_cast<std::size_t>(dim));
      for (double& x : dir) x = g(rng);
      const double n = norm2(dir);
      const double r = rad(rng);
      for (int i = 0; i < dim; ++i)
        params[static_cast<std::size_t>(l) * dim + i] = dir[i] / n * r;
    }
  }

  template <class S>
  std::vector<poincare::EnclosingBallT<S>> balls(const std::vector<S>& P) const {
    std::vector<poincare::EnclosingBallT<S>> out;
    out.reserve(static_cast<std::size_t>(n_labels));
    for (int l = 0; l < n_labels; ++l)
      out.push_back(poincare::enclosing_ball(slice(P, static_cast<std::size_t>(l) * dim, dim)));
    return out;
  }

  // Margin-padded hinge losses; the raw (margin-free) constraint losses are
  // what the verification reads.
  template <class S>
  S constraint_loss(const std::vector<S>& P, const poincare::HexGraph& hex) const {
    auto bs = balls(P);
    S acc(0.0);
    for (const auto& [c, p] : hex.hier)
      acc = acc + vmax(S(0.0), poincare::center_gap(bs[c], bs[p]) + bs[c].radius -
                                   bs[p].radius + S(margin));
    for (const auto& [a, b] : hex.excl)
      acc = acc + vmax(S(0.0), bs[a].radius + bs[b].radius - poincare::center_gap(bs[a], bs[b]) +
                                   S(margin));
    return acc;
  }

  Vec raw_constraint_losses(const Vec& P, const poincare::HexGraph& hex) const {
    auto bs = balls(P);
    Vec out;
    for (const auto& [c, p] : hex.hier) out.push_back(poincare::inside_loss(bs[c], bs[p]));
    for (const auto& [a, b] : hex.excl) out.push_back(poincare::disjoint_loss(bs[a], bs[b]));
    return out;
  }

  // Keep centers nonzero and strictly inside the ball after a step.
  void project_params(Vec& P) const {
    for (int l = 0; l < n_labels; ++l) {
      Vec c(P.begin() + static_cast<std::size_t>(l) * dim,
            P.begin() + static_cast<std::size_t>(l + 1) * dim);
      double n = norm2(c);
      if (n < 1e-3) {
        // nudge a degenerate center outward along its first axis
        c[0] += 1e-3;
        n = norm2(c);
      }
      if (n >= poincare::kBallEdge) {
        for (double& x : c) x *= poincare::kBallEdge / n;
      }
      std::copy(c.begin(), c.end(), P.begin() + static_cast<std::size_t>(l) * dim);
    }
  }
};

}  // namespace models
}  // namespace geore
