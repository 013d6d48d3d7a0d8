#pragma once

#include <random>
#include <set>
#include <vector>

#include "geore/models.hpp"
#include "geore/training.hpp"

// Train-loop drivers: one per model family. A driver owns the id-resolved
// dataset and assembles the batch loss; the same templated loss body backs
// both the tape path (training) and the double path (curves, self-check), so
// the two always consume the negative-sampling rng identically.

namespace geore {
namespace drivers {

using models::IdTriple;

inline int corrupt_entity(int keep, int n_ent, std::mt19937_64& rng) {
  if (n_ent < 2) throw Error("negative sampling: need at least two entities");
  std::uniform_int_distribution<int> pick(0, n_ent - 1);
  int e = pick(rng);
  while (e == keep) e = pick(rng);
  return e;
}

inline IdTriple corrupt_triple(const IdTriple& t, int n_ent, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> side(0, 1);
  IdTriple c = t;
  if (side(rng) == 0)
    c.h = corrupt_entity(t.h, n_ent, rng);
  else
    c.t = corrupt_entity(t.t, n_ent, rng);
  return c;
}

// ---------------------------------------------------------------------------

struct UltraEDriver {
  models::UltraEModel model;
  std::vector<IdTriple> facts;
  int n_neg = 10;
  double smoothing = 0.0;

  UltraEDriver(models::UltraEModel m, std::vector<IdTriple> f, int neg, double sm = 0.0)
      : model(std::move(m)), facts(std::move(f)), n_neg(neg), smoothing(sm) {}

  std::size_t count() const { return facts.size(); }
  std::size_t num_params() const { return model.num_params(); }
  void init(Vec& p, std::mt19937_64& rng) const { model.init(p, rng); }
  void project(Vec&) const {}

  template <class S>
  S loss_impl(const std::vector<S>& P, const std::vector<int>& idx,
              std::mt19937_64& rng) const {
    std::vector<S> pos, neg;
    pos.reserve(idx.size());
    neg.reserve(idx.size() * static_cast<std::size_t>(n_neg));
    for (int i : idx) {
      const IdTriple& f = facts[static_cast<std::size_t>(i)];
      pos.push_back(model.score(P, f.h, f.r, f.t));
      for (int k = 0; k < n_neg; ++k) {
        const IdTriple c = corrupt_triple(f, model.n_ent, rng);
        neg.push_back(model.score(P, c.h, c.r, c.t));
      }
    }
    return training::bce_from_scores(pos, neg, smoothing);
  }

  ad::Var batch_loss(ad::Tape&, std::vector<ad::Var>& P, const std::vector<int>& idx,
                     std::mt19937_64& rng) const {
    return loss_impl(P, idx, rng);
  }
  double eval_loss(const Vec& P, const std::vector<int>& idx, std::mt19937_64& rng) const {
    return loss_impl(P, idx, rng);
  }
};

inline Vec ultrae_score_tails(const models::UltraEModel& m, const Vec& P, int h, int r) {
  auto eh = m.entity_point(P, h);
  auto theta = models::slice(P, m.off_theta + static_cast<std::size_t>(r) * (m.d / 2), m.d / 2);
  auto phi = models::slice(P, m.off_phi + static_cast<std::size_t>(r) * (m.d / 2), m.d / 2);
  auto mu = models::slice(P, m.off_mu + static_cast<std::size_t>(r) * m.q, m.q);
  auto fh = transforms::apply_relation_t(theta, phi, mu, m.p, m.q, eh);
  Vec out(static_cast<std::size_t>(m.n_ent));
  for (int t = 0; t < m.n_ent; ++t) {
    auto et = m.entity_point(P, t);
    const double dist = manifold::manhattan_distance_ultra(fh, et, m.p, m.q, m.alpha);
    out[static_cast<std::size_t>(t)] =
        -dist * dist + P[m.off_bh + h] + P[m.off_bt + t] + m.margin;
  }
  return out;
}

inline Vec ultrae_score_heads(const models::UltraEModel& m, const Vec& P, int r, int t) {
  Vec out(static_cast<std::size_t>(m.n_ent));
  for (int h = 0; h < m.n_ent; ++h) out[static_cast<std::size_t>(h)] = m.score(P, h, r, t);
  return out;
}

// ---------------------------------------------------------------------------

struct ShrinkEDriver {
  models::ShrinkEModel model;
  std::vector<models::HyperIdFact> facts;
  int n_neg = 10;
  double smoothing = 0.1;

  ShrinkEDriver(models::ShrinkEModel m, std::vector<models::HyperIdFact> f, int neg,
                double sm = 0.1)
      : model(std::move(m)), facts(std::move(f)), n_neg(neg), smoothing(sm) {}

  std::size_t count() const { return facts.size(); }
  std::size_t num_params() const { return model.num_params(); }
  void init(Vec& p, std::mt19937_64& rng) const { model.init(p, rng); }
  void project(Vec&) const {}

  template <class S>
  S loss_impl(const std::vector<S>& P, const std::vector<int>& idx,
              std::mt19937_64& rng) const {
    std::vector<S> pos, neg;
    for (int i : idx) {
      const auto& f = facts[static_cast<std::size_t>(i)];
      pos.push_back(model.score(P, f));
      for (int k = 0; k < n_neg; ++k) {
        models::HyperIdFact c = f;
        c.primal = corrupt_triple(f.primal, model.n_ent, rng);
        neg.push_back(model.score(P, c));
      }
    }
    return training::bce_from_scores(pos, neg, smoothing);
  }

  ad::Var batch_loss(ad::Tape&, std::vector<ad::Var>& P, const std::vector<int>& idx,
                     std::mt19937_64& rng) const {
    return loss_impl(P, idx, rng);
  }
  double eval_loss(const Vec& P, const std::vector<int>& idx, std::mt19937_64& rng) const {
    return loss_impl(P, idx, rng);
  }
};

inline Vec shrinke_score_tails(const models::ShrinkEModel& m, const Vec& P,
                               const models::HyperIdFact& f) {
  auto box = m.query_box(P, f.primal.h, f.primal.r, f.qualifiers);
  Vec out(static_cast<std::size_t>(m.n_ent));
  const bool collapsed = boxes::side_length_sum(box) == 0.0;
  for (int t = 0; t < m.n_ent; ++t) {
    if (collapsed) {
      out[static_cast<std::size_t>(t)] = -std::numeric_limits<double>::infinity();
      continue;
    }
    auto et = models::slice(P, m.off_ent + static_cast<std::size_t>(t) * m.d,
                            static_cast<std::size_t>(m.d));
    out[static_cast<std::size_t>(t)] = -boxes::point_to_box_distance(et, box);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct NestEDriver {
  models::NestEModel model;
  std::vector<IdTriple> atomic;
  std::vector<models::NestedIdFact> nested;
  std::vector<IdTriple> pool;  // candidate replacements for nested corruption
  int n_neg = 10;

  NestEDriver(models::NestEModel m, std::vector<IdTriple> at,
              std::vector<models::NestedIdFact> ne, int neg)
      : model(std::move(m)), atomic(std::move(at)), nested(std::move(ne)), n_neg(neg) {
    std::set<IdTriple> seen(atomic.begin(), atomic.end());
    for (const auto& f : nested) {
      seen.insert(f.head);
      seen.insert(f.tail);
    }
    pool.assign(seen.begin(), seen.end());
  }

  std::size_t count() const { return atomic.size() + nested.size(); }
  std::size_t num_params() const { return model.num_params(); }
  void init(Vec& p, std::mt19937_64& rng) const { model.init(p, rng); }
  void project(Vec&) const {}

  IdTriple corrupt_component(const IdTriple& keep, std::mt19937_64& rng) const {
    if (pool.size() < 2) throw Error("nested negative sampling: need at least two triples");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    IdTriple c = pool[pick(rng)];
    while (c == keep) c = pool[pick(rng)];
    return c;
  }

  template <class S>
  S loss_impl(const std::vector<S>& P, const std::vector<int>& idx,
              std::mt19937_64& rng) const {
    std::vector<S> apos, aneg, npos, nneg;
    std::uniform_int_distribution<int> side(0, 1);
    for (int i : idx) {
      if (static_cast<std::size_t>(i) < atomic.size()) {
        const IdTriple& f = atomic[static_cast<std::size_t>(i)];
        apos.push_back(model.atomic_score(P, f.h, f.r, f.t));
        for (int k = 0; k < n_neg; ++k) {
          const IdTriple c = corrupt_triple(f, model.n_ent, rng);
          aneg.push_back(model.atomic_score(P, c.h, c.r, c.t));
        }
      } else {
        const auto& f = nested[static_cast<std::size_t>(i) - atomic.size()];
        npos.push_back(model.nested_score(P, f));
        for (int k = 0; k < n_neg; ++k) {
          models::NestedIdFact c = f;
          if (side(rng) == 0)
            c.head = corrupt_component(f.head, rng);
          else
            c.tail = corrupt_component(f.tail, rng);
          nneg.push_back(model.nested_score(P, c));
        }
      }
    }
    S loss = training::softplus_rank_loss(apos, aneg);
    if (!npos.empty() || !nneg.empty())
      loss = loss + S(model.lambda1) * training::softplus_rank_loss(npos, nneg);
    return loss;
  }

  ad::Var batch_loss(ad::Tape&, std::vector<ad::Var>& P, const std::vector<int>& idx,
                     std::mt19937_64& rng) const {
    return loss_impl(P, idx, rng);
  }
  double eval_loss(const Vec& P, const std::vector<int>& idx, std::mt19937_64& rng) const {
    return loss_impl(P, idx, rng);
  }
};

inline Vec neste_score_tails(const models::NestEModel& m, const Vec& P, int h, int r) {
  using namespace hypercomplex;
  auto eh = m.entity(P, h);
  auto rot = hv_normalize(m.hvec_at(P, m.off_rot + static_cast<std::size_t>(r) * 4 * m.d));
  auto tr = m.hvec_at(P, m.off_trans + static_cast<std::size_t>(r) * 4 * m.d);
  auto hp = hv_hamilton(hv_add(eh, tr), rot, m.kind);
  Vec out(static_cast<std::size_t>(m.n_ent));
  for (int t = 0; t < m.n_ent; ++t)
    out[static_cast<std::size_t>(t)] = hv_inner(hp, m.entity(P, t));
  return out;
}

// ---------------------------------------------------------------------------

struct BoxELDriver {
  models::BoxELModel model;
  std::vector<models::IdElAxiom> axioms;
  std::vector<std::pair<int, int>> nf1_pairs;
  double phi = 0.05;
  double neg_gamma = 1.0;

  BoxELDriver(models::BoxELModel m, models::BoxELData d, double phi_)
      : model(std::move(m)), axioms(std::move(d.axioms)), nf1_pairs(std::move(d.nf1_pairs)),
        phi(phi_) {
    model.phi = phi;
  }

  std::size_t count() const { return axioms.size(); }
  std::size_t num_params() const { return model.num_params(); }
  void init(Vec& p, std::mt19937_64& rng) const { model.init(p, rng); }
  void project(Vec&) const {}

  template <class S>
  S loss_impl(const std::vector<S>& P, const std::vector<int>& idx,
              std::mt19937_64& rng) const {
    S loss(0.0);
    std::uniform_int_distribution<int> side(0, 1);
    for (int i : idx) {
      const auto& ax = axioms[static_cast<std::size_t>(i)];
      loss = loss + model.axiom_loss(P, ax);
      if (phi > 0.0 && ax.form == data::ElForm::NF1 && model.n_con > 1 && !ax.c.nominal &&
          !ax.d.nominal) {
        // corrupted non-subsumption pair C !<= D' or C' !<= D
        std::uniform_int_distribution<int> pick(0, model.n_con - 1);
        models::ConceptRef c = ax.c, dd = ax.d;
        if (side(rng) == 0) {
          int repl = pick(rng);
          while (repl == ax.d.idx) repl = pick(rng);
          dd = models::ConceptRef{false, repl};
        } else {
          int repl = pick(rng);
          while (repl == ax.c.idx) repl = pick(rng);
          c = models::ConceptRef{false, repl};
        }
        loss = loss + model.non_subsumption_loss(P, c, dd);
      }
      if (ax.form == data::ElForm::RoleAssertion && model.n_ind > 1) {
        int a = ax.ind_a, b = ax.ind_b;
        if (side(rng) == 0)
          a = corrupt_entity(a, model.n_ind, rng);
        else
          b = corrupt_entity(b, model.n_ind, rng);
        loss = loss + model.role_negative_loss(P, ax.role, a, b, neg_gamma);
      }
    }
    return loss + model.regularizer(P);
  }

  ad::Var batch_loss(ad::Tape&, std::vector<ad::Var>& P, const std::vector<int>& idx,
                     std::mt19937_64& rng) const {
    return loss_impl(P, idx, rng);
  }
  double eval_loss(const Vec& P, const std::vector<int>& idx, std::mt19937_64& rng) const {
    return loss_impl(P, idx, rng);
  }

  // Positive axiom terms only; what convergence is judged on.
  double axiom_loss_total(const Vec& P) const {
    double acc = 0.0;
    for (const auto& ax : axioms) acc += model.axiom_loss(P, ax);
    return acc;
  }
};

// ---------------------------------------------------------------------------

struct HmiDriver {
  models::HmiModel model;
  poincare::HexGraph hex;

  HmiDriver(models::HmiModel m, poincare::HexGraph g) : model(std::move(m)), hex(std::move(g)) {}

  // The constraint loss is global; one synthetic "fact" keeps the epoch loop
  // at one step per epoch.
  std::size_t count() const { return 1; }
  std::size_t num_params() const { return model.num_params(); }
  void init(Vec& p, std::mt19937_64& rng) const { model.init(p, rng); }
  void project(Vec& p) const { model.project_params(p); }

  ad::Var batch_loss(ad::Tape&, std::vector<ad::Var>& P, const std::vector<int>&,
                     std::mt19937_64&) const {
    return model.constraint_loss(P, hex);
  }
  double eval_loss(const Vec& P, const std::vector<int>&, std::mt19937_64&) const {
    double acc = 0.0;
    for (double l : model.raw_constraint_losses(P, hex)) acc += l;
    return acc;
  }
};

}  // namespace drivers
}  // namespace geore
