#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "geore/autodiff.hpp"
#include "geore/numerics.hpp"

// Poincare-ball primitives and the hierarchy/exclusion constraint geometry:
// every label hyperplane owns an enclosing Euclidean ball, and implication /
// exclusion become ball insideness / disjointness.

namespace geore {
namespace poincare {

constexpr double kBallEdge = 1.0 - 1e-5;

inline void project_to_ball(Vec& x) {
  const double n = norm2(x);
  if (n >= kBallEdge) {
    const double f = kBallEdge / n;
    for (double& c : x) c *= f;
  }
}

template <class S>
S dot_t(const std::vector<S>& a, const std::vector<S>& b) {
  S acc(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) acc = acc + a[i] * b[i];
  return acc;
}

template <class S>
S norm_t(const std::vector<S>& a) {
  return sqrt_safe(dot_t(a, a));
}

template <class S>
std::vector<S> mobius_add(const std::vector<S>& x, const std::vector<S>& y) {
  if (x.size() != y.size()) throw Error("mobius_add: dimension mismatch");
  S xy = dot_t(x, y), x2 = dot_t(x, x), y2 = dot_t(y, y);
  S cx = S(1.0) + S(2.0) * xy + y2;
  S cy = S(1.0) - x2;
  S den = S(1.0) + S(2.0) * xy + x2 * y2;
  std::vector<S> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (cx * x[i] + cy * y[i]) / den;
  return out;
}

inline double ball_distance(const Vec& x, const Vec& y) {
  const double x2 = dot(x, x), y2 = dot(y, y);
  if (x2 >= 1.0 || y2 >= 1.0) throw Error("ball_distance: point outside the open ball");
  Vec d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  const double arg = 1.0 + 2.0 * dot(d, d) / ((1.0 - x2) * (1.0 - y2));
  return std::acosh(std::max(1.0, arg));
}

template <class S>
struct EnclosingBallT {
  std::vector<S> center;
  S radius;
};

using EnclosingBall = EnclosingBallT<double>;

// r = (1-|c|^2)/(2|c|), o = ((1+|c|^2)/(2|c|)) * c/|c|; the center magnitude
// rides the unit direction of c so that |o|^2 = 1 + r^2 holds.
template <class S>
EnclosingBallT<S> enclosing_ball(const std::vector<S>& c) {
  S n2 = dot_t(c, c);
  if (val(n2) < 1e-24) throw Error("enclosing_ball: center must be nonzero");
  if (val(n2) >= 1.0) throw Error("enclosing_ball: center must lie in the open ball");
  using std::sqrt;
  S n = sqrt(n2);
  EnclosingBallT<S> b;
  b.radius = (S(1.0) - n2) / (S(2.0) * n);
  S mag = (S(1.0) + n2) / (S(2.0) * n2);  // ((1+n^2)/(2n)) / n
  b.center.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) b.center[i] = mag * c[i];
  return b;
}

template <class S>
S center_gap(const EnclosingBallT<S>& a, const EnclosingBallT<S>& b) {
  std::vector<S> d(a.center.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.center[i] - b.center[i];
  return norm_t(d);
}

template <class S>
S inside_loss(const EnclosingBallT<S>& inner, const EnclosingBallT<S>& outer) {
  return vmax(S(0.0), center_gap(inner, outer) + inner.radius - outer.radius);
}

template <class S>
S disjoint_loss(const EnclosingBallT<S>& a, const EnclosingBallT<S>& b) {
  return vmax(S(0.0), a.radius + b.radius - center_gap(a, b));
}

template <class S>
S membership_loss(const std::vector<S>& p, const EnclosingBallT<S>& b) {
  std::vector<S> d(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) d[i] = b.center[i] - p[i];
  return vmax(S(0.0), norm_t(d) - b.radius);
}

template <class S>
S nonmembership_loss(const std::vector<S>& p, const EnclosingBallT<S>& b) {
  std::vector<S> d(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) d[i] = b.center[i] - p[i];
  return vmax(S(0.0), b.radius - norm_t(d));
}

// Confidence of instance p carrying the label with hyperplane center c.
inline double membership_score(const Vec& p, const EnclosingBall& b) {
  return sigmoid(nonmembership_loss(p, b) - membership_loss(p, b));
}

// Distance from p to the Poincare hyperplane H_c (logit of the linear reader).
inline double hyperplane_logit(const Vec& p, const Vec& c) {
  const double cn = norm2(c);
  if (cn < 1e-12) throw Error("hyperplane_logit: center must be nonzero");
  Vec mc(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) mc[i] = -c[i];
  const Vec m = mobius_add(mc, p);
  const double m2 = dot(m, m);
  return std::asinh(2.0 * std::fabs(dot(m, c)) / ((1.0 - m2) * cn));
}

struct HexGraph {
  std::vector<std::string> labels;
  std::map<std::string, int> id;
  std::vector<std::pair<int, int>> hier;  // (child, parent): child implies parent
  std::vector<std::pair<int, int>> excl;  // undirected exclusion

  int add_label(const std::string& name) {
    auto it = id.find(name);
    if (it != id.end()) return it->second;
    const int k = static_cast<int>(labels.size());
    labels.push_back(name);
    id.emplace(name, k);
    return k;
  }

  void validate() const {
    for (const auto& [a, b] : excl)
      if (a == b) throw Error("HexGraph: exclusion self loop on " + labels[a]);
    // Kahn's algorithm over the hierarchy edges.
    std::vector<int> indeg(labels.size(), 0);
    for (const auto& [c, p] : hier) {
      if (c == p) throw Error("HexGraph: hierarchy self loop on " + labels[c]);
      ++indeg[p];
    }
    std::vector<int> stack;
    for (std::size_t i = 0; i < indeg.size(); ++i)
      if (indeg[i] == 0) stack.push_back(static_cast<int>(i));
    std::size_t seen = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      ++seen;
      for (const auto& [c, p] : hier)
        if (c == v && --indeg[p] == 0) stack.push_back(p);
    }
    if (seen != labels.size()) throw Error("HexGraph: hierarchy edges contain a cycle");
  }
};

inline const std::vector<std::pair<int, int>>& hier_edges_checked(const HexGraph& hex,
                                                                  int n_labels) {
  for (const auto& [c, p] : hex.hier)
    if (c < 0 || p < 0 || c >= n_labels || p >= n_labels)
      throw Error("hmi_objective: constraint edge references unknown label");
  return hex.hier;
}

inline const std::vector<std::pair<int, int>>& excl_edges_checked(const HexGraph& hex,
                                                                  int n_labels) {
  for (const auto& [a, b] : hex.excl)
    if (a < 0 || b < 0 || a >= n_labels || b >= n_labels)
      throw Error("hmi_objective: constraint edge references unknown label");
  return hex.excl;
}

// Full objective over direct label-ball embeddings: membership terms for
// positive instance-label pairs, non-membership for negatives, and the
// lambda-weighted constraint terms over the graph edges.
template <class S>
S hmi_objective(const std::vector<std::vector<S>>& label_centers,
                const std::vector<Vec>& instances,
                const std::vector<std::pair<int, int>>& positives,
                const std::vector<std::pair<int, int>>& negatives, const HexGraph& hex,
                double lambda) {
  if (lambda < 0.0) throw Error("hmi_objective: lambda must be nonnegative");
  const int n_labels = static_cast<int>(label_centers.size());
  std::vector<EnclosingBallT<S>> balls;
  balls.reserve(label_centers.size());
  for (const auto& c : label_centers) balls.push_back(enclosing_ball(c));

  S total(0.0);
  auto lift = [](const Vec& p) {
    std::vector<S> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = S(p[i]);
    return out;
  };
  for (const auto& [xi, li] : positives)
    total = total + membership_loss(lift(instances[xi]), balls[li]);
  for (const auto& [xi, li] : negatives)
    total = total + nonmembership_loss(lift(instances[xi]), balls[li]);
  S cons(0.0);
  for (const auto& [c, p] : hier_edges_checked(hex, n_labels))
    cons = cons + inside_loss(balls[c], balls[p]);
  for (const auto& [a, b] : excl_edges_checked(hex, n_labels))
    cons = cons + disjoint_loss(balls[a], balls[b]);
  return total + S(lambda) * cons;
}

// Fraction of (instance, hierarchy edge) pairs whose child score exceeds the
// parent score.
inline double hcv(const std::vector<Vec>& scores, const std::vector<std::pair<int, int>>& hier) {
  if (scores.empty() || hier.empty()) return 0.0;
  std::size_t violated = 0;
  for (const Vec& row : scores)
    for (const auto& [c, p] : hier)
      if (row[c] - row[p] > 0.0) ++violated;
  return static_cast<double>(violated) / (scores.size() * hier.size());
}

// Fraction of (instance, exclusion edge) pairs with both labels predicted.
inline double ecv(const std::vector<std::vector<bool>>& predictions,
                  const std::vector<std::pair<int, int>>& excl) {
  if (predictions.empty() || excl.empty()) return 0.0;
  std::size_t violated = 0;
  for (const auto& row : predictions)
    for (const auto& [a, b] : excl)
      if (row[a] && row[b]) ++violated;
  return static_cast<double>(violated) / (predictions.size() * excl.size());
}

}  // namespace poincare
}  // namespace geore
