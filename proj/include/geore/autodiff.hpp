#pragma once

#include <cmath>
#include <vector>

#include "geore/numerics.hpp"

// Minimal reverse-mode tape over scalars. A tape lives for one loss
// evaluation and is never shared between threads. Vars without a tape are
// constants, so generic numeric code can mix literals and parameters freely.

namespace geore {
namespace ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(double v) : v_(v) {}  // NOLINT: implicit constant lift is the point
  double value() const { return v_; }
  Tape* tape() const { return t_; }
  int index() const { return i_; }

 private:
  friend class Tape;
  Var(Tape* t, int i, double v) : t_(t), i_(i), v_(v) {}
  Tape* t_ = nullptr;
  int i_ = -1;
  double v_ = 0.0;
};

class Tape {
  struct Node {
    int pa = -1, pb = -1;
    double ga = 0.0, gb = 0.0;
  };

 public:
  Var leaf(double v) {
    nodes_.push_back(Node{});
    return Var(this, static_cast<int>(nodes_.size()) - 1, v);
  }

  std::vector<Var> leaves(const Vec& vals) {
    std::vector<Var> out;
    out.reserve(vals.size());
    for (double v : vals) out.push_back(leaf(v));
    return out;
  }

  Var unary(double val, const Var& a, double ga) {
    Node n;
    n.pa = a.index();
    n.ga = ga;
    nodes_.push_back(n);
    return Var(this, static_cast<int>(nodes_.size()) - 1, val);
  }

  Var binary(double val, const Var& a, double ga, const Var& b, double gb) {
    Node n;
    if (a.tape() == this) {
      n.pa = a.index();
      n.ga = ga;
    }
    if (b.tape() == this) {
      n.pb = b.index();
      n.gb = gb;
    }
    nodes_.push_back(n);
    return Var(this, static_cast<int>(nodes_.size()) - 1, val);
  }

  std::size_t size() const { return nodes_.size(); }

  // Adjoints for every node; callers index by leaf position.
  Vec gradient(const Var& y) const {
    Vec adj(nodes_.size(), 0.0);
    if (y.tape() != this) throw Error("Tape::gradient: output not on this tape");
    adj[static_cast<std::size_t>(y.index())] = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      const double a = adj[static_cast<std::size_t>(i)];
      if (a == 0.0) continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.pa >= 0) adj[static_cast<std::size_t>(n.pa)] += a * n.ga;
      if (n.pb >= 0) adj[static_cast<std::size_t>(n.pb)] += a * n.gb;
    }
    return adj;
  }

 private:
  std::vector<Node> nodes_;
};

inline Tape* tape_of(const Var& a, const Var& b) {
  return a.tape() ? a.tape() : b.tape();
}

inline Var operator+(const Var& a, const Var& b) {
  Tape* t = tape_of(a, b);
  if (!t) return Var(a.value() + b.value());
  return t->binary(a.value() + b.value(), a, 1.0, b, 1.0);
}

inline Var operator-(const Var& a, const Var& b) {
  Tape* t = tape_of(a, b);
  if (!t) return Var(a.value() - b.value());
  return t->binary(a.value() - b.value(), a, 1.0, b, -1.0);
}

inline Var operator-(const Var& a) {
  if (!a.tape()) return Var(-a.value());
  return a.tape()->unary(-a.value(), a, -1.0);
}

inline Var operator*(const Var& a, const Var& b) {
  Tape* t = tape_of(a, b);
  if (!t) return Var(a.value() * b.value());
  return t->binary(a.value() * b.value(), a, b.value(), b, a.value());
}

inline Var operator/(const Var& a, const Var& b) {
  Tape* t = tape_of(a, b);
  const double bv = b.value();
  if (!t) return Var(a.value() / bv);
  return t->binary(a.value() / bv, a, 1.0 / bv, b, -a.value() / (bv * bv));
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }

inline Var make_unary(const Var& a, double val, double ga) {
  if (!a.tape()) return Var(val);
  return a.tape()->unary(val, a, ga);
}

inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return make_unary(a, e, e);
}
inline Var log(const Var& a) { return make_unary(a, std::log(a.value()), 1.0 / a.value()); }
inline Var sqrt(const Var& a) {
  const double r = std::sqrt(a.value());
  return make_unary(a, r, 0.5 / r);
}
inline Var sin(const Var& a) { return make_unary(a, std::sin(a.value()), std::cos(a.value())); }
inline Var cos(const Var& a) { return make_unary(a, std::cos(a.value()), -std::sin(a.value())); }
inline Var sinh(const Var& a) { return make_unary(a, std::sinh(a.value()), std::cosh(a.value())); }
inline Var cosh(const Var& a) { return make_unary(a, std::cosh(a.value()), std::sinh(a.value())); }
inline Var tanh(const Var& a) {
  const double th = std::tanh(a.value());
  return make_unary(a, th, 1.0 - th * th);
}
inline Var acos(const Var& a) {
  return make_unary(a, std::acos(a.value()), -1.0 / std::sqrt(1.0 - a.value() * a.value()));
}
inline Var acosh(const Var& a) {
  return make_unary(a, std::acosh(a.value()),
                    1.0 / std::sqrt(a.value() * a.value() - 1.0));
}
inline Var asinh(const Var& a) {
  return make_unary(a, std::asinh(a.value()), 1.0 / std::sqrt(a.value() * a.value() + 1.0));
}

}  // namespace ad

// Scalar helpers shared by the double and tape instantiations of the
// geometry templates. max/abs pick one subgradient at kinks; gradient checks
// resample away from those points.
inline double val(double x) { return x; }
inline double val(const ad::Var& x) { return x.value(); }

inline double vmax(double a, double b) { return a > b ? a : b; }
inline double vmin(double a, double b) { return a < b ? a : b; }
inline double vabs(double a) { return std::fabs(a); }
inline double sq(double a) { return a * a; }

inline ad::Var vmax(const ad::Var& a, const ad::Var& b) { return a.value() >= b.value() ? a : b; }
inline ad::Var vmin(const ad::Var& a, const ad::Var& b) { return a.value() <= b.value() ? a : b; }
inline ad::Var vabs(const ad::Var& a) {
  const double s = a.value() >= 0.0 ? 1.0 : -1.0;
  return ad::make_unary(a, std::fabs(a.value()), s);
}
inline ad::Var sq(const ad::Var& a) { return a * a; }

// Exact sqrt value with the derivative clamped near zero; norms of possibly
// coincident points go through this so a perfect fit cannot poison the tape.
inline double sqrt_safe(double x) { return std::sqrt(x); }
inline ad::Var sqrt_safe(const ad::Var& a) {
  const double r = std::sqrt(a.value());
  return ad::make_unary(a, r, 0.5 / std::max(r, 1e-12));
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double sigmoid(double x) { return stable_sigmoid(x); }
inline ad::Var sigmoid(const ad::Var& a) {
  const double s = stable_sigmoid(a.value());
  return ad::make_unary(a, s, s * (1.0 - s));
}

inline double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

// softplus_t(x) = t * log(1 + exp(x/t))
inline double softplus_t(double x, double t) { return t * stable_softplus(x / t); }
inline ad::Var softplus_t(const ad::Var& a, double t) {
  const double v = softplus_t(a.value(), t);
  return ad::make_unary(a, v, stable_sigmoid(a.value() / t));
}

inline double softplus(double x) { return stable_softplus(x); }
inline ad::Var softplus(const ad::Var& a) { return softplus_t(a, 1.0); }

}  // namespace geore
