#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geore {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

using Vec = std::vector<double>;

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw Error("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm1(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += std::fabs(x);
  return s;
}

// Row-major dense matrix. Only used as a reference path: dense assembly for
// the O(d) blockwise transforms, orthogonality oracles, and the like.
struct Mat {
  int rows = 0, cols = 0;
  Vec a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {
    if (r <= 0 || c <= 0) throw Error("Mat: dimensions must be positive");
  }

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Mat transposed() const {
    Mat t(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
};

inline Mat operator*(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw Error("Mat mul: dimension mismatch");
  Mat z(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      double v = x(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < y.cols; ++j) z(i, j) += v * y(k, j);
    }
  return z;
}

inline Vec operator*(const Mat& m, const Vec& v) {
  if (m.cols != static_cast<int>(v.size())) throw Error("Mat*Vec: dimension mismatch");
  Vec out(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out[i] += m(i, j) * v[j];
  return out;
}

inline double max_abs_diff(const Mat& x, const Mat& y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.a.size(); ++i) worst = std::max(worst, std::fabs(x.a[i] - y.a[i]));
  return worst;
}

struct GradCheckReport {
  double max_rel_err = 0.0;
  int worst_param_index = -1;
};

using LossFn = std::function<double(const Vec&)>;

// Central differences, step scaled per coordinate by max(1, |p_i|).
inline Vec finite_diff_grad(const LossFn& loss, const Vec& params, double h = 1e-5) {
  if (h <= 0.0) throw Error("finite_diff_grad: h must be positive");
  Vec g(params.size(), 0.0);
  Vec p = params;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double hi = h * std::max(1.0, std::fabs(p[i]));
    const double saved = p[i];
    p[i] = saved + hi;
    const double fp = loss(p);
    p[i] = saved - hi;
    const double fm = loss(p);
    p[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw Error("finite_diff_grad: non-finite loss at coordinate " + std::to_string(i));
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

inline GradCheckReport check_gradients(const LossFn& loss, const Vec& analytic,
                                       const Vec& params, double h = 1e-5, double tol = 1e-4) {
  if (tol <= 0.0) throw Error("check_gradients: tol must be positive");
  if (analytic.size() != params.size()) throw Error("check_gradients: gradient size mismatch");
  const Vec fd = finite_diff_grad(loss, params, h);
  GradCheckReport rep;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const double a = analytic[i], f = fd[i];
    const double rel = std::fabs(a - f) / std::max({1.0, std::fabs(a), std::fabs(f)});
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_param_index = static_cast<int>(i);
    }
  }
  (void)tol;
  return rep;
}

}  // namespace geore
