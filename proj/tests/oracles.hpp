#pragma once

// Reference implementations written independently of the library, on plain
// nested vectors. Tests compare library results against these.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "attnedit/matrix.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;

inline Grid to_grid(const attnedit::Matrix& m) {
  Grid g(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

inline attnedit::Matrix to_matrix(const Grid& g) {
  attnedit::Matrix m(g.size(), g.front().size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g[i].size(); ++j) m(i, j) = g[i][j];
  return m;
}

inline Grid matmul(const Grid& a, const Grid& b) {
  const std::size_t n = a.size(), m = b.front().size(), inner = b.size();
  Grid c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

inline Grid transpose(const Grid& a) {
  Grid t(a.front().size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Grid add(const Grid& a, const Grid& b) {
  Grid c = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) c[i][j] += b[i][j];
  return c;
}

inline std::vector<double> softmax(const std::vector<double>& l) {
  double mx = l.front();
  for (double x : l) mx = x > mx ? x : mx;
  std::vector<double> e(l.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < l.size(); ++j) sum += e[j] = std::exp(l[j] - mx);
  for (double& x : e) x /= sum;
  return e;
}

// softmax(Z Wq (Z Wk)^T / sqrt(d)) Z Wv, entry by entry.
inline Grid attention(const Grid& z, const Grid& wq, const Grid& wk, const Grid& wv) {
  const std::size_t n = z.size(), d = wq.size();
  const Grid q = matmul(z, wq), k = matmul(z, wk), v = matmul(z, wv);
  Grid out(n, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(n);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += q[i][c] * k[j][c];
      logits[j] = s / std::sqrt(static_cast<double>(d));
    }
    const auto p = softmax(logits);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < d; ++c) out[i][c] += p[j] * v[j][c];
  }
  return out;
}

// Directional derivative of softmax(l) along dl by central differences.
inline std::vector<double> softmax_fd(const std::vector<double>& l, const std::vector<double>& dl,
                                      double h) {
  std::vector<double> lp(l.size()), lm(l.size());
  for (std::size_t j = 0; j < l.size(); ++j) {
    lp[j] = l[j] + h * dl[j];
    lm[j] = l[j] - h * dl[j];
  }
  const auto sp = softmax(lp), sm = softmax(lm);
  std::vector<double> g(l.size());
  for (std::size_t j = 0; j < l.size(); ++j) g[j] = (sp[j] - sm[j]) / (2.0 * h);
  return g;
}

// Wq^T Wq + Wk^T Wk + (Wv Wv^T or Wv^T Wv).
inline Grid combined(const Grid& wq, const Grid& wk, const Grid& wv, bool value_rows) {
  const Grid v = value_rows ? matmul(wv, transpose(wv)) : matmul(transpose(wv), wv);
  return add(add(matmul(transpose(wq), wq), matmul(transpose(wk), wk)), v);
}

inline double quad_form(const Grid& c, const std::vector<double>& n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i)
    for (std::size_t j = 0; j < n.size(); ++j) s += n[i] * c[i][j] * n[j];
  return s;
}

inline double frob(const Grid& a) {
  double s = 0.0;
  for (const auto& r : a)
    for (double x : r) s += x * x;
  return std::sqrt(s);
}

// Spearman's rho from average ranks, computed without the library's helpers.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        if (w < v[i]) ++less;
        if (w == v[i]) ++equal;
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("attnedit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
