#include "attnedit/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "attnedit/error.hpp"

namespace attnedit {

namespace {

// Eigenvalues plus eigenvectors stored as rows of `vt`.
struct RawEigen {
  Vector values;
  Matrix vt;
};

constexpr int kMaxJacobiSweeps = 100;
constexpr int kMaxQlIterations = 100;

double off_diagonal_sq(const Matrix& a) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t q = p + 1; q < a.cols(); ++q) s += a(p, q) * a(p, q);
  return s;
}

// Cyclic Jacobi. The rotation for (p, q) annihilates a(p, q); after a few
// sweeps entries that are negligible against both diagonal entries are zeroed
// outright so the off-diagonal mass reaches exactly zero.
RawEigen jacobi(Matrix a) {
  const std::size_t n = a.rows();
  Matrix vt = Matrix::identity(n);

  for (int sweep = 0;; ++sweep) {
    if (off_diagonal_sq(a) == 0.0) break;
    if (sweep == kMaxJacobiSweeps) {
      throw Error(ErrorKind::Validation, "jacobi: no convergence after " +
                                             std::to_string(kMaxJacobiSweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) &&
            std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }

        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        auto rp = a.row(p);
        auto rq = a.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = rp[k];
          const double aqk = rq[k];
          rp[k] = c * apk - s * aqk;
          rq[k] = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
  }

  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  return {std::move(values), std::move(vt)};
}

// Householder reduction of symmetric `a` to tridiagonal form T = Q^T a Q.
// On return `diag`/`sub` hold T and `qt` holds Q^T.
void tridiagonalize(Matrix a, Vector& diag, Vector& sub, Matrix& qt) {
  const std::size_t n = a.rows();
  Matrix reflectors(n, n);  // row k holds v_k in columns k+1..n-1
  Vector betas(n, 0.0);
  Vector p(n), w(n);

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    const double* x = a.row(k).data() + k + 1;
    double sigma = 0.0;
    for (std::size_t i = 1; i < m; ++i) sigma += x[i] * x[i];
    if (sigma == 0.0) continue;

    const double x0 = x[0];
    const double alpha = -std::copysign(std::sqrt(x0 * x0 + sigma), x0);
    double* v = reflectors.row(k).data() + k + 1;
    std::copy(x, x + m, v);
    v[0] = x0 - alpha;
    const double beta = 2.0 / (v[0] * v[0] + sigma);
    betas[k] = beta;

    // p = beta * B v, accumulated row by row (B is symmetric).
    std::fill(p.begin(), p.begin() + m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double* bi = a.row(k + 1 + i).data() + k + 1;
      const double vi = v[i];
      for (std::size_t j = 0; j < m; ++j) p[j] += vi * bi[j];
    }
    for (std::size_t i = 0; i < m; ++i) p[i] *= beta;
    double pv = 0.0;
    for (std::size_t i = 0; i < m; ++i) pv += p[i] * v[i];
    const double half = 0.5 * beta * pv;
    for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - half * v[i];

    for (std::size_t i = 0; i < m; ++i) {
      double* bi = a.row(k + 1 + i).data() + k + 1;
      const double vi = v[i];
      const double wi = w[i];
      for (std::size_t j = 0; j < m; ++j) bi[j] -= vi * w[j] + wi * v[j];
    }
    a(k, k + 1) = alpha;
    a(k + 1, k) = alpha;
  }

  diag.assign(n, 0.0);
  sub.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) sub[i] = a(i, i + 1);

  // Q = H_0 ... H_{n-3}, accumulated right to left (Q <- H_k Q) so each step
  // only touches the trailing block; transposed at the end.
  Matrix q = Matrix::identity(n);
  Vector u(n);
  for (std::size_t kk = n >= 2 ? n - 2 : 0; kk-- > 0;) {
    const double beta = betas[kk];
    if (beta == 0.0) continue;
    const std::size_t m = n - kk - 1;
    const double* v = reflectors.row(kk).data() + kk + 1;
    std::fill(u.begin(), u.begin() + m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double* qi = q.row(kk + 1 + i).data() + kk + 1;
      const double vi = v[i];
      for (std::size_t j = 0; j < m; ++j) u[j] += vi * qi[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
      double* qi = q.row(kk + 1 + i).data() + kk + 1;
      const double s = beta * v[i];
      for (std::size_t j = 0; j < m; ++j) qi[j] -= s * u[j];
    }
  }
  qt = transpose(q);
}

// Implicit-shift QL on a symmetric tridiagonal matrix (the tql2 scheme).
// `e[i]` couples rows i and i+1; rotations are applied to rows of `zt`.
void tridiagonal_ql(Vector& d, Vector& e, Matrix& zt) {
  const std::size_t n = d.size();
  if (n == 0) return;
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  double f = 0.0;
  double tst1 = 0.0;

  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxQlIterations) {
          throw Error(ErrorKind::Validation, "tridiagonal QL: no convergence for eigenvalue " +
                                                 std::to_string(l));
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = m; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);

          auto zi = zt.row(i);
          auto zi1 = zt.row(i + 1);
          for (std::size_t k = 0; k < n; ++k) {
            const double hk = zi1[k];
            zi1[k] = s * zi[k] + c * hk;
            zi[k] = c * zi[k] - s * hk;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

RawEigen tridiagonal(const Matrix& a) {
  Vector d, e;
  Matrix zt(a.rows(), a.rows());
  tridiagonalize(a, d, e, zt);
  tridiagonal_ql(d, e, zt);
  return {std::move(d), std::move(zt)};
}

}  // namespace

void canonicalize_sign(std::span<double> v) {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      arg = i;
    }
  }
  if (!v.empty() && v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
}

std::vector<EigenPair> eig_symmetric(const Matrix& c, EigenMethod method) {
  if (!c.is_square()) {
    throw Error(ErrorKind::Dimension, "eig_symmetric: matrix is not square, " + c.shape());
  }
  c.ensure_finite();
  const double norm = frobenius_norm(c);
  const double asym = max_asymmetry(c);
  if (asym > kSymmetryTolerance * norm) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "eig_symmetric: matrix is not symmetric, max |c - c^T| = " << asym
        << " exceeds " << kSymmetryTolerance << " * ||c||_F = " << kSymmetryTolerance * norm;
    throw Error(ErrorKind::Domain, msg.str());
  }

  const Matrix sym = symmetrized(c);
  if (method == EigenMethod::Auto) {
    method = c.rows() <= kJacobiMaxDim ? EigenMethod::Jacobi : EigenMethod::Tridiagonal;
  }
  RawEigen raw = method == EigenMethod::Jacobi ? jacobi(sym) : tridiagonal(sym);

  const std::size_t n = c.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return raw.values[i] > raw.values[j];
  });

  std::vector<EigenPair> pairs;
  pairs.reserve(n);
  for (std::size_t idx : order) {
    auto row = raw.vt.row(idx);
    Vector v(row.begin(), row.end());
    // Renormalize to remove accumulated rounding in the rotation products.
    const double len = norm2(v);
    for (double& x : v) x /= len;
    canonicalize_sign(v);
    pairs.push_back({raw.values[idx], std::move(v)});
  }
  return pairs;
}

double rayleigh_quotient(const Matrix& c, std::span<const double> n) {
  if (!c.is_square() || c.cols() != n.size()) {
    throw Error(ErrorKind::Dimension, "rayleigh_quotient: matrix " + c.shape() +
                                          " with vector of length " + std::to_string(n.size()));
  }
  if (max_asymmetry(c) > kSymmetryTolerance * frobenius_norm(c)) {
    throw Error(ErrorKind::Domain, "rayleigh_quotient: matrix is not symmetric");
  }
  const double nn = dot(n, n);
  if (nn == 0.0) throw Error(ErrorKind::Domain, "rayleigh_quotient: zero vector");
  const Vector cn = matvec(c, n);
  return dot(n, cn) / nn;
}

}  // namespace attnedit
