#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dfop/errors.hpp"

namespace dfop {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ParameterError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

inline bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

/// Dense symmetric d x d matrix, row-major. Callers that apply update
/// formulas which are only symmetric in exact arithmetic re-symmetrize via
/// symmetrize() so that max_asymmetry() stays below 1e-12 over long runs.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t d) : d_(d), a_(d * d, 0.0) {}

  static SymMatrix identity(std::size_t d, double scale = 1.0) {
    SymMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = scale;
    return m;
  }

  std::size_t dim() const noexcept { return d_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * d_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }

  const std::vector<double>& data() const noexcept { return a_; }
  std::vector<double>& data() noexcept { return a_; }

  Vec operator*(const Vec& x) const {
    if (x.size() != d_) throw ParameterError("SymMatrix: matvec size mismatch");
    Vec y(d_, 0.0);
    for (std::size_t i = 0; i < d_; ++i) {
      double s = 0.0;
      const double* row = a_.data() + i * d_;
      for (std::size_t j = 0; j < d_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    return y;
  }

  SymMatrix& operator*=(double c) {
    for (double& v : a_) v *= c;
    return *this;
  }

  SymMatrix& operator+=(const SymMatrix& o) {
    if (o.dim() != d_) throw ParameterError("SymMatrix: add size mismatch");
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }

  /// this += c * x x^T
  void add_outer(const Vec& x, double c) {
    if (x.size() != d_) throw ParameterError("SymMatrix: outer size mismatch");
    for (std::size_t i = 0; i < d_; ++i) {
      const double cxi = c * x[i];
      for (std::size_t j = 0; j < d_; ++j) a_[i * d_ + j] += cxi * x[j];
    }
  }

  void symmetrize() {
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = i + 1; j < d_; ++j) {
        const double m = 0.5 * (a_[i * d_ + j] + a_[j * d_ + i]);
        a_[i * d_ + j] = m;
        a_[j * d_ + i] = m;
      }
    }
  }

  double max_asymmetry() const {
    double m = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = i + 1; j < d_; ++j) {
        m = std::max(m, std::abs(a_[i * d_ + j] - a_[j * d_ + i]));
      }
    }
    return m;
  }

  bool all_finite() const {
    for (double v : a_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

private:
  std::size_t d_ = 0;
  std::vector<double> a_;
};

/// Computes (alpha * P^{-1} + beta * x x^T)^{-1} from P without forming an
/// inverse, via the rank-one identity
///     (1/alpha) * [ P - beta * P x x^T P / (alpha + beta * x^T P x) ].
/// This single kernel is the P(t) recursion of every estimator here; they
/// differ only in (alpha, beta). The result is re-symmetrized before return.
inline SymMatrix outer_rank1_downdate(const SymMatrix& P, const Vec& x,
                                      double alpha, double beta) {
  if (!(alpha > 0.0)) throw ParameterError("outer_rank1_downdate: alpha must be > 0");
  if (!(beta >= 0.0)) throw ParameterError("outer_rank1_downdate: beta must be >= 0");
  if (x.size() != P.dim()) throw ParameterError("outer_rank1_downdate: size mismatch");

  const Vec px = P * x;
  const double quad = dot(x, px);
  const double denom = alpha + beta * quad;
  if (!std::isfinite(denom) || denom <= 0.0) {
    throw NumericError("outer_rank1_downdate: non-positive or non-finite denominator");
  }
  const std::size_t d = P.dim();
  SymMatrix out(d);
  const double scale = beta / denom;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out(i, j) = (P(i, j) - scale * px[i] * px[j]) / alpha;
    }
  }
  out.symmetrize();
  if (!out.all_finite()) {
    throw NumericError("outer_rank1_downdate: non-finite result");
  }
  return out;
}

/// Solves A x = b for symmetric positive definite A by Cholesky (A = L L^T).
/// A non-positive pivot raises SingularMatrixError carrying the pivot index.
inline Vec solve_spd(const SymMatrix& A, const Vec& b) {
  const std::size_t d = A.dim();
  if (b.size() != d) throw ParameterError("solve_spd: size mismatch");

  std::vector<double> L(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double s = A(j, j);
    for (std::size_t k = 0; k < j; ++k) s -= L[j * d + k] * L[j * d + k];
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw SingularMatrixError("solve_spd: matrix is not positive definite",
                                static_cast<int>(j));
    }
    const double ljj = std::sqrt(s);
    L[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = A(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= L[i * d + k] * L[j * d + k];
      L[i * d + j] = v / ljj;
    }
  }

  Vec y(d);  // L y = b
  for (std::size_t i = 0; i < d; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= L[i * d + k] * y[k];
    y[i] = v / L[i * d + i];
  }
  Vec x(d);  // L^T x = y
  for (std::size_t ii = d; ii-- > 0;) {
    double v = y[ii];
    for (std::size_t k = ii + 1; k < d; ++k) v -= L[k * d + ii] * x[k];
    x[ii] = v / L[ii * d + ii];
  }
  if (!dfop::all_finite(x)) throw NumericError("solve_spd: non-finite solution");
  return x;
}

/// All eigenvalues of a symmetric matrix, cyclic Jacobi method. Order is
/// unspecified. Chosen over power iteration because the matrices this
/// library meets are tiny while their spectra can straddle zero.
inline Vec symmetric_eigenvalues(SymMatrix a) {
  const std::size_t d = a.dim();
  if (d == 0) return {};
  if (!a.all_finite()) throw NumericError("symmetric_eigenvalues: non-finite input");
  a.symmetrize();

  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) scale = std::max(scale, std::abs(a(i, j)));
  }
  if (scale == 0.0) return Vec(d, 0.0);

  const double tol = 1e-15 * scale;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) off = std::max(off, std::abs(a(i, j)));
    }
    if (off <= tol) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= tol) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {  // columns p and q
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {  // rows p and q
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
    a.symmetrize();
  }

  Vec ev(d);
  for (std::size_t i = 0; i < d; ++i) ev[i] = a(i, i);
  return ev;
}

inline double min_eigenvalue(const SymMatrix& a) {
  const Vec ev = symmetric_eigenvalues(a);
  double m = ev.empty() ? 0.0 : ev[0];
  for (double v : ev) m = std::min(m, v);
  return m;
}

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix.
inline double spectral_norm(const SymMatrix& a) {
  double m = 0.0;
  for (double v : symmetric_eigenvalues(a)) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace dfop
