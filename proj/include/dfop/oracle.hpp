#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dfop/errors.hpp"
#include "dfop/estimators.hpp"
#include "dfop/linalg.hpp"
#include "dfop/streams.hpp"

namespace dfop {

/// Ordered samples with their per-step discount factors lambda(1..t).
struct History {
  std::vector<Sample> samples;
  std::vector<double> lambdas;

  void push(Sample s, double lambda) {
    if (!(lambda > 0.0) || !(lambda <= 1.0)) {
      throw ParameterError("lambda must lie in (0, 1]");
    }
    if (!samples.empty() && samples.front().x.size() != s.x.size()) {
      throw ParameterError("sample dimension changed mid-history");
    }
    samples.push_back(std::move(s));
    lambdas.push_back(lambda);
  }

  std::size_t size() const noexcept { return samples.size(); }
};

/// Direct (non-recursive) minimizer of the discounted least-squares
/// objective with an explicit initialization regularizer:
///
///   w* = [ sum_i L(i,t) x_i x_i^T + L(0,t) R0 ]^{-1}
///        [ sum_i L(i,t) x_i y_i  + L(0,t) R0 w0 ],
///   L(i,t) = prod_{j=i+1..t} lambda(j).
///
/// Everything is rebuilt from scratch on each call, so this shares no code
/// path with the streaming recursions; it is the reference they are checked
/// against. R0 = 0 gives the pure discounted normal equations, which stay
/// singular until the data spans the space.
inline Vec closed_form_weighted_ls(const History& h, const SymMatrix& R0, const Vec& w0) {
  const std::size_t d = R0.dim();
  if (d == 0) throw ParameterError("closed form: dimension must be >= 1");
  if (w0.size() != d) throw ParameterError("closed form: w0/R0 size mismatch");
  for (const Sample& s : h.samples) {
    if (s.x.size() != d) throw ParameterError("closed form: sample/R0 size mismatch");
  }

  SymMatrix A(d);
  Vec b(d, 0.0);
  double weight = 1.0;  // L(i,t), walking i from t down to 0
  for (std::size_t k = h.size(); k-- > 0;) {
    const Sample& s = h.samples[k];
    A.add_outer(s.x, weight);
    for (std::size_t i = 0; i < d; ++i) b[i] += weight * s.x[i] * s.y;
    weight *= h.lambdas[k];
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) A(i, j) += weight * R0(i, j);
  }
  const Vec r0w0 = R0 * w0;
  for (std::size_t i = 0; i < d; ++i) b[i] += weight * r0w0[i];
  A.symmetrize();
  return solve_spd(A, b);
}

/// The initialization regularizer under which the closed form reproduces
/// dfop_update exactly: the recursion's mu-scaled gains act like a prior of
/// strength R0 = I / (mu * p0_scale), discounted by lambda = 1 - mu.
inline SymMatrix dfop_equivalent_prior(std::size_t d, double mu, double p0_scale) {
  if (d == 0) throw ParameterError("dimension must be >= 1");
  if (!(mu > 0.0) || !(mu < 1.0)) throw ParameterError("mu must lie in (0, 1)");
  if (!(p0_scale > 0.0)) throw ParameterError("p0_scale must be > 0");
  return SymMatrix::identity(d, 1.0 / (mu * p0_scale));
}

/// Every symbol entering the estimate-error bound.
struct BoundParams {
  double K = 0.0;             // sup over steps of ||P(k)||
  double x_star = 0.0;        // sup ||x(k)||
  double sigma_star = 0.0;    // sup ||x(k)|| * (noise sub-Gaussian scale)
  double gamma_star = 0.0;    // drift sub-Gaussian scale
  double R0_norm = 0.0;       // ||R(0)||
  double w_tilde0_norm = 0.0; // ||w_hat(0) - w(0)||
  double mu = 0.0;
  long long t = 0;
  double delta = 0.05;
};

/// The bound split into its three mechanisms. Each part already carries the
/// leading K, so the parts sum to the total.
struct BoundParts {
  double init_decay = 0.0;  // K (1-mu)^t ||R0|| ||w~0||
  double noise = 0.0;       // K sqrt(2) (1 + sqrt(3 ln(2t/delta))) 2 sigma* mu^{1/2}
  double drift = 0.0;       // K sqrt(2) (1 + sqrt(3 ln(2t/delta))) gamma* (||R0|| + x*^2) mu^{-1/2}

  double total() const { return init_decay + noise + drift; }
};

inline BoundParts theorem2_bound_parts(const BoundParams& p) {
  if (!(p.mu > 0.0) || !(p.mu < 1.0)) throw ParameterError("bound: mu must lie in (0, 1)");
  if (p.t < 1) throw ParameterError("bound: t must be >= 1");
  if (!(p.delta > 0.0) || !(p.delta < 1.0)) throw ParameterError("bound: delta must lie in (0, 1)");
  if (!(p.K >= 0.0) || !(p.x_star >= 0.0) || !(p.sigma_star >= 0.0) ||
      !(p.gamma_star >= 0.0) || !(p.R0_norm >= 0.0) || !(p.w_tilde0_norm >= 0.0)) {
    throw ParameterError("bound: norms and scales must be >= 0");
  }
  const double td = static_cast<double>(p.t);
  const double conc = 1.0 + std::sqrt(3.0 * std::log(2.0 * td / p.delta));
  const double sqrt2 = std::sqrt(2.0);
  BoundParts parts;
  parts.init_decay = p.K * std::pow(1.0 - p.mu, td) * p.R0_norm * p.w_tilde0_norm;
  parts.noise = p.K * sqrt2 * conc * 2.0 * p.sigma_star * std::sqrt(p.mu);
  parts.drift = p.K * sqrt2 * conc * p.gamma_star * (p.R0_norm + p.x_star * p.x_star) /
                std::sqrt(p.mu);
  return parts;
}

/// High-probability bound on ||w_hat(t) - w(t)||; holds with probability at
/// least 1 - delta when the model assumptions do.
inline double theorem2_bound(const BoundParams& p) {
  return theorem2_bound_parts(p).total();
}

/// Smallest g with E exp(||s||^2 / g^2) <= e for s ~ N(0, gamma^2 I_d):
/// the mgf is (1 - 2 gamma^2/g^2)^(-d/2), and setting it equal to e gives
/// g = gamma sqrt(2 / (1 - e^(-2/d))). This is the drift scale gamma* that
/// a Gaussian random-walk stream contributes to BoundParams.
inline double gaussian_vector_bounding_constant(double gamma, std::size_t d) {
  if (d == 0) throw ParameterError("dimension must be >= 1");
  if (!(gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
  return gamma * std::sqrt(2.0 / (1.0 - std::exp(-2.0 / static_cast<double>(d))));
}

/// Runs the discounted estimator over a trace that carries full generator
/// truth and returns the largest residual of the error-propagation identity
///
///   R(t) u(t) = (1-mu) R(t-1) u(t-1) + mu x(t) eps(t) - R(t) s(t),
///
/// where u(t) = w_hat(t) - w(t) and R(t) = P(t)^{-1} is tracked by its own
/// recurrence R(t) = (1-mu) R(t-1) + mu x x^T (no inversions involved).
/// In exact arithmetic the identity holds with residual zero at every step.
inline double wtilde_recurrence_check(const LabeledTrace& trace, double mu,
                                      double p0_scale = 1e3) {
  if (!trace.has_weight_truth() || !trace.has_noise_truth()) {
    throw MissingTruthError("recurrence check needs w, s and eps ground truth");
  }
  if (!(mu > 0.0) || !(mu < 1.0)) throw ParameterError("mu must lie in (0, 1)");
  const std::size_t d = trace.dim;

  ModelState st = dfop_init(d, mu, p0_scale);
  SymMatrix R = SymMatrix::identity(d, 1.0 / p0_scale);
  Vec u_prev(d);  // u(0) = w_hat(0) - w(0)
  for (std::size_t i = 0; i < d; ++i) u_prev[i] = st.w_hat[i] - trace.w0_truth[i];

  double max_residual = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const Sample& s = trace.samples[k];
    const Vec r_prev_u = R * u_prev;

    dfop_update(st, s);
    SymMatrix Rn = R;
    Rn *= (1.0 - mu);
    Rn.add_outer(s.x, mu);
    Rn.symmetrize();

    Vec u(d);
    for (std::size_t i = 0; i < d; ++i) u[i] = st.w_hat[i] - trace.true_w[k][i];
    const Vec lhs = Rn * u;
    const Vec rn_s = Rn * trace.drift_s[k];
    for (std::size_t i = 0; i < d; ++i) {
      const double rhs =
          (1.0 - mu) * r_prev_u[i] + mu * s.x[i] * trace.noise_eps[k] - rn_s[i];
      max_residual = std::max(max_residual, std::abs(lhs[i] - rhs));
    }
    R = Rn;
    u_prev = u;
  }
  return max_residual;
}

}  // namespace dfop
