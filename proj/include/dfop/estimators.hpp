#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <sstream>
#include <string>
#include <vector>

#include "dfop/errors.hpp"
#include "dfop/linalg.hpp"

namespace dfop {

enum class Task { regression, classification };

/// One stream item: a feature vector and a target, which is a real value for
/// regression and a +/-1 label for classification.
struct Sample {
  Vec x;
  double y = 0.0;
};

/// Thresholded label; ties at zero resolve to +1.
inline double sign_label(double v) { return v >= 0.0 ? 1.0 : -1.0; }

/// Complete memory of a recursive estimator. Its footprint is a function of
/// the dimension alone, never of how many samples have been processed.
struct ModelState {
  Vec w_hat;
  SymMatrix P;
  long long t = 0;
  double mu = 0.0;
  double p0_scale = 1.0;

  std::size_t dim() const noexcept { return w_hat.size(); }
};

inline double predict_raw(const ModelState& state, const Vec& x) {
  return dot(state.w_hat, x);
}

inline double predict(const ModelState& state, const Vec& x, Task task) {
  const double v = predict_raw(state, x);
  return task == Task::classification ? sign_label(v) : v;
}

/// What one streaming update produced. Predictions here are post-update,
/// i.e. the freshly updated weights applied to the sample just consumed;
/// prequential evaluation instead calls predict() before the update.
struct StepOutput {
  double prediction_raw = 0.0;
  double prediction_label = 1.0;
};

/// Which P(t) recursion dfop_update runs.
///
/// lemma_consistent divides the rank-one correction by the same discounted
/// denominator that the underlying matrix-inversion identity produces,
///     P(t) = 1/(1-mu) * [P - mu P x x^T P / ((1-mu) + mu x^T P x)],
/// and is the variant whose weight path coincides with the closed-form
/// discounted least-squares solution. paper_literal keeps the undiscounted
/// denominator (1-mu) + x^T P x for side-by-side comparison; its weight
/// path drifts measurably away from the closed form (see cmd_verify).
enum class DfopRecursion { lemma_consistent, paper_literal };

namespace detail {

inline void check_mu(double mu) {
  if (!(mu >= 0.0) || !(mu < 1.0)) {
    throw ParameterError("mu must lie in [0, 1)");
  }
}

inline void check_sample(const ModelState& state, const Sample& s) {
  if (s.x.size() != state.dim()) {
    throw ParameterError("sample dimension does not match model state");
  }
}

inline void check_state_finite(const ModelState& state, long long step) {
  if (!all_finite(state.w_hat) || !state.P.all_finite()) {
    throw NumericError("estimator state became non-finite", step);
  }
}

}  // namespace detail

/// Fresh state: w_hat = 0, P = p0_scale * I. Large p0_scale means a weak
/// prior; the default 1e3 matches the run driver.
inline ModelState dfop_init(std::size_t d, double mu, double p0_scale = 1e3) {
  if (d == 0) throw ParameterError("dimension must be >= 1");
  detail::check_mu(mu);
  if (!(p0_scale > 0.0)) throw ParameterError("p0_scale must be > 0");
  ModelState st;
  st.w_hat.assign(d, 0.0);
  st.P = SymMatrix::identity(d, p0_scale);
  st.mu = mu;
  st.p0_scale = p0_scale;
  return st;
}

/// One discounted-gain update:
///   P(t)    per DfopRecursion above
///   L(t)    = P(t) x(t)
///   w_hat   += mu * L(t) * (y(t) - w_hat . x(t))
/// mu = 0 leaves the weights frozen (and P merely rescaled), which is the
/// intended degenerate behaviour, not an error.
inline StepOutput dfop_update(ModelState& state, const Sample& s,
                              DfopRecursion recursion = DfopRecursion::lemma_consistent) {
  detail::check_sample(state, s);
  const double mu = state.mu;
  const long long step = state.t + 1;
  try {
    if (recursion == DfopRecursion::lemma_consistent) {
      state.P = outer_rank1_downdate(state.P, s.x, 1.0 - mu, mu);
    } else {
      const Vec px = state.P * s.x;
      const double denom = (1.0 - mu) + dot(s.x, px);
      if (!std::isfinite(denom) || denom <= 0.0) {
        throw NumericError("dfop_update: non-positive denominator");
      }
      const std::size_t d = state.dim();
      SymMatrix next(d);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          next(i, j) = (state.P(i, j) - mu * px[i] * px[j] / denom) / (1.0 - mu);
        }
      }
      next.symmetrize();
      state.P = next;
    }
  } catch (const NumericError& e) {
    throw NumericError(e.what(), step);
  }

  const Vec gain = state.P * s.x;  // L(t)
  const double err = s.y - dot(state.w_hat, s.x);
  for (std::size_t i = 0; i < state.dim(); ++i) state.w_hat[i] += mu * gain[i] * err;
  state.t = step;
  detail::check_state_finite(state, step);

  StepOutput out;
  out.prediction_raw = dot(state.w_hat, s.x);
  out.prediction_label = sign_label(out.prediction_raw);
  return out;
}

/// Generalized discounted update with per-step forgetting factor
/// lambda in (0, 1]:
///   P(t)  = 1/lambda * [P - P x x^T P / (lambda + x^T P x)]
///   w_hat += P(t) x * (y - w_hat . x)
/// lambda is supplied per call, so any schedule (constant, piecewise, ...)
/// can be driven by the caller. lambda = 1 is ordinary recursive least
/// squares. The state's mu field is ignored here.
inline StepOutput gdfop_update(ModelState& state, const Sample& s, double lambda) {
  detail::check_sample(state, s);
  if (!(lambda > 0.0) || !(lambda <= 1.0)) {
    throw ParameterError("lambda must lie in (0, 1]");
  }
  const long long step = state.t + 1;
  try {
    state.P = outer_rank1_downdate(state.P, s.x, lambda, 1.0);
  } catch (const NumericError& e) {
    throw NumericError(e.what(), step);
  }

  const Vec gain = state.P * s.x;
  const double err = s.y - dot(state.w_hat, s.x);
  for (std::size_t i = 0; i < state.dim(); ++i) state.w_hat[i] += gain[i] * err;
  state.t = step;
  detail::check_state_finite(state, step);

  StepOutput out;
  out.prediction_raw = dot(state.w_hat, s.x);
  out.prediction_label = sign_label(out.prediction_raw);
  return out;
}

/// Recursive least squares without forgetting.
inline StepOutput rls_update(ModelState& state, const Sample& s) {
  return gdfop_update(state, s, 1.0);
}

/// Sliding-window least-squares baseline. Deliberately not one-pass: it
/// keeps the last `capacity` samples and refits on every update.
struct WindowState {
  explicit WindowState(std::size_t capacity_) : capacity(capacity_) {
    if (capacity == 0) throw ParameterError("window capacity must be >= 1");
  }

  std::size_t capacity;
  std::deque<Sample> buffer;
  Vec w_hat;
  long long t = 0;
};

/// Pushes the sample (evicting the oldest when full) and solves the ridge
/// normal equations over the buffer. ridge_eps keeps the system positive
/// definite while the window is still rank-deficient.
inline StepOutput window_ls_update(WindowState& state, const Sample& s,
                                   double ridge_eps = 1e-8) {
  if (!(ridge_eps > 0.0)) throw ParameterError("ridge_eps must be > 0");
  if (!state.buffer.empty() && state.buffer.front().x.size() != s.x.size()) {
    throw ParameterError("sample dimension changed mid-stream");
  }
  state.buffer.push_back(s);
  if (state.buffer.size() > state.capacity) state.buffer.pop_front();

  const std::size_t d = s.x.size();
  SymMatrix A = SymMatrix::identity(d, ridge_eps);
  Vec b(d, 0.0);
  for (const Sample& item : state.buffer) {
    A.add_outer(item.x, 1.0);
    for (std::size_t i = 0; i < d; ++i) b[i] += item.x[i] * item.y;
  }
  const long long step = state.t + 1;
  try {
    state.w_hat = solve_spd(A, b);
  } catch (const NumericError& e) {
    throw NumericError(e.what(), step);
  }
  state.t = step;

  StepOutput out;
  out.prediction_raw = dot(state.w_hat, s.x);
  out.prediction_label = sign_label(out.prediction_raw);
  return out;
}

// --- snapshot serialization ---------------------------------------------
//
// Flat text record with fixed-width fields, so the byte size is a function
// of the dimension alone. Doubles are written as %+.17e with a three-digit
// exponent (17 significant digits round-trip doubles exactly).

namespace detail {

inline std::string canonical_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%+.17e", v);
  std::string s(buf);
  const std::size_t e = s.find('e');
  if (e == std::string::npos || e + 2 > s.size()) {
    throw NumericError("snapshot: value is not finite");
  }
  std::string digits = s.substr(e + 2);
  while (digits.size() < 3) digits.insert(digits.begin(), '0');
  return s.substr(0, e + 2) + digits;
}

inline double parse_double_token(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw SchemaError("snapshot: malformed numeric field '" + tok + "'");
  }
  return v;
}

}  // namespace detail

inline std::string save_model_state(const ModelState& state) {
  if (state.dim() == 0) throw ParameterError("cannot serialize an empty state");
  if (!all_finite(state.w_hat) || !state.P.all_finite()) {
    throw NumericError("cannot serialize a non-finite state");
  }
  char head[96];
  std::snprintf(head, sizeof head, "dfop-state v1 d=%06zu t=%020lld\n",
                state.dim(), state.t);
  std::string out(head);
  out += "mu " + detail::canonical_double(state.mu) + "\n";
  out += "p0 " + detail::canonical_double(state.p0_scale) + "\n";
  out += "w ";
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (i) out += ' ';
    out += detail::canonical_double(state.w_hat[i]);
  }
  out += "\nP ";
  const std::size_t d = state.dim();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i || j) out += ' ';
      out += detail::canonical_double(state.P(i, j));
    }
  }
  out += '\n';
  return out;
}

inline ModelState load_model_state(const std::string& text) {
  std::istringstream in(text);
  std::string tag, version, dfield, tfield;
  in >> tag >> version >> dfield >> tfield;
  if (!in || tag != "dfop-state" || version != "v1" ||
      dfield.rfind("d=", 0) != 0 || tfield.rfind("t=", 0) != 0) {
    throw SchemaError("snapshot: bad header");
  }
  ModelState st;
  const long long d_raw = std::atoll(dfield.c_str() + 2);
  st.t = std::atoll(tfield.c_str() + 2);
  if (d_raw < 1 || d_raw > 1000000 || st.t < 0) {
    throw SchemaError("snapshot: implausible header fields");
  }
  const std::size_t d = static_cast<std::size_t>(d_raw);

  auto expect_key = [&in](const char* key) {
    std::string k;
    in >> k;
    if (!in || k != key) throw SchemaError(std::string("snapshot: expected field '") + key + "'");
  };
  auto read_value = [&in]() {
    std::string tok;
    in >> tok;
    if (!in) throw SchemaError("snapshot: truncated record");
    return detail::parse_double_token(tok);
  };

  expect_key("mu");
  st.mu = read_value();
  expect_key("p0");
  st.p0_scale = read_value();
  expect_key("w");
  st.w_hat.resize(d);
  for (std::size_t i = 0; i < d; ++i) st.w_hat[i] = read_value();
  expect_key("P");
  st.P = SymMatrix(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) st.P(i, j) = read_value();
  }
  std::string trailing;
  if (in >> trailing) throw SchemaError("snapshot: trailing content");

  // Integrity: finite values, valid hyperparameters, P symmetric positive
  // definite. A corrupted snapshot must fail here, not during later updates.
  if (!(st.mu >= 0.0) || !(st.mu < 1.0) || !(st.p0_scale > 0.0) ||
      !all_finite(st.w_hat) || !st.P.all_finite()) {
    throw SchemaError("snapshot: invalid field values");
  }
  if (st.P.max_asymmetry() > 1e-9) throw SchemaError("snapshot: P is not symmetric");
  try {
    Vec probe(d, 0.0);
    solve_spd(st.P, probe);
  } catch (const SingularMatrixError&) {
    throw SchemaError("snapshot: P is not positive definite");
  }
  return st;
}

}  // namespace dfop
