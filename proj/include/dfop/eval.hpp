#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dfop/errors.hpp"
#include "dfop/estimators.hpp"
#include "dfop/oracle.hpp"
#include "dfop/rng.hpp"
#include "dfop/streams.hpp"

namespace dfop {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Accumulated accuracy: AA(t) = (1/t) sum_{k<=t} 1{prediction_k == label_k}.
inline std::vector<double> accumulated_accuracy(const std::vector<double>& predictions,
                                                const std::vector<double>& labels) {
  if (predictions.size() != labels.size()) {
    throw ParameterError("accumulated_accuracy: size mismatch");
  }
  std::vector<double> aa(predictions.size());
  long long correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++correct;
    aa[i] = static_cast<double>(correct) / static_cast<double>(i + 1);
  }
  return aa;
}

inline double mse(const std::vector<double>& predictions,
                  const std::vector<double>& targets) {
  if (predictions.size() != targets.size()) throw ParameterError("mse: size mismatch");
  if (predictions.empty()) throw ParameterError("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - targets[i];
    s += e * e;
  }
  return s / static_cast<double>(predictions.size());
}

/// ||w_hat(t) - w(t)|| per step, against the trace's weight truth.
inline std::vector<double> estimate_error_series(const LabeledTrace& trace,
                                                 const std::vector<Vec>& w_hat_series) {
  if (!trace.has_weight_truth()) {
    throw MissingTruthError("estimate error needs weight ground truth");
  }
  if (w_hat_series.size() != trace.size()) {
    throw ParameterError("estimate_error_series: length mismatch");
  }
  std::vector<double> out(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (w_hat_series[i].size() != trace.dim) {
      throw ParameterError("estimate_error_series: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < trace.dim; ++j) {
      const double e = w_hat_series[i][j] - trace.true_w[i][j];
      s += e * e;
    }
    out[i] = std::sqrt(s);
  }
  return out;
}

/// Cross-dataset robustness: r_a = sum over datasets of
/// acc[a][m] / min over algorithms of acc[.][m]. Higher is better; the
/// per-dataset minimum must be positive.
inline std::vector<double> robustness(const std::vector<std::vector<double>>& acc) {
  if (acc.empty()) throw ParameterError("robustness: no algorithms");
  const std::size_t m = acc[0].size();
  if (m == 0) throw ParameterError("robustness: no datasets");
  for (const auto& row : acc) {
    if (row.size() != m) throw ParameterError("robustness: ragged accuracy table");
  }
  std::vector<double> r(acc.size(), 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double lo = acc[0][j];
    for (const auto& row : acc) lo = std::min(lo, row[j]);
    if (!(lo > 0.0)) {
      throw ParameterError("robustness: dataset " + std::to_string(j) +
                           " has non-positive minimum accuracy");
    }
    for (std::size_t a = 0; a < acc.size(); ++a) r[a] += acc[a][j] / lo;
  }
  return r;
}

/// mu matched to a drift period of T0 steps: the forgetting horizon
/// 1/mu equals T0.
inline double recommend_mu(double T0) {
  if (!(T0 >= 1.0)) throw ParameterError("recommend_mu: T0 must be >= 1");
  return 1.0 / T0;
}

/// recommend_mu rendered the way the reference tables print it (%.2E).
inline std::string format_mu_2e(double mu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2E", mu);
  return buf;
}

/// Accuracy of the model on n_test fresh draws from a stage concept's own
/// (noisy) distribution. Deterministic in the seed.
inline double holdout_accuracy(const ModelState& state, const StageConcept& cpt,
                               std::size_t n_test, std::uint64_t seed, bool add_bias) {
  if (n_test == 0) throw ParameterError("holdout: n_test must be >= 1");
  const std::size_t want = cpt.dim + (add_bias ? 1 : 0);
  if (state.dim() != want) throw ParameterError("holdout: model/concept dimension mismatch");
  Rng rng(seed);
  long long correct = 0;
  for (std::size_t i = 0; i < n_test; ++i) {
    Sample s = cpt.sample(rng);
    if (add_bias) s.x.push_back(1.0);
    if (predict(state, s.x, Task::classification) == s.y) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n_test);
}

// --- streaming run driver ---------------------------------------------------

enum class Algo { dfop, gdfop, rls, window };

inline const char* to_string(Algo a) {
  switch (a) {
    case Algo::dfop: return "dfop";
    case Algo::gdfop: return "gdfop";
    case Algo::rls: return "rls";
    case Algo::window: return "window";
  }
  return "?";
}

inline Algo algo_from_string(const std::string& s) {
  if (s == "dfop") return Algo::dfop;
  if (s == "gdfop") return Algo::gdfop;
  if (s == "rls") return Algo::rls;
  if (s == "window") return Algo::window;
  throw ParameterError("unknown algorithm '" + s + "'");
}

inline const char* to_string(Task t) {
  return t == Task::classification ? "classification" : "regression";
}

inline Task task_from_string(const std::string& s) {
  if (s == "classification") return Task::classification;
  if (s == "regression") return Task::regression;
  throw ParameterError("unknown task '" + s + "'");
}

/// The task a stream kind is evaluated as unless overridden.
inline Task default_task(StreamKind kind) {
  switch (kind) {
    case StreamKind::hyperplane_reg:
    case StreamKind::drifting_linear:
      return Task::regression;
    default:
      return Task::classification;
  }
}

struct RunSettings {
  Algo algo = Algo::dfop;
  Task task = Task::classification;
  double mu = 1e-3;
  double lambda = 1.0;       // gdfop: constant forgetting factor
  std::size_t window = 100;  // window baseline capacity
  double ridge_eps = 1e-8;
  double p0_scale = 1e3;
  DfopRecursion recursion = DfopRecursion::lemma_consistent;

  /// Append a constant-1 feature. Unset means: yes for classification
  /// (the synthetic concepts are affine), no for regression (keeps the
  /// estimate in the generator's weight space).
  std::optional<bool> add_bias;

  std::size_t holdout_every = 0;  // 0 disables periodic holdout scoring
  std::size_t holdout_size = 1000;
  std::uint64_t seed = 1;  // run-side randomness (holdout draws)

  /// Continue from a saved state instead of a fresh init. The snapshot's
  /// own mu/p0_scale govern the continuation; the caller is expected to
  /// feed the not-yet-consumed tail of the stream.
  std::optional<ModelState> resume_from;

  bool use_bias() const { return add_bias.value_or(task == Task::classification); }
};

/// One evaluated stream step. pred_* are thresholded labels for
/// classification and raw values for regression; aa_* are the running
/// accuracy (classification) or running MSE (regression), prequential and
/// post-update respectively; est_err is NaN when unavailable.
struct StepRecord {
  long long t = 0;
  double y = 0.0;
  double pred_pre = 0.0;
  double pred_post = 0.0;
  double aa_pre = 0.0;
  double aa_post = 0.0;
  double est_err = kNaN;
};

struct HoldoutPoint {
  long long t = 0;
  double accuracy = 0.0;
};

struct RunResult {
  Task task = Task::classification;
  Algo algo = Algo::dfop;
  std::vector<StepRecord> steps;
  std::vector<HoldoutPoint> holdout;

  bool has_model_state = false;  // false for the window baseline
  ModelState final_state;
  bool est_err_available = false;

  double mean_acc_pre = kNaN;   // classification summaries
  double mean_acc_post = kNaN;
  double mean_holdout_acc = kNaN;
  double mse_pre = kNaN;        // regression summaries
  double mse_post = kNaN;
  double final_quarter_est_err = kNaN;
  double final_est_err = kNaN;
};

namespace detail {

inline void check_run_settings(const RunSettings& s) {
  check_mu(s.mu);
  if (!(s.lambda > 0.0) || !(s.lambda <= 1.0)) {
    throw ParameterError("lambda must lie in (0, 1]");
  }
  if (!(s.p0_scale > 0.0)) throw ParameterError("p0_scale must be > 0");
  if (!(s.ridge_eps > 0.0)) throw ParameterError("ridge_eps must be > 0");
  if (s.algo == Algo::window && s.window == 0) {
    throw ParameterError("window capacity must be >= 1");
  }
  if (s.holdout_every > 0 && s.holdout_size == 0) {
    throw ParameterError("holdout_size must be >= 1");
  }
}

}  // namespace detail

/// Single one-pass run of an estimator over a trace. `spec` is consulted
/// only for holdout scoring (stage concepts); pass holdout_every = 0 when
/// no spec context exists. Numeric failures propagate with their step.
inline RunResult run_stream(const StreamSpec& spec, const LabeledTrace& trace,
                            const RunSettings& settings) {
  detail::check_run_settings(settings);
  if (trace.size() == 0) throw ParameterError("run_stream: empty trace");
  const bool bias = settings.use_bias();
  const std::size_t d = trace.dim + (bias ? 1 : 0);
  const bool cls = settings.task == Task::classification;

  const bool want_est_err = trace.has_weight_truth() && !bias;
  if (settings.holdout_every > 0 && !trace.has_stage()) {
    throw MissingTruthError("holdout scoring needs per-step stage truth");
  }

  RunResult res;
  res.task = settings.task;
  res.algo = settings.algo;
  res.steps.resize(trace.size());
  res.est_err_available = want_est_err;

  ModelState st;
  std::optional<WindowState> win;
  if (settings.algo == Algo::window) {
    if (settings.resume_from) {
      throw ParameterError("resume is not supported for the window baseline");
    }
    win.emplace(settings.window);
    win->w_hat.assign(d, 0.0);
  } else if (settings.resume_from) {
    st = *settings.resume_from;
    if (st.dim() != d) {
      throw ParameterError("resume: snapshot dimension " + std::to_string(st.dim()) +
                           " does not match stream dimension " + std::to_string(d));
    }
  } else {
    st = dfop_init(d, settings.algo == Algo::dfop ? settings.mu : 0.0,
                   settings.p0_scale);
  }

  long long correct_pre = 0, correct_post = 0;
  double se_pre = 0.0, se_post = 0.0;
  double holdout_sum = 0.0;
  std::size_t holdout_count = 0;

  Sample s;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const long long t = static_cast<long long>(i) + 1;
    s.x = trace.samples[i].x;
    if (bias) s.x.push_back(1.0);
    s.y = trace.samples[i].y;

    const Vec& w_before = win ? win->w_hat : st.w_hat;
    const double pre_raw = dot(w_before, s.x);

    StepOutput out;
    switch (settings.algo) {
      case Algo::dfop:
        out = dfop_update(st, s, settings.recursion);
        break;
      case Algo::gdfop:
        out = gdfop_update(st, s, settings.lambda);
        break;
      case Algo::rls:
        out = rls_update(st, s);
        break;
      case Algo::window:
        out = window_ls_update(*win, s, settings.ridge_eps);
        break;
    }

    StepRecord& rec = res.steps[i];
    rec.t = t;
    rec.y = s.y;
    if (cls) {
      rec.pred_pre = sign_label(pre_raw);
      rec.pred_post = out.prediction_label;
      if (rec.pred_pre == s.y) ++correct_pre;
      if (rec.pred_post == s.y) ++correct_post;
      rec.aa_pre = static_cast<double>(correct_pre) / static_cast<double>(t);
      rec.aa_post = static_cast<double>(correct_post) / static_cast<double>(t);
    } else {
      rec.pred_pre = pre_raw;
      rec.pred_post = out.prediction_raw;
      const double epre = pre_raw - s.y, epost = out.prediction_raw - s.y;
      se_pre += epre * epre;
      se_post += epost * epost;
      rec.aa_pre = se_pre / static_cast<double>(t);
      rec.aa_post = se_post / static_cast<double>(t);
    }
    if (want_est_err) {
      const Vec& w_after = win ? win->w_hat : st.w_hat;
      double acc = 0.0;
      for (std::size_t j = 0; j < trace.dim; ++j) {
        const double e = w_after[j] - trace.true_w[i][j];
        acc += e * e;
      }
      rec.est_err = std::sqrt(acc);
    }

    if (settings.holdout_every > 0 &&
        t % static_cast<long long>(settings.holdout_every) == 0) {
      const StageConcept cpt = stage_concept(spec, trace.stage[i]);
      const std::uint64_t hseed =
          derive_seed(settings.seed, "holdout", static_cast<std::uint64_t>(t));
      const ModelState* scorer = &st;
      ModelState win_state;  // adapt the window baseline for scoring
      if (win) {
        win_state.w_hat = win->w_hat;
        win_state.t = t;
        scorer = &win_state;
      }
      const double acc =
          holdout_accuracy(*scorer, cpt, settings.holdout_size, hseed, bias);
      res.holdout.push_back({t, acc});
      holdout_sum += acc;
      ++holdout_count;
    }
  }

  const double n = static_cast<double>(trace.size());
  if (cls) {
    res.mean_acc_pre = static_cast<double>(correct_pre) / n;
    res.mean_acc_post = static_cast<double>(correct_post) / n;
  } else {
    res.mse_pre = se_pre / n;
    res.mse_post = se_post / n;
  }
  if (holdout_count > 0) {
    res.mean_holdout_acc = holdout_sum / static_cast<double>(holdout_count);
  }
  if (want_est_err) {
    const std::size_t q = (trace.size() + 3) / 4;
    double acc = 0.0;
    for (std::size_t i = trace.size() - q; i < trace.size(); ++i) {
      acc += res.steps[i].est_err;
    }
    res.final_quarter_est_err = acc / static_cast<double>(q);
    res.final_est_err = res.steps.back().est_err;
  }
  if (!win) {
    res.has_model_state = true;
    res.final_state = st;
  }
  return res;
}

inline RunResult run_stream(const StreamSpec& spec, const RunSettings& settings) {
  const LabeledTrace trace = generate(spec);
  return run_stream(spec, trace, settings);
}

// --- mu sweep ----------------------------------------------------------------

struct SweepCell {
  double mu = 0.0;
  std::size_t n_seeds = 0;   // successful runs aggregated below
  std::size_t failures = 0;  // numeric failures, recorded not fatal
  std::string first_error;

  double acc_mean = kNaN, acc_std = kNaN;          // classification
  double mse_mean = kNaN, mse_std = kNaN;          // regression
  double est_err_mean = kNaN, est_err_std = kNaN;  // final-quarter ||w - w_hat||
};

struct SweepResult {
  std::vector<SweepCell> cells;
};

namespace detail {

inline void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  if (v.empty()) {
    mean = kNaN;
    sd = kNaN;
    return;
  }
  double s = 0.0;
  for (double x : v) s += x;
  mean = s / static_cast<double>(v.size());
  if (v.size() == 1) {
    sd = 0.0;
    return;
  }
  double q = 0.0;
  for (double x : v) q += (x - mean) * (x - mean);
  sd = std::sqrt(q / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Runs the dfop estimator across a mu grid x seed list on the same stream
/// family. Each cell depends only on (spec, mu, seed), so results are
/// independent of grid order. A numeric failure marks its cell and the
/// sweep continues.
inline SweepResult mu_sweep(const StreamSpec& spec, const std::vector<double>& mu_grid,
                            const std::vector<std::uint64_t>& seeds,
                            const RunSettings& base) {
  if (mu_grid.empty()) throw ParameterError("mu_sweep: empty mu grid");
  if (seeds.empty()) throw ParameterError("mu_sweep: empty seed list");
  for (double mu : mu_grid) detail::check_mu(mu);

  SweepResult out;
  out.cells.reserve(mu_grid.size());
  for (double mu : mu_grid) {
    SweepCell cell;
    cell.mu = mu;
    std::vector<double> accs, mses, errs;
    for (std::uint64_t seed : seeds) {
      StreamSpec sp = spec;
      sp.seed = seed;
      RunSettings rs = base;
      rs.algo = Algo::dfop;
      rs.mu = mu;
      rs.seed = seed;
      try {
        const RunResult r = run_stream(sp, rs);
        if (rs.task == Task::classification) accs.push_back(r.mean_acc_pre);
        else mses.push_back(r.mse_pre);
        if (r.est_err_available) errs.push_back(r.final_quarter_est_err);
        ++cell.n_seeds;
      } catch (const NumericError& e) {
        ++cell.failures;
        if (cell.first_error.empty()) cell.first_error = e.what();
      }
    }
    detail::mean_std(accs, cell.acc_mean, cell.acc_std);
    detail::mean_std(mses, cell.mse_mean, cell.mse_std);
    detail::mean_std(errs, cell.est_err_mean, cell.est_err_std);
    out.cells.push_back(std::move(cell));
  }
  return out;
}

// --- bound Monte-Carlo validation ---------------------------------------------

struct MonteCarloReport {
  std::size_t n_runs = 0;
  std::size_t completed = 0;
  std::size_t held = 0;
  std::size_t numeric_failures = 0;
  double coverage = kNaN;  // held / completed
  double max_recurrence_residual = 0.0;
  double max_err_over_bound = 0.0;
  double mean_error = kNaN;
  double mean_bound = kNaN;
  std::vector<double> errors;  // one entry per completed run
  std::vector<double> bounds;
};

/// Replays the random-walk model n_runs times, evaluates the error bound
/// with realized constants (K, x*, and the sub-Gaussian scales implied by
/// gamma and sigma) and reports how often ||w_hat(T) - w(T)|| stays below
/// it. Each run also re-checks the error-propagation identity.
inline MonteCarloReport bound_montecarlo(std::size_t d, std::size_t n_runs, double gamma,
                                         double sigma, double mu, double delta,
                                         std::uint64_t seed, std::size_t n_steps = 5000,
                                         double p0_scale = 1.0) {
  if (n_runs < 50) throw ParameterError("bound_montecarlo: n_runs must be >= 50");
  if (d == 0) throw ParameterError("dimension must be >= 1");
  if (n_steps == 0) throw ParameterError("n_steps must be >= 1");
  if (!(mu > 0.0) || !(mu < 1.0)) throw ParameterError("mu must lie in (0, 1)");
  if (!(delta > 0.0) || !(delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (!(gamma >= 0.0) || !(sigma >= 0.0)) throw ParameterError("gamma/sigma must be >= 0");
  if (!(p0_scale > 0.0)) throw ParameterError("p0_scale must be > 0");

  MonteCarloReport rep;
  rep.n_runs = n_runs;
  double err_sum = 0.0, bound_sum = 0.0;
  for (std::size_t r = 0; r < n_runs; ++r) {
    const LabeledTrace trace =
        gen_drifting_linear(d, n_steps, gamma, sigma, derive_seed(seed, "mc-run", r));
    try {
      ModelState st = dfop_init(d, mu, p0_scale);
      double K = spectral_norm(st.P);
      double x_star = 0.0;
      for (std::size_t i = 0; i < n_steps; ++i) {
        dfop_update(st, trace.samples[i]);
        K = std::max(K, spectral_norm(st.P));
        x_star = std::max(x_star, norm2(trace.samples[i].x));
      }
      double err_acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double e = st.w_hat[j] - trace.true_w[n_steps - 1][j];
        err_acc += e * e;
      }
      const double error = std::sqrt(err_acc);

      BoundParams bp;
      bp.K = K;
      bp.x_star = x_star;
      bp.sigma_star = x_star * sigma;
      bp.gamma_star = gaussian_vector_bounding_constant(gamma, d);
      bp.R0_norm = 1.0 / p0_scale;
      bp.w_tilde0_norm = norm2(trace.w0_truth);
      bp.mu = mu;
      bp.t = static_cast<long long>(n_steps);
      bp.delta = delta;
      const double bound = theorem2_bound(bp);

      rep.max_recurrence_residual = std::max(
          rep.max_recurrence_residual, wtilde_recurrence_check(trace, mu, p0_scale));

      ++rep.completed;
      if (error <= bound) ++rep.held;
      rep.errors.push_back(error);
      rep.bounds.push_back(bound);
      err_sum += error;
      bound_sum += bound;
      if (bound > 0.0) {
        rep.max_err_over_bound = std::max(rep.max_err_over_bound, error / bound);
      }
    } catch (const NumericError&) {
      ++rep.numeric_failures;
    }
  }
  if (rep.completed > 0) {
    rep.coverage = static_cast<double>(rep.held) / static_cast<double>(rep.completed);
    rep.mean_error = err_sum / static_cast<double>(rep.completed);
    rep.mean_bound = bound_sum / static_cast<double>(rep.completed);
  }
  return rep;
}

// --- result serialization -----------------------------------------------------
//
// metrics.csv: t,y,pred_pre,pred_post,aa_pre,aa_post[,est_err]
// holdout.csv: t,accuracy
// sweep.csv:   mu,n_seeds,failures,acc_mean,acc_std,mse_mean,mse_std,
//              est_err_mean,est_err_std
// Summaries are flat JSON objects; unavailable numbers are null.

namespace detail {

inline std::string json_num(double v) {
  if (std::isnan(v)) return "null";
  return fmt_g17(v);
}

}  // namespace detail

inline void write_metrics_csv(const RunResult& res, std::ostream& out) {
  out << "t,y,pred_pre,pred_post,aa_pre,aa_post";
  if (res.est_err_available) out << ",est_err";
  out << '\n';
  for (const StepRecord& r : res.steps) {
    out << r.t << ',' << detail::fmt_g17(r.y) << ',' << detail::fmt_g17(r.pred_pre)
        << ',' << detail::fmt_g17(r.pred_post) << ',' << detail::fmt_g17(r.aa_pre)
        << ',' << detail::fmt_g17(r.aa_post);
    if (res.est_err_available) out << ',' << detail::fmt_g17(r.est_err);
    out << '\n';
  }
  if (!out) throw Error("metrics: write failed");
}

inline void write_holdout_csv(const RunResult& res, std::ostream& out) {
  out << "t,accuracy\n";
  for (const HoldoutPoint& h : res.holdout) {
    out << h.t << ',' << detail::fmt_g17(h.accuracy) << '\n';
  }
  if (!out) throw Error("holdout: write failed");
}

inline void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  out << "mu,n_seeds,failures,acc_mean,acc_std,mse_mean,mse_std,est_err_mean,est_err_std\n";
  for (const SweepCell& c : sweep.cells) {
    out << detail::fmt_g17(c.mu) << ',' << c.n_seeds << ',' << c.failures << ','
        << detail::fmt_g17(c.acc_mean) << ',' << detail::fmt_g17(c.acc_std) << ','
        << detail::fmt_g17(c.mse_mean) << ',' << detail::fmt_g17(c.mse_std) << ','
        << detail::fmt_g17(c.est_err_mean) << ',' << detail::fmt_g17(c.est_err_std)
        << '\n';
  }
  if (!out) throw Error("sweep: write failed");
}

inline std::string summary_json(const RunResult& res) {
  std::string j = "{\n";
  j += "  \"task\": \"" + std::string(to_string(res.task)) + "\",\n";
  j += "  \"algo\": \"" + std::string(to_string(res.algo)) + "\",\n";
  j += "  \"n\": " + std::to_string(res.steps.size()) + ",\n";
  j += "  \"mean_acc_pre\": " + detail::json_num(res.mean_acc_pre) + ",\n";
  j += "  \"mean_acc_post\": " + detail::json_num(res.mean_acc_post) + ",\n";
  j += "  \"mean_holdout_acc\": " + detail::json_num(res.mean_holdout_acc) + ",\n";
  j += "  \"mse_pre\": " + detail::json_num(res.mse_pre) + ",\n";
  j += "  \"mse_post\": " + detail::json_num(res.mse_post) + ",\n";
  j += "  \"final_quarter_est_err\": " + detail::json_num(res.final_quarter_est_err) + ",\n";
  j += "  \"final_est_err\": " + detail::json_num(res.final_est_err) + "\n";
  j += "}\n";
  return j;
}

inline std::string montecarlo_json(const MonteCarloReport& rep) {
  std::string j = "{\n";
  j += "  \"n_runs\": " + std::to_string(rep.n_runs) + ",\n";
  j += "  \"completed\": " + std::to_string(rep.completed) + ",\n";
  j += "  \"held\": " + std::to_string(rep.held) + ",\n";
  j += "  \"numeric_failures\": " + std::to_string(rep.numeric_failures) + ",\n";
  j += "  \"coverage\": " + detail::json_num(rep.coverage) + ",\n";
  j += "  \"max_recurrence_residual\": " + detail::json_num(rep.max_recurrence_residual) + ",\n";
  j += "  \"max_err_over_bound\": " + detail::json_num(rep.max_err_over_bound) + ",\n";
  j += "  \"mean_error\": " + detail::json_num(rep.mean_error) + ",\n";
  j += "  \"mean_bound\": " + detail::json_num(rep.mean_bound) + "\n";
  j += "}\n";
  return j;
}

}  // namespace dfop
