// dfop command-line front end: generate / run / sweep / verify / bound.
//
// Exit codes: 0 success, 1 usage, 2 data/parse/schema, 3 numeric failure,
// 4 verification failure. Every error path prints a single line to stderr
// of the form "error[<class>]: <message>".

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dfop/dfop.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw dfop::Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw dfop::Error("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw dfop::Error("write failed: '" + path + "'");
}

std::string fmt_res(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// --- config file + precedence (flag > config key > default) -------------------

nlohmann::json load_config(const std::string& path,
                           const std::vector<std::string>& allowed) {
  std::ifstream f(path);
  if (!f) throw dfop::Error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw dfop::ParseError(std::string("config: ") + e.what(), 0);
  }
  if (!j.is_object()) throw dfop::SchemaError("config: top level must be an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw dfop::ParameterError("config: unknown key '" + item.key() + "'");
    }
  }
  return j;
}

struct Pick {
  const nlohmann::json* cfg = nullptr;

  template <class T>
  T operator()(const CLI::Option* o, const T& bound, const char* key, T def) const {
    if (o != nullptr && o->count() > 0) return bound;
    if (cfg != nullptr && cfg->contains(key)) {
      try {
        return cfg->at(key).get<T>();
      } catch (const nlohmann::json::exception&) {
        throw dfop::ParameterError(std::string("config: key '") + key +
                                   "' has the wrong type");
      }
    }
    return def;
  }
};

// --- shared option bundles -----------------------------------------------------

struct StreamOpts {
  std::string stream = "sea";
  std::size_t n = 50000;
  std::uint64_t seed = 1;
  double noise_rate = 0.0;
  std::size_t dim = 3;
  double gamma = 0.0;
  double sigma = 0.0;
  std::string input;
  CLI::Option *o_stream{}, *o_n{}, *o_seed{}, *o_noise{}, *o_dim{}, *o_gamma{},
      *o_sigma{}, *o_input{};

  void attach(CLI::App* c) {
    o_stream = c->add_option(
        "--stream", stream,
        "stream kind: sea | hyperplane_cls | hyperplane_reg | drifting_linear | csv");
    o_n = c->add_option("--n", n, "number of stream steps");
    o_seed = c->add_option("--seed", seed, "root seed (stream and run randomness)");
    o_noise = c->add_option("--noise-rate", noise_rate, "sea: label flip probability");
    o_dim = c->add_option("--dim", dim, "drifting_linear: feature dimension");
    o_gamma = c->add_option("--gamma", gamma, "drifting_linear: drift stddev");
    o_sigma = c->add_option("--sigma", sigma, "drifting_linear: noise stddev");
    o_input = c->add_option("--input", input, "csv stream: input file");
  }

  dfop::StreamSpec resolve(const Pick& pick) const {
    dfop::StreamSpec s;
    s.kind = dfop::stream_kind_from_string(
        pick(o_stream, stream, "stream", std::string("sea")));
    s.n = pick(o_n, n, "n", std::size_t{50000});
    s.seed = pick(o_seed, seed, "seed", std::uint64_t{1});
    s.noise_rate = pick(o_noise, noise_rate, "noise_rate", 0.0);
    s.dim = pick(o_dim, dim, "dim", std::size_t{3});
    s.gamma = pick(o_gamma, gamma, "gamma", 0.0);
    s.sigma = pick(o_sigma, sigma, "sigma", 0.0);
    s.path = pick(o_input, input, "input", std::string());
    if (pick.cfg != nullptr && pick.cfg->contains("w0")) {
      s.w0 = pick.cfg->at("w0").get<std::vector<double>>();
    }
    if (s.kind == dfop::StreamKind::csv && s.path.empty()) {
      throw dfop::ParameterError("csv stream needs --input (or config key 'input')");
    }
    return s;
  }
};

struct EstimatorOpts {
  std::string algo = "dfop";
  std::string task;
  double mu = 1e-3;
  double lambda = 1.0;
  std::size_t window = 100;
  double p0_scale = 1e3;
  bool paper_literal = false;
  int add_bias = -1;
  std::size_t holdout_every = 0;
  std::size_t holdout_size = 1000;
  CLI::Option *o_algo{}, *o_task{}, *o_mu{}, *o_lambda{}, *o_window{}, *o_p0{},
      *o_literal{}, *o_bias{}, *o_hev{}, *o_hsz{};

  void attach(CLI::App* c, bool with_algo, bool with_holdout) {
    if (with_algo) {
      o_algo = c->add_option("--algo", algo, "estimator: dfop | gdfop | rls | window");
      o_lambda = c->add_option("--lambda", lambda, "gdfop: forgetting factor in (0,1]");
      o_window = c->add_option("--window", window, "window baseline capacity");
      o_mu = c->add_option("--mu", mu, "dfop forgetting factor in [0,1)");
    }
    o_task = c->add_option("--task", task, "classification | regression");
    o_p0 = c->add_option("--p0-scale", p0_scale, "initial P = I * p0_scale");
    o_literal = c->add_flag("--paper-literal-recursion", paper_literal,
                            "use the literal P(t) recursion (unstable; see docs)");
    o_bias = c->add_option("--add-bias", add_bias, "append a constant-1 feature (0|1)")
                 ->check(CLI::Range(0, 1));
    if (with_holdout) {
      o_hev = c->add_option("--holdout-every", holdout_every,
                            "holdout cadence in steps (0 = off)");
      o_hsz = c->add_option("--holdout-size", holdout_size, "holdout draws per point");
    }
  }

  dfop::RunSettings resolve(const Pick& pick, const dfop::StreamSpec& spec,
                            bool with_holdout) const {
    dfop::RunSettings rs;
    rs.algo = dfop::algo_from_string(pick(o_algo, algo, "algo", std::string("dfop")));
    const std::string t = pick(o_task, task, "task", std::string());
    rs.task = t.empty() ? dfop::default_task(spec.kind) : dfop::task_from_string(t);
    rs.mu = pick(o_mu, mu, "mu", dfop::recommend_mu(1000.0));
    rs.lambda = pick(o_lambda, lambda, "lambda", 1.0);
    rs.window = pick(o_window, window, "window", std::size_t{100});
    rs.p0_scale = pick(o_p0, p0_scale, "p0_scale", 1e3);
    rs.recursion = pick(o_literal, paper_literal, "paper_literal_recursion", false)
                       ? dfop::DfopRecursion::paper_literal
                       : dfop::DfopRecursion::lemma_consistent;
    if (o_bias != nullptr && o_bias->count() > 0) {
      rs.add_bias = add_bias != 0;
    } else if (pick.cfg != nullptr && pick.cfg->contains("add_bias")) {
      rs.add_bias = pick.cfg->at("add_bias").get<bool>();
    }
    if (with_holdout) {
      const bool has_concepts = spec.kind == dfop::StreamKind::sea ||
                                spec.kind == dfop::StreamKind::hyperplane_cls ||
                                spec.kind == dfop::StreamKind::hyperplane_reg;
      rs.holdout_every = pick(o_hev, holdout_every, "holdout_every",
                              std::size_t{has_concepts ? 250u : 0u});
      rs.holdout_size = pick(o_hsz, holdout_size, "holdout_size", std::size_t{1000});
    }
    rs.seed = spec.seed;
    return rs;
  }
};

ojson spec_echo(const dfop::StreamSpec& spec) {
  ojson j;
  j["stream"] = dfop::to_string(spec.kind);
  j["n"] = spec.n;
  j["seed"] = spec.seed;
  j["noise_rate"] = spec.noise_rate;
  j["dim"] = spec.dim;
  j["gamma"] = spec.gamma;
  j["sigma"] = spec.sigma;
  j["input"] = spec.path.empty() ? ojson(nullptr) : ojson(spec.path);
  j["w0"] = spec.w0.empty() ? ojson(nullptr) : ojson(spec.w0);
  return j;
}

ojson settings_echo(const dfop::RunSettings& rs) {
  ojson j;
  j["algo"] = dfop::to_string(rs.algo);
  j["task"] = dfop::to_string(rs.task);
  j["mu"] = rs.mu;
  j["lambda"] = rs.lambda;
  j["window"] = rs.window;
  j["p0_scale"] = rs.p0_scale;
  j["paper_literal_recursion"] = rs.recursion == dfop::DfopRecursion::paper_literal;
  j["add_bias"] = rs.use_bias();
  j["holdout_every"] = rs.holdout_every;
  j["holdout_size"] = rs.holdout_size;
  return j;
}

dfop::LabeledTrace tail_of(dfop::LabeledTrace tr, std::size_t k) {
  const auto cut = [k](auto& v) {
    if (!v.empty()) v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
  };
  cut(tr.samples);
  cut(tr.stage);
  cut(tr.true_w);
  cut(tr.drift_s);
  cut(tr.noise_eps);
  cut(tr.label);
  return tr;
}

dfop::LabeledTrace head_of(dfop::LabeledTrace tr, std::size_t k) {
  const auto trim = [k](auto& v) {
    if (v.size() > k) v.resize(k);
  };
  trim(tr.samples);
  trim(tr.stage);
  trim(tr.true_w);
  trim(tr.drift_s);
  trim(tr.noise_eps);
  trim(tr.label);
  return tr;
}

// --- subcommands ----------------------------------------------------------------

int cmd_generate(const dfop::StreamSpec& spec, const std::string& out) {
  if (spec.kind == dfop::StreamKind::csv) {
    throw dfop::ParameterError("generate needs a synthetic stream kind, not csv");
  }
  const dfop::LabeledTrace trace = dfop::generate(spec);
  dfop::write_csv(trace, out);
  std::cout << "wrote " << out << " (" << trace.size() << " rows)\n";
  return 0;
}

int cmd_run(const dfop::StreamSpec& spec, dfop::RunSettings rs, const std::string& out,
            const std::string& resume, std::size_t stop_after) {
  dfop::LabeledTrace trace = dfop::generate(spec);
  // Stopping early keeps the stream itself (stage boundaries scale with the
  // full n), so a later --resume continues the identical sequence.
  if (stop_after > 0) trace = head_of(std::move(trace), stop_after);
  long long skip = 0;
  if (!resume.empty()) {
    dfop::ModelState st = dfop::load_model_state(read_file(resume));
    skip = st.t;
    if (skip < 0 || static_cast<std::size_t>(skip) >= trace.size()) {
      throw dfop::ParameterError("resume: snapshot step " + std::to_string(skip) +
                                 " is at or beyond the trace end");
    }
    rs.resume_from = std::move(st);
    trace = tail_of(std::move(trace), static_cast<std::size_t>(skip));
  }
  const dfop::RunResult res = dfop::run_stream(spec, trace, rs);

  fs::create_directories(out);
  ojson cfg;
  cfg["command"] = "run";
  cfg.update(spec_echo(spec));
  cfg.update(settings_echo(rs));
  cfg["stop_after"] = stop_after;
  cfg["resume"] = resume.empty() ? ojson(nullptr) : ojson(resume);
  write_file(out + "/config.json", cfg.dump(2) + "\n");

  {
    std::ofstream f(out + "/metrics.csv", std::ios::binary);
    if (!f) throw dfop::Error("cannot open '" + out + "/metrics.csv' for writing");
    dfop::write_metrics_csv(res, f);
  }
  if (rs.holdout_every > 0) {
    std::ofstream f(out + "/holdout.csv", std::ios::binary);
    if (!f) throw dfop::Error("cannot open '" + out + "/holdout.csv' for writing");
    dfop::write_holdout_csv(res, f);
  }
  const std::string summary = dfop::summary_json(res);
  write_file(out + "/summary.json", summary);
  if (res.has_model_state) {
    write_file(out + "/model.snapshot", dfop::save_model_state(res.final_state));
  }
  std::cout << summary;
  return 0;
}

int cmd_sweep(const dfop::StreamSpec& spec, const dfop::RunSettings& base,
              const std::vector<double>& grid, const std::vector<std::uint64_t>& seeds,
              const std::string& out) {
  const dfop::SweepResult sw = dfop::mu_sweep(spec, grid, seeds, base);

  fs::create_directories(out);
  ojson cfg;
  cfg["command"] = "sweep";
  cfg.update(spec_echo(spec));
  cfg.update(settings_echo(base));
  cfg["mu_grid"] = grid;
  cfg["seeds"] = seeds;
  write_file(out + "/config.json", cfg.dump(2) + "\n");

  std::ostringstream csv;
  dfop::write_sweep_csv(sw, csv);
  write_file(out + "/sweep.csv", csv.str());

  ojson rep;
  rep["cells"] = ojson::array();
  for (const dfop::SweepCell& c : sw.cells) {
    ojson cell;
    cell["mu"] = c.mu;
    cell["n_seeds"] = c.n_seeds;
    cell["failures"] = c.failures;
    cell["first_error"] = c.first_error.empty() ? ojson(nullptr) : ojson(c.first_error);
    cell["acc_mean"] = c.acc_mean;
    cell["acc_std"] = c.acc_std;
    cell["mse_mean"] = c.mse_mean;
    cell["mse_std"] = c.mse_std;
    cell["est_err_mean"] = c.est_err_mean;
    cell["est_err_std"] = c.est_err_std;
    rep["cells"].push_back(std::move(cell));
  }
  write_file(out + "/sweep.json", rep.dump(2) + "\n");
  std::cout << csv.str();
  return 0;
}

int cmd_verify(bool paper_literal, const std::string& snapshot) {
  bool all_ok = true;
  const auto report = [&all_ok](const char* name, double residual, double tol) {
    const bool ok = residual <= tol;
    all_ok = all_ok && ok;
    std::cout << "check " << name << ": max residual " << fmt_res(residual) << " (tol "
              << fmt_res(tol) << ") " << (ok ? "ok" : "FAILED") << '\n';
  };

  // Recursive estimate vs the closed-form discounted least-squares solution.
  {
    const dfop::DfopRecursion rec = paper_literal ? dfop::DfopRecursion::paper_literal
                                                  : dfop::DfopRecursion::lemma_consistent;
    const double mus[] = {0.01, 0.1, 0.3};
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t d = 1 + static_cast<std::size_t>(i) % 5;
      const double mu = mus[i % 3];
      const double p0 = (i % 2 == 0) ? 1.0 : 1e3;
      const dfop::LabeledTrace tr = dfop::gen_drifting_linear(
          d, 200, 0.0, 0.1, dfop::derive_seed(777, "verify-oracle", i));
      dfop::ModelState st = dfop::dfop_init(d, mu, p0);
      dfop::History h;
      const dfop::SymMatrix R0 = dfop::dfop_equivalent_prior(d, mu, p0);
      const dfop::Vec w0(d, 0.0);
      try {
        for (std::size_t t = 0; t < tr.size(); ++t) {
          dfop::dfop_update(st, tr.samples[t], rec);
          h.push(tr.samples[t], 1.0 - mu);
          if ((t + 1) % 20 == 0 || t + 1 == tr.size()) {
            const dfop::Vec w_star = dfop::closed_form_weighted_ls(h, R0, w0);
            for (std::size_t j = 0; j < d; ++j) {
              worst = std::max(worst, std::abs(st.w_hat[j] - w_star[j]));
            }
          }
        }
      } catch (const dfop::NumericError&) {
        worst = std::numeric_limits<double>::infinity();  // divergence: report, not crash
        break;
      }
    }
    report("oracle-equivalence", worst, 1e-8);
  }

  // DFOP(mu) against G-DFOP(lambda = 1 - mu) started from P_G(0) = mu * P_D(0).
  {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t d = 1 + static_cast<std::size_t>(i) % 5;
      const double mu = 0.05 + 0.02 * i;
      const double p0 = (i % 2 == 0) ? 1.0 : 1e3;
      const dfop::LabeledTrace tr = dfop::gen_drifting_linear(
          d, 500, 0.0, 0.1, dfop::derive_seed(777, "verify-rec", i));
      dfop::ModelState a = dfop::dfop_init(d, mu, p0);
      dfop::ModelState b = dfop::dfop_init(d, 0.0, mu * p0);
      for (std::size_t t = 0; t < tr.size(); ++t) {
        dfop::dfop_update(a, tr.samples[t]);
        dfop::gdfop_update(b, tr.samples[t], 1.0 - mu);
        for (std::size_t j = 0; j < d; ++j) {
          worst = std::max(worst, std::abs(a.w_hat[j] - b.w_hat[j]));
        }
      }
    }
    report("gdfop-reconciliation", worst, 1e-8);
  }

  // Error-propagation identity on drifting streams with full truth columns.
  {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const dfop::LabeledTrace tr = dfop::gen_drifting_linear(
          3, 2000, 1e-3, 0.1, dfop::derive_seed(777, "verify-wtilde", i));
      worst = std::max(worst, dfop::wtilde_recurrence_check(tr, 0.01, 1e3));
    }
    report("wtilde-recurrence", worst, 1e-8);
  }

  if (!snapshot.empty()) {
    const dfop::ModelState st = dfop::load_model_state(read_file(snapshot));
    std::cout << "check snapshot-integrity: ok (d=" << st.dim() << ", t=" << st.t
              << ")\n";
  }

  std::cout << "verify: " << (all_ok ? "PASS" : "FAIL") << '\n';
  return all_ok ? 0 : 4;
}

int bound_replay(const std::string& run_dir, double delta) {
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(read_file(run_dir + "/config.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw dfop::ParseError(std::string("config.json: ") + e.what(), 0);
  }
  if (cfg.value("stream", "") != "drifting_linear") {
    throw dfop::MissingTruthError(
        "bound replay needs a drifting_linear run (weight ground truth)");
  }
  if (cfg.value("algo", "") != "dfop" || cfg.value("add_bias", true) ||
      cfg.value("paper_literal_recursion", false)) {
    throw dfop::ParameterError(
        "bound replay needs a plain dfop run in the generator's weight space");
  }

  dfop::StreamSpec spec;
  spec.kind = dfop::StreamKind::drifting_linear;
  spec.n = cfg.at("n").get<std::size_t>();
  spec.seed = cfg.at("seed").get<std::uint64_t>();
  spec.dim = cfg.at("dim").get<std::size_t>();
  spec.gamma = cfg.at("gamma").get<double>();
  spec.sigma = cfg.at("sigma").get<double>();
  if (cfg.contains("w0") && !cfg.at("w0").is_null()) {
    spec.w0 = cfg.at("w0").get<std::vector<double>>();
  }
  const double mu = cfg.at("mu").get<double>();
  const double p0 = cfg.at("p0_scale").get<double>();

  const dfop::LabeledTrace trace = dfop::generate(spec);
  dfop::ModelState st = dfop::dfop_init(spec.dim, mu, p0);
  double K = dfop::spectral_norm(st.P);
  double x_star = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    dfop::dfop_update(st, trace.samples[i]);
    K = std::max(K, dfop::spectral_norm(st.P));
    x_star = std::max(x_star, dfop::norm2(trace.samples[i].x));
  }
  double err_acc = 0.0;
  for (std::size_t j = 0; j < spec.dim; ++j) {
    const double e = st.w_hat[j] - trace.true_w[trace.size() - 1][j];
    err_acc += e * e;
  }
  const double error = std::sqrt(err_acc);

  dfop::BoundParams bp;
  bp.K = K;
  bp.x_star = x_star;
  bp.sigma_star = x_star * spec.sigma;
  bp.gamma_star = dfop::gaussian_vector_bounding_constant(spec.gamma, spec.dim);
  bp.R0_norm = 1.0 / p0;
  bp.w_tilde0_norm = dfop::norm2(trace.w0_truth);
  bp.mu = mu;
  bp.t = static_cast<long long>(trace.size());
  bp.delta = delta;
  const dfop::BoundParts parts = dfop::theorem2_bound_parts(bp);
  const double residual = dfop::wtilde_recurrence_check(trace, mu, p0);
  const bool held = error <= parts.total();

  ojson j;
  j["error"] = error;
  j["bound"] = parts.total();
  j["held"] = held;
  j["init_decay"] = parts.init_decay;
  j["noise"] = parts.noise;
  j["drift"] = parts.drift;
  j["K"] = K;
  j["x_star"] = x_star;
  j["recurrence_residual"] = residual;
  std::cout << j.dump(2) << '\n';
  return held ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forgetting-factor recursive least squares for drifting streams"};
  app.require_subcommand(1);

  // generate
  CLI::App* c_gen = app.add_subcommand("generate", "write a synthetic stream as CSV");
  StreamOpts gen_stream;
  gen_stream.attach(c_gen);
  std::string gen_out, gen_config;
  c_gen->add_option("--out", gen_out, "output CSV path")->required();
  c_gen->add_option("--config", gen_config, "JSON config file");

  // run
  CLI::App* c_run = app.add_subcommand("run", "one-pass run with metric emission");
  StreamOpts run_stream_o;
  run_stream_o.attach(c_run);
  EstimatorOpts run_est;
  run_est.attach(c_run, true, true);
  std::string run_out, run_config, run_resume;
  std::size_t run_stop_after = 0;
  c_run->add_option("--out", run_out, "output directory")->required();
  c_run->add_option("--config", run_config, "JSON config file");
  c_run->add_option("--resume", run_resume, "continue from a model snapshot");
  c_run->add_option("--stop-after", run_stop_after,
                    "process only the first K steps of the stream (0 = all)");

  // sweep
  CLI::App* c_sweep = app.add_subcommand("sweep", "dfop mu grid x seed sweep");
  StreamOpts sweep_stream;
  sweep_stream.attach(c_sweep);
  EstimatorOpts sweep_est;
  sweep_est.attach(c_sweep, false, false);
  std::vector<double> sweep_grid;
  std::vector<std::uint64_t> sweep_seeds;
  std::string sweep_out, sweep_config;
  CLI::Option* o_grid =
      c_sweep->add_option("--mu-grid", sweep_grid, "comma-separated mu grid")
          ->delimiter(',');
  CLI::Option* o_seeds =
      c_sweep->add_option("--seeds", sweep_seeds, "comma-separated seed list")
          ->delimiter(',');
  c_sweep->add_option("--out", sweep_out, "output directory")->required();
  c_sweep->add_option("--config", sweep_config, "JSON config file");

  // verify
  CLI::App* c_verify =
      app.add_subcommand("verify", "internal consistency checks against the oracle");
  bool verify_literal = false;
  std::string verify_snapshot;
  c_verify->add_flag("--paper-literal-recursion", verify_literal,
                     "check the literal recursion instead (expected to fail)");
  c_verify->add_option("--snapshot", verify_snapshot, "also integrity-check a snapshot");

  // bound
  CLI::App* c_bound =
      app.add_subcommand("bound", "evaluate the estimate-error bound");
  bool bound_mc = false;
  std::string bound_run_dir, bound_out;
  double b_mu = 0.0, b_delta = 0.05, b_k = 1.0, b_xs = 1.0, b_ss = 0.0, b_gs = 0.0;
  double b_r0 = 1.0, b_w0 = 1.0, b_gamma = 1e-3, b_sigma = 0.1, b_p0 = 1.0;
  long long b_t = 0;
  std::size_t b_dim = 3, b_runs = 100, b_steps = 5000;
  std::uint64_t b_seed = 1;
  c_bound->add_flag("--montecarlo", bound_mc, "Monte-Carlo coverage study");
  c_bound->add_option("--run-dir", bound_run_dir, "replay a run directory");
  CLI::Option* o_bt = c_bound->add_option("--t", b_t, "step count (direct mode)");
  CLI::Option* o_bmu = c_bound->add_option("--mu", b_mu, "forgetting factor in (0,1)");
  c_bound->add_option("--delta", b_delta, "failure probability");
  c_bound->add_option("--k", b_k, "worst-case ||P(k)|| constant (direct mode)");
  c_bound->add_option("--x-star", b_xs, "feature norm bound (direct mode)");
  c_bound->add_option("--sigma-star", b_ss, "noise sub-Gaussian scale (direct mode)");
  c_bound->add_option("--gamma-star", b_gs, "drift bounding constant (direct mode)");
  c_bound->add_option("--r0-norm", b_r0, "||R(0)|| (direct mode)");
  c_bound->add_option("--w0-norm", b_w0, "||w_tilde(0)|| (direct mode)");
  c_bound->add_option("--dim", b_dim, "dimension (montecarlo)");
  c_bound->add_option("--runs", b_runs, "number of runs (montecarlo, >= 50)");
  c_bound->add_option("--gamma", b_gamma, "drift stddev (montecarlo)");
  c_bound->add_option("--sigma", b_sigma, "noise stddev (montecarlo)");
  c_bound->add_option("--n", b_steps, "steps per run (montecarlo)");
  c_bound->add_option("--seed", b_seed, "root seed (montecarlo)");
  c_bound->add_option("--p0-scale", b_p0, "initial P scale (montecarlo)");
  c_bound->add_option("--out", bound_out, "also write the report JSON here");

  try {
    app.parse(argc, argv);

    if (c_gen->parsed()) {
      nlohmann::json cfg;
      Pick pick;
      if (!gen_config.empty()) {
        cfg = load_config(gen_config, {"stream", "n", "seed", "noise_rate", "dim",
                                       "gamma", "sigma", "input", "w0"});
        pick.cfg = &cfg;
      }
      return cmd_generate(gen_stream.resolve(pick), gen_out);
    }

    if (c_run->parsed()) {
      nlohmann::json cfg;
      Pick pick;
      if (!run_config.empty()) {
        cfg = load_config(
            run_config,
            {"stream", "n", "seed", "noise_rate", "dim", "gamma", "sigma", "input",
             "w0", "algo", "task", "mu", "lambda", "window", "p0_scale",
             "paper_literal_recursion", "add_bias", "holdout_every", "holdout_size"});
        pick.cfg = &cfg;
      }
      const dfop::StreamSpec spec = run_stream_o.resolve(pick);
      const dfop::RunSettings rs = run_est.resolve(pick, spec, true);
      return cmd_run(spec, rs, run_out, run_resume, run_stop_after);
    }

    if (c_sweep->parsed()) {
      nlohmann::json cfg;
      Pick pick;
      if (!sweep_config.empty()) {
        cfg = load_config(sweep_config,
                          {"stream", "n", "seed", "noise_rate", "dim", "gamma", "sigma",
                           "input", "w0", "task", "p0_scale", "paper_literal_recursion",
                           "add_bias", "mu_grid", "seeds"});
        pick.cfg = &cfg;
      }
      const dfop::StreamSpec spec = sweep_stream.resolve(pick);
      const dfop::RunSettings base = sweep_est.resolve(pick, spec, false);
      const std::vector<double> grid =
          pick(o_grid, sweep_grid, "mu_grid",
               std::vector<double>{1e-4, 1e-3, 1e-2, 0.1, 0.5});
      const std::vector<std::uint64_t> seeds =
          pick(o_seeds, sweep_seeds, "seeds",
               std::vector<std::uint64_t>{1, 2, 3, 4, 5});
      return cmd_sweep(spec, base, grid, seeds, sweep_out);
    }

    if (c_verify->parsed()) return cmd_verify(verify_literal, verify_snapshot);

    if (c_bound->parsed()) {
      if (bound_mc && !bound_run_dir.empty()) {
        throw dfop::ParameterError("--montecarlo and --run-dir are mutually exclusive");
      }
      if (bound_mc) {
        const dfop::MonteCarloReport rep = dfop::bound_montecarlo(
            b_dim, b_runs, b_gamma, b_sigma, o_bmu->count() > 0 ? b_mu : 0.01, b_delta,
            b_seed, b_steps, b_p0);
        const std::string js = dfop::montecarlo_json(rep);
        std::cout << js;
        if (!bound_out.empty()) write_file(bound_out, js);
        return rep.coverage >= 1.0 - b_delta ? 0 : 4;
      }
      if (!bound_run_dir.empty()) return bound_replay(bound_run_dir, b_delta);
      if (o_bt->count() == 0 || o_bmu->count() == 0) {
        throw dfop::ParameterError(
            "direct bound evaluation needs --t and --mu (or use --montecarlo)");
      }
      dfop::BoundParams bp;
      bp.K = b_k;
      bp.x_star = b_xs;
      bp.sigma_star = b_ss;
      bp.gamma_star = b_gs;
      bp.R0_norm = b_r0;
      bp.w_tilde0_norm = b_w0;
      bp.mu = b_mu;
      bp.t = b_t;
      bp.delta = b_delta;
      const dfop::BoundParts parts = dfop::theorem2_bound_parts(bp);
      ojson j;
      j["init_decay"] = parts.init_decay;
      j["noise"] = parts.noise;
      j["drift"] = parts.drift;
      j["total"] = parts.total();
      const std::string js = j.dump(2) + "\n";
      std::cout << js;
      if (!bound_out.empty()) write_file(bound_out, js);
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[usage]: " << e.what() << '\n';
    return 1;
  } catch (const dfop::ParameterError& e) {
    std::cerr << "error[usage]: " << e.what() << '\n';
    return 1;
  } catch (const dfop::NumericError& e) {
    std::cerr << "error[numeric]: " << e.what() << '\n';
    return 3;
  } catch (const dfop::SingularMatrixError& e) {
    std::cerr << "error[numeric]: " << e.what() << '\n';
    return 3;
  } catch (const dfop::Error& e) {
    std::cerr << "error[data]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
