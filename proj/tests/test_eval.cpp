#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "dfop/eval.hpp"
#include "oracles.hpp"

using dfop::Algo;
using dfop::LabeledTrace;
using dfop::Rng;
using dfop::RunResult;
using dfop::RunSettings;
using dfop::StreamKind;
using dfop::StreamSpec;
using dfop::Task;
using dfop::Vec;

namespace {

StreamSpec sea_spec(std::size_t n, double noise, std::uint64_t seed) {
  StreamSpec s;
  s.kind = StreamKind::sea;
  s.n = n;
  s.noise_rate = noise;
  s.seed = seed;
  return s;
}

StreamSpec drift_spec(std::size_t d, std::size_t n, double gamma, double sigma,
                      std::uint64_t seed) {
  StreamSpec s;
  s.kind = StreamKind::drifting_linear;
  s.dim = d;
  s.n = n;
  s.gamma = gamma;
  s.sigma = sigma;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("accumulated accuracy on simple patterns") {
  const std::vector<double> ones(6, 1.0);
  CHECK(dfop::accumulated_accuracy(ones, ones) == std::vector<double>(6, 1.0));

  const std::vector<double> alternating{1.0, -1.0, 1.0, -1.0};
  const std::vector<double> always{1.0, 1.0, 1.0, 1.0};
  const std::vector<double> aa = dfop::accumulated_accuracy(alternating, always);
  CHECK(aa == std::vector<double>{1.0, 0.5, 2.0 / 3.0, 0.5});

  CHECK_THROWS_AS(dfop::accumulated_accuracy(ones, alternating), dfop::ParameterError);
}

TEST_CASE("accumulated accuracy equals an independent prefix count") {
  Rng rng(404);
  std::vector<double> pred(500), label(500);
  for (std::size_t i = 0; i < 500; ++i) {
    pred[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
    label[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
  }
  const std::vector<double> aa = dfop::accumulated_accuracy(pred, label);
  long long hits = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    if (pred[i] == label[i]) ++hits;
    REQUIRE(aa[i] == static_cast<double>(hits) / static_cast<double>(i + 1));
  }
}

TEST_CASE("mse basics and reference recomputation") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  CHECK(dfop::mse(a, a) == 0.0);
  const std::vector<double> shifted{1.5, 2.5, 3.5};
  CHECK_THAT(dfop::mse(a, shifted), Catch::Matchers::WithinAbs(0.25, 1e-15));

  Rng rng(8);
  std::vector<double> p(1000), t(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    p[i] = rng.normal();
    t[i] = rng.normal();
  }
  long double acc = 0.0L;  // reversed order, wider accumulator
  for (std::size_t i = 1000; i-- > 0;) {
    const long double e = static_cast<long double>(p[i]) - t[i];
    acc += e * e;
  }
  CHECK_THAT(dfop::mse(p, t),
             Catch::Matchers::WithinRel(static_cast<double>(acc / 1000.0L), 1e-12));

  CHECK_THROWS_AS(dfop::mse({}, {}), dfop::ParameterError);
  CHECK_THROWS_AS(dfop::mse(a, {1.0}), dfop::ParameterError);
}

TEST_CASE("estimate error series against hand values") {
  const LabeledTrace tr = dfop::gen_drifting_linear(2, 5, 0.0, 0.0, 3, Vec{1.0, 2.0});
  std::vector<Vec> exact(5, Vec{1.0, 2.0});
  const std::vector<double> zero = dfop::estimate_error_series(tr, exact);
  CHECK(zero == std::vector<double>(5, 0.0));

  std::vector<Vec> off(5, Vec{4.0, 6.0});  // offset (3, 4): norm 5
  const std::vector<double> fives = dfop::estimate_error_series(tr, off);
  for (double v : fives) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(5.0, 1e-14));

  const LabeledTrace sea = dfop::gen_sea(5, 0.0, 1);
  CHECK_THROWS_AS(dfop::estimate_error_series(sea, exact), dfop::MissingTruthError);
  CHECK_THROWS_AS(dfop::estimate_error_series(tr, std::vector<Vec>(3)),
                  dfop::ParameterError);
}

TEST_CASE("robustness scores") {
  CHECK(dfop::robustness({{0.5}, {1.0}}) == std::vector<double>{1.0, 2.0});

  // All algorithms equal: every dataset contributes exactly 1.
  const std::vector<std::vector<double>> equal(3, std::vector<double>{0.7, 0.9});
  CHECK(dfop::robustness(equal) == std::vector<double>{2.0, 2.0, 2.0});

  const std::vector<std::vector<double>> table{{0.8, 0.6}, {0.4, 0.9}};
  const std::vector<double> r = dfop::robustness(table);
  CHECK_THAT(r[0], Catch::Matchers::WithinAbs(0.8 / 0.4 + 1.0, 1e-14));
  CHECK_THAT(r[1], Catch::Matchers::WithinAbs(1.0 + 0.9 / 0.6, 1e-14));

  CHECK_THROWS_AS(dfop::robustness({}), dfop::ParameterError);
  CHECK_THROWS_AS(dfop::robustness({{0.5, 0.0}, {0.1, 0.2}}), dfop::ParameterError);
  CHECK_THROWS_AS(dfop::robustness({{0.5, 0.5}, {0.1}}), dfop::ParameterError);
}

TEST_CASE("recommend_mu inverts the drift period and prints like the tables") {
  CHECK(dfop::recommend_mu(1e4) == 1e-4);
  CHECK(dfop::format_mu_2e(dfop::recommend_mu(400)) == "2.50E-03");
  CHECK(dfop::format_mu_2e(dfop::recommend_mu(600)) == "1.67E-03");
  CHECK(dfop::format_mu_2e(dfop::recommend_mu(9000)) == "1.11E-04");
  CHECK(dfop::format_mu_2e(dfop::recommend_mu(1000)) == "1.00E-03");
  CHECK(dfop::format_mu_2e(dfop::recommend_mu(2000)) == "5.00E-04");
  CHECK(dfop::format_mu_2e(dfop::recommend_mu(10000)) == "1.00E-04");
  CHECK_THROWS_AS(dfop::recommend_mu(0.5), dfop::ParameterError);
  CHECK_THROWS_AS(dfop::recommend_mu(0.0), dfop::ParameterError);
}

TEST_CASE("recommended mu forgets a full period at a fixed rate") {
  // (1 - mu)^ceil(1/mu) < 1/e across the practical range.
  for (const double mu : {1e-4, 1e-3, 1e-2, 0.1, 0.25, 0.5}) {
    const double decay = std::pow(1.0 - mu, std::ceil(1.0 / mu));
    REQUIRE(decay < std::exp(-1.0));
  }
}

TEST_CASE("holdout accuracy of a perfect and of a constant model") {
  StreamSpec spec = sea_spec(100, 0.0, 5);
  const dfop::StageConcept c = dfop::stage_concept(spec, 0);

  // The concept itself, embedded in the bias-augmented space.
  dfop::ModelState perfect = dfop::dfop_init(4, 0.1);
  perfect.w_hat = {c.w[0], c.w[1], c.w[2], c.offset};
  CHECK(dfop::holdout_accuracy(perfect, c, 4000, 99, true) == 1.0);

  // w = 0 predicts +1 everywhere; its accuracy is the class prior, which
  // for stage 0 (x0 + x1 <= 7 on [0,10]^2) is exactly 24.5%.
  dfop::ModelState constant = dfop::dfop_init(4, 0.1);
  const double acc = dfop::holdout_accuracy(constant, c, 4000, 99, true);
  CHECK_THAT(acc, Catch::Matchers::WithinAbs(0.245, 3.0 / std::sqrt(4000.0)));

  // The draw is a pure function of the seed.
  CHECK(dfop::holdout_accuracy(constant, c, 4000, 99, true) == acc);

  // Holdout samples come from the noisy training distribution: the perfect
  // model scores about 1 - noise_rate.
  spec.noise_rate = 0.1;
  const dfop::StageConcept noisy = dfop::stage_concept(spec, 0);
  const double noisy_acc = dfop::holdout_accuracy(perfect, noisy, 4000, 7, true);
  CHECK_THAT(noisy_acc, Catch::Matchers::WithinAbs(0.9, 3.0 / std::sqrt(4000.0)));

  CHECK_THROWS_AS(dfop::holdout_accuracy(perfect, c, 0, 1, true), dfop::ParameterError);
  CHECK_THROWS_AS(dfop::holdout_accuracy(perfect, c, 10, 1, false),
                  dfop::ParameterError);  // 4 weights vs 3 features
}

TEST_CASE("run_stream on sea: shapes, accounting and holdout") {
  const StreamSpec spec = sea_spec(1000, 0.0, 42);
  RunSettings rs;
  rs.algo = Algo::dfop;
  rs.task = Task::classification;
  rs.mu = 1e-2;
  rs.holdout_every = 250;
  rs.holdout_size = 500;
  rs.seed = 42;
  const RunResult res = dfop::run_stream(spec, rs);

  REQUIRE(res.steps.size() == 1000);
  CHECK(res.has_model_state);
  CHECK(res.final_state.dim() == 4);  // bias appended by default
  CHECK(res.final_state.t == 1000);
  REQUIRE(res.holdout.size() == 4);
  CHECK(res.holdout[0].t == 250);
  CHECK(res.holdout[3].t == 1000);

  double hsum = 0.0;
  for (const auto& h : res.holdout) hsum += h.accuracy;
  CHECK_THAT(res.mean_holdout_acc, Catch::Matchers::WithinAbs(hsum / 4.0, 1e-15));

  CHECK(res.steps.back().aa_pre == res.mean_acc_pre);
  CHECK(res.steps.back().aa_post == res.mean_acc_post);
  CHECK(std::isnan(res.mse_pre));
  CHECK_FALSE(res.est_err_available);

  // Identical configuration reruns identically.
  const RunResult again = dfop::run_stream(spec, rs);
  REQUIRE(again.steps.size() == res.steps.size());
  for (std::size_t i = 0; i < res.steps.size(); ++i) {
    REQUIRE(again.steps[i].pred_pre == res.steps[i].pred_pre);
    REQUIRE(again.steps[i].aa_post == res.steps[i].aa_post);
  }
  for (std::size_t i = 0; i < res.holdout.size(); ++i) {
    REQUIRE(again.holdout[i].accuracy == res.holdout[i].accuracy);
  }
}

TEST_CASE("post-update accuracy is optimistic; prequential is honest") {
  // An aggressive forgetting factor nearly interpolates each sample right
  // after consuming it, so scoring post-update is close to perfect while
  // the prequential score stays much lower.
  const StreamSpec spec = sea_spec(5000, 0.0, 7);
  RunSettings rs;
  rs.mu = 0.5;
  const RunResult res = dfop::run_stream(spec, rs);
  CHECK(res.mean_acc_post > 0.99);
  CHECK(res.mean_acc_pre < 0.9);
}

TEST_CASE("mu = 0 freezes the model at the all-positive predictor") {
  const StreamSpec spec = sea_spec(2000, 0.1, 9);
  RunSettings rs;
  rs.mu = 0.0;
  const RunResult res = dfop::run_stream(spec, rs);

  const LabeledTrace tr = dfop::generate(spec);
  long long pos = 0;
  for (const auto& s : tr.samples) {
    if (s.y == 1.0) ++pos;
  }
  CHECK(res.mean_acc_pre == static_cast<double>(pos) / 2000.0);
  CHECK(res.mean_acc_post == res.mean_acc_pre);
}

TEST_CASE("run_stream on a drifting regression stream tracks the truth") {
  const StreamSpec spec = drift_spec(3, 3000, 0.0, 0.0, 15);
  RunSettings rs;
  rs.task = Task::regression;
  rs.mu = 0.01;
  const RunResult res = dfop::run_stream(spec, rs);

  CHECK(res.final_state.dim() == 3);  // regression default: no bias column
  REQUIRE(res.est_err_available);
  CHECK(res.final_est_err < 0.05);  // static noise-free model is learned
  CHECK(res.final_quarter_est_err < 0.05);
  CHECK(res.mse_pre > 0.0);         // early prequential misses are counted
  CHECK(res.mse_post < res.mse_pre);
  CHECK(std::isnan(res.mean_acc_pre));
  CHECK(res.steps.back().est_err == res.final_est_err);
}

TEST_CASE("every algorithm runs and the window baseline reports no state") {
  const StreamSpec spec = sea_spec(500, 0.0, 77);
  for (const Algo algo : {Algo::dfop, Algo::gdfop, Algo::rls, Algo::window}) {
    RunSettings rs;
    rs.algo = algo;
    rs.mu = 1e-2;
    rs.lambda = 0.995;
    rs.window = 60;
    const RunResult res = dfop::run_stream(spec, rs);
    REQUIRE(res.steps.size() == 500);
    CHECK(res.mean_acc_pre > 0.5);
    CHECK(res.has_model_state == (algo != Algo::window));
  }
}

TEST_CASE("run_stream honest errors") {
  RunSettings rs;
  rs.holdout_every = 100;

  // A trace without stage truth cannot be holdout-scored.
  const LabeledTrace plain = dfop::gen_drifting_linear(2, 300, 0.0, 0.1, 3);
  StreamSpec spec = drift_spec(2, 300, 0.0, 0.1, 3);
  rs.task = Task::regression;
  CHECK_THROWS_AS(dfop::run_stream(spec, plain, rs), dfop::MissingTruthError);

  rs.holdout_every = 0;
  CHECK_NOTHROW(dfop::run_stream(spec, plain, rs));

  RunSettings bad;
  bad.mu = 1.0;
  CHECK_THROWS_AS(dfop::run_stream(spec, plain, bad), dfop::ParameterError);
  bad = RunSettings{};
  bad.lambda = 0.0;
  CHECK_THROWS_AS(dfop::run_stream(spec, plain, bad), dfop::ParameterError);
  bad = RunSettings{};
  bad.algo = Algo::window;
  bad.window = 0;
  CHECK_THROWS_AS(dfop::run_stream(spec, plain, bad), dfop::ParameterError);

  CHECK_THROWS_AS(dfop::run_stream(spec, LabeledTrace{}, RunSettings{}),
                  dfop::ParameterError);
}

TEST_CASE("paper_literal recursion is selectable and changes the run") {
  // Kept inside the literal variant's narrow stability region: unit-scale
  // features, P(0) = I and a small mu.
  const StreamSpec spec = drift_spec(3, 200, 0.0, 0.1, 50);
  RunSettings rs;
  rs.task = Task::regression;
  rs.mu = 1e-3;
  rs.p0_scale = 1.0;
  const RunResult lemma = dfop::run_stream(spec, rs);
  rs.recursion = dfop::DfopRecursion::paper_literal;
  const RunResult literal = dfop::run_stream(spec, rs);
  REQUIRE(lemma.final_state.dim() == literal.final_state.dim());
  double dev = 0.0;
  for (std::size_t j = 0; j < lemma.final_state.dim(); ++j) {
    dev = std::max(dev,
                   std::abs(lemma.final_state.w_hat[j] - literal.final_state.w_hat[j]));
  }
  CHECK(dev > 1e-9);
}

// --- sweeps -------------------------------------------------------------------

TEST_CASE("mu sweep separates adapted from maladapted forgetting on sea") {
  const StreamSpec spec = sea_spec(20000, 0.0, 1);
  RunSettings base;
  base.task = Task::classification;
  const dfop::SweepResult sweep =
      dfop::mu_sweep(spec, {1e-3, 0.5}, {1, 2}, base);
  REQUIRE(sweep.cells.size() == 2);
  CHECK(sweep.cells[0].n_seeds == 2);
  CHECK(sweep.cells[0].failures == 0);
  CHECK(sweep.cells[0].acc_mean - sweep.cells[1].acc_mean > 0.05);
}

TEST_CASE("mu sweep cells are independent of grid order") {
  const StreamSpec spec = sea_spec(4000, 0.1, 11);
  RunSettings base;
  const std::vector<std::uint64_t> seeds{3, 4, 5};
  const dfop::SweepResult fwd = dfop::mu_sweep(spec, {1e-3, 1e-2, 0.2}, seeds, base);
  const dfop::SweepResult rev = dfop::mu_sweep(spec, {0.2, 1e-2, 1e-3}, seeds, base);
  REQUIRE(fwd.cells.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const dfop::SweepCell& a = fwd.cells[i];
    const dfop::SweepCell& b = rev.cells[2 - i];
    REQUIRE(a.mu == b.mu);
    REQUIRE(a.acc_mean == b.acc_mean);
    REQUIRE(a.acc_std == b.acc_std);
  }
}

TEST_CASE("mu sweep on the drifting stream shows the interior optimum") {
  const StreamSpec spec = drift_spec(3, 8000, 1e-3, 0.1, 2);
  RunSettings base;
  base.task = Task::regression;
  const dfop::SweepResult sweep =
      dfop::mu_sweep(spec, {1e-4, 1e-2, 0.5}, {2, 3}, base);
  REQUIRE(sweep.cells.size() == 3);
  CHECK(sweep.cells[1].est_err_mean < sweep.cells[0].est_err_mean);
  CHECK(sweep.cells[1].est_err_mean < sweep.cells[2].est_err_mean);
}

TEST_CASE("a numerically failing cell is recorded without aborting the sweep") {
  // The divergent paper_literal recursion at mu = 0.3 overflows; mu = 0 is
  // inert under either recursion and must still be aggregated.
  const StreamSpec spec = drift_spec(3, 5000, 0.0, 0.1, 6);
  RunSettings base;
  base.task = Task::regression;
  base.p0_scale = 1.0;
  base.recursion = dfop::DfopRecursion::paper_literal;
  const dfop::SweepResult sweep = dfop::mu_sweep(spec, {0.0, 0.3}, {1, 2}, base);
  REQUIRE(sweep.cells.size() == 2);
  CHECK(sweep.cells[0].n_seeds == 2);
  CHECK(sweep.cells[0].failures == 0);
  CHECK(sweep.cells[1].failures == 2);
  CHECK(sweep.cells[1].n_seeds == 0);
  CHECK(std::isnan(sweep.cells[1].mse_mean));
  CHECK_FALSE(sweep.cells[1].first_error.empty());
}

TEST_CASE("mu sweep input validation") {
  const StreamSpec spec = sea_spec(100, 0.0, 1);
  RunSettings base;
  CHECK_THROWS_AS(dfop::mu_sweep(spec, {}, {1}, base), dfop::ParameterError);
  CHECK_THROWS_AS(dfop::mu_sweep(spec, {0.1}, {}, base), dfop::ParameterError);
  CHECK_THROWS_AS(dfop::mu_sweep(spec, {1.0}, {1}, base), dfop::ParameterError);
}

// --- bound Monte-Carlo ----------------------------------------------------------

TEST_CASE("bound holds on every run of a noiseless driftless model") {
  const dfop::MonteCarloReport rep =
      dfop::bound_montecarlo(2, 50, 0.0, 0.0, 0.05, 0.05, 123, 200);
  CHECK(rep.completed == 50);
  CHECK(rep.numeric_failures == 0);
  CHECK(rep.coverage == 1.0);
  CHECK(rep.max_recurrence_residual <= 1e-10);
  CHECK(rep.errors.size() == 50);
  CHECK(rep.max_err_over_bound < 1.0);
}

TEST_CASE("bound holds with drift and noise at the documented defaults") {
  const dfop::MonteCarloReport rep =
      dfop::bound_montecarlo(3, 60, 1e-3, 0.1, 0.01, 0.05, 2024, 400, 1.0);
  CHECK(rep.completed == 60);
  CHECK(rep.coverage >= 0.95);
  CHECK(rep.max_recurrence_residual <= 1e-8);
  CHECK(rep.mean_error < rep.mean_bound);
}

TEST_CASE("bound Monte-Carlo rejects undersized and malformed studies") {
  CHECK_THROWS_AS(dfop::bound_montecarlo(3, 49, 0.0, 0.1, 0.01, 0.05, 1, 100),
                  dfop::ParameterError);
  CHECK_THROWS_AS(dfop::bound_montecarlo(3, 50, 0.0, 0.1, 0.0, 0.05, 1, 100),
                  dfop::ParameterError);
  CHECK_THROWS_AS(dfop::bound_montecarlo(3, 50, 0.0, 0.1, 0.01, 1.0, 1, 100),
                  dfop::ParameterError);
  CHECK_THROWS_AS(dfop::bound_montecarlo(0, 50, 0.0, 0.1, 0.01, 0.05, 1, 100),
                  dfop::ParameterError);
}

// --- emission -------------------------------------------------------------------

TEST_CASE("metrics and holdout CSV schemas are stable") {
  const StreamSpec spec = sea_spec(300, 0.0, 33);
  RunSettings rs;
  rs.holdout_every = 100;
  const RunResult res = dfop::run_stream(spec, rs);

  std::stringstream m;
  dfop::write_metrics_csv(res, m);
  std::string header;
  std::getline(m, header);
  CHECK(header == "t,y,pred_pre,pred_post,aa_pre,aa_post");
  std::size_t rows = 0;
  for (std::string line; std::getline(m, line);) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 300);

  std::stringstream h;
  dfop::write_holdout_csv(res, h);
  std::getline(h, header);
  CHECK(header == "t,accuracy");

  // est_err column appears exactly when the run can compute it.
  const StreamSpec dspec = drift_spec(2, 50, 0.0, 0.1, 3);
  RunSettings dr;
  dr.task = Task::regression;
  const RunResult dres = dfop::run_stream(dspec, dr);
  std::stringstream dm;
  dfop::write_metrics_csv(dres, dm);
  std::getline(dm, header);
  CHECK(header == "t,y,pred_pre,pred_post,aa_pre,aa_post,est_err");
}

TEST_CASE("summary and report JSON are well formed") {
  const StreamSpec spec = sea_spec(200, 0.0, 3);
  RunSettings rs;
  rs.holdout_every = 100;
  const RunResult res = dfop::run_stream(spec, rs);
  const nlohmann::json j = nlohmann::json::parse(dfop::summary_json(res));
  CHECK(j.at("task") == "classification");
  CHECK(j.at("algo") == "dfop");
  CHECK(j.at("n") == 200);
  CHECK(j.at("mean_acc_pre").is_number());
  CHECK(j.at("mse_pre").is_null());  // regression summary absent here
  CHECK_THAT(j.at("mean_acc_pre").get<double>(),
             Catch::Matchers::WithinAbs(res.mean_acc_pre, 1e-15));

  const dfop::MonteCarloReport rep =
      dfop::bound_montecarlo(2, 50, 0.0, 0.0, 0.05, 0.05, 5, 50);
  const nlohmann::json mj = nlohmann::json::parse(dfop::montecarlo_json(rep));
  CHECK(mj.at("coverage") == 1.0);
  CHECK(mj.at("completed") == 50);

  std::stringstream sw;
  dfop::write_sweep_csv(dfop::mu_sweep(spec, {1e-3}, {1}, RunSettings{}), sw);
  std::string header;
  std::getline(sw, header);
  CHECK(header ==
        "mu,n_seeds,failures,acc_mean,acc_std,mse_mean,mse_std,est_err_mean,est_err_std");
}

TEST_CASE("name round-trips for algo and task") {
  for (const Algo a : {Algo::dfop, Algo::gdfop, Algo::rls, Algo::window}) {
    CHECK(dfop::algo_from_string(dfop::to_string(a)) == a);
  }
  CHECK_THROWS_AS(dfop::algo_from_string("sgd"), dfop::ParameterError);
  CHECK(dfop::task_from_string("regression") == Task::regression);
  CHECK(dfop::task_from_string("classification") == Task::classification);
  CHECK_THROWS_AS(dfop::task_from_string("ranking"), dfop::ParameterError);
  CHECK(dfop::default_task(StreamKind::sea) == Task::classification);
  CHECK(dfop::default_task(StreamKind::drifting_linear) == Task::regression);
}
