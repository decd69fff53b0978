#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dfop/errors.hpp"
#include "dfop/estimators.hpp"
#include "dfop/rng.hpp"

namespace dfop {

enum class StreamKind { sea, hyperplane_cls, hyperplane_reg, drifting_linear, csv };

inline const char* to_string(StreamKind k) {
  switch (k) {
    case StreamKind::sea: return "sea";
    case StreamKind::hyperplane_cls: return "hyperplane_cls";
    case StreamKind::hyperplane_reg: return "hyperplane_reg";
    case StreamKind::drifting_linear: return "drifting_linear";
    case StreamKind::csv: return "csv";
  }
  return "?";
}

inline StreamKind stream_kind_from_string(const std::string& s) {
  if (s == "sea") return StreamKind::sea;
  if (s == "hyperplane_cls") return StreamKind::hyperplane_cls;
  if (s == "hyperplane_reg") return StreamKind::hyperplane_reg;
  if (s == "drifting_linear") return StreamKind::drifting_linear;
  if (s == "csv") return StreamKind::csv;
  throw ParameterError("unknown stream kind '" + s + "'");
}

/// Declarative description of a data stream. Together with the seed this
/// determines the generated trace completely.
struct StreamSpec {
  StreamKind kind = StreamKind::sea;
  std::size_t n = 50000;
  std::uint64_t seed = 1;

  double noise_rate = 0.0;  // sea: label flip probability, in [0, 0.5)

  std::size_t dim = 3;      // drifting_linear feature dimension
  double gamma = 0.0;       // drifting_linear: per-coordinate drift stddev
  double sigma = 0.0;       // drifting_linear: observation noise stddev
  Vec w0;                   // drifting_linear: initial weights (empty = drawn)

  std::string path;         // csv: input file
};

/// Generated stream plus whatever ground truth its generator knows. Truth
/// vectors are either empty or exactly samples.size() long. true_w[i] is the
/// weight vector w(t) for step t = i+1, i.e. the concept that generates the
/// NEXT observation; w0_truth is w(0), the concept behind the first one.
struct LabeledTrace {
  std::size_t dim = 0;
  std::vector<Sample> samples;
  std::vector<int> stage;
  std::vector<Vec> true_w;
  std::vector<Vec> drift_s;
  std::vector<double> noise_eps;
  std::vector<double> label;  // auxiliary +/-1 target of regression streams
  Vec w0_truth;

  std::size_t size() const noexcept { return samples.size(); }
  bool has_stage() const noexcept { return !stage.empty(); }
  bool has_weight_truth() const noexcept {
    return !true_w.empty() && !drift_s.empty() && !w0_truth.empty();
  }
  bool has_noise_truth() const noexcept { return !noise_eps.empty(); }
  bool has_aux_label() const noexcept { return !label.empty(); }
};

/// A stage's generating concept plus its feature distribution: enough to
/// draw fresh same-distribution samples for holdout scoring. The label of a
/// point x is sign(w . x + offset), ties to +1, flipped w.p. noise_rate.
struct StageConcept {
  Vec w;
  double offset = 0.0;
  double feat_lo = 0.0;
  double feat_hi = 1.0;
  double noise_rate = 0.0;
  std::size_t dim = 0;

  double value(const Vec& x) const { return dot(w, x) + offset; }

  Sample sample(Rng& rng) const {
    Sample s;
    s.x.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) s.x[i] = rng.uniform(feat_lo, feat_hi);
    s.y = sign_label(value(s.x));
    const double u = rng.uniform();
    if (u < noise_rate) s.y = -s.y;
    return s;
  }
};

namespace detail {

inline void check_stream_spec(const StreamSpec& spec) {
  if (spec.kind != StreamKind::csv && spec.n == 0) {
    throw ParameterError("stream length must be >= 1");
  }
  if (!(spec.noise_rate >= 0.0) || !(spec.noise_rate < 0.5)) {
    throw ParameterError("noise_rate must lie in [0, 0.5)");
  }
  if (spec.kind == StreamKind::drifting_linear) {
    if (spec.dim == 0) throw ParameterError("dim must be >= 1");
    if (!(spec.gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
    if (!(spec.sigma >= 0.0)) throw ParameterError("sigma must be >= 0");
    if (!spec.w0.empty() && spec.w0.size() != spec.dim) {
      throw ParameterError("w0 dimension does not match dim");
    }
  }
}

/// Evenly partitioned stage id: floor(stages * i / n) for i in [0, n).
inline int stage_of(std::size_t i, std::size_t n, std::size_t stages) {
  return static_cast<int>((stages * i) / n);
}

inline double sea_threshold(int stage) {
  static constexpr double kB[4] = {7.0, 8.0, 9.0, 9.5};
  if (stage < 0 || stage > 3) throw ParameterError("sea: stage must lie in [0, 3]");
  return kB[stage];
}

/// The nine unit-norm concept directions of the rotating-hyperplane stream.
/// w_0 is the diagonal; each successive stage rotates by a fixed angle
/// toward a seeded random orthogonal direction, so consecutive concepts
/// overlap strongly while first and last differ a lot.
inline std::vector<Vec> hyperplane_cls_weights(std::uint64_t seed) {
  constexpr std::size_t d = 10;
  constexpr double theta = 0.4;
  Rng rng(derive_seed(seed, "hyperplane-cls-concepts"));
  std::vector<Vec> ws;
  ws.reserve(9);
  Vec w(d, 1.0 / std::sqrt(10.0));
  ws.push_back(w);
  for (int k = 1; k < 9; ++k) {
    Vec v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = rng.normal();
    const double proj = dot(v, w);
    for (std::size_t i = 0; i < d; ++i) v[i] -= proj * w[i];
    const double nv = norm2(v);
    for (std::size_t i = 0; i < d; ++i) v[i] /= nv;
    Vec next(d);
    for (std::size_t i = 0; i < d; ++i) {
      next[i] = std::cos(theta) * w[i] + std::sin(theta) * v[i];
    }
    w = next;
    ws.push_back(w);
  }
  return ws;
}

/// Stage concepts of the piecewise regression stream: w has 1/3 on three
/// consecutive coordinates; the active block moves at each stage boundary.
inline Vec hyperplane_reg_weights(int stage) {
  static constexpr std::size_t kStart[4] = {0, 1, 3, 6};
  if (stage < 0 || stage > 3) throw ParameterError("hyperplane_reg: stage must lie in [0, 3]");
  Vec w(10, 0.0);
  for (std::size_t j = 0; j < 3; ++j) w[kStart[stage] + j] = 1.0 / 3.0;
  return w;
}

}  // namespace detail

/// Number of concept stages of a synthetic stream; 0 when the kind has no
/// stage structure.
inline int num_stages(StreamKind kind) {
  switch (kind) {
    case StreamKind::sea: return 4;
    case StreamKind::hyperplane_cls: return 9;
    case StreamKind::hyperplane_reg: return 4;
    default: return 0;
  }
}

/// sea: three attributes uniform on [0, 10], label +1 iff x0 + x1 <= b with
/// b stepping through 7, 8, 9, 9.5 across four equal blocks; the third
/// attribute is irrelevant. Labels flip independently w.p. noise_rate.
inline LabeledTrace gen_sea(std::size_t n, double noise_rate, std::uint64_t seed) {
  StreamSpec spec;
  spec.kind = StreamKind::sea;
  spec.n = n;
  spec.noise_rate = noise_rate;
  detail::check_stream_spec(spec);

  // Features and flips come from separate sub-streams, so changing
  // noise_rate never changes the feature sequence.
  Rng xrng(derive_seed(seed, "sea-x"));
  Rng nrng(derive_seed(seed, "sea-noise"));
  LabeledTrace tr;
  tr.dim = 3;
  tr.samples.resize(n);
  tr.stage.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int st = detail::stage_of(i, n, 4);
    const double b = detail::sea_threshold(st);
    Sample& s = tr.samples[i];
    s.x = {xrng.uniform(0.0, 10.0), xrng.uniform(0.0, 10.0), xrng.uniform(0.0, 10.0)};
    s.y = sign_label(b - s.x[0] - s.x[1]);
    const double u = nrng.uniform();
    if (u < noise_rate) s.y = -s.y;
    tr.stage[i] = st;
  }
  return tr;
}

/// hyperplane_cls: ten attributes uniform on [0, 1], nine stages; stage k
/// labels by the side of a unit-norm hyperplane through the cube center,
/// and successive hyperplanes are small seeded rotations of each other.
inline LabeledTrace gen_hyperplane_cls(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("stream length must be >= 1");
  const std::vector<Vec> ws = detail::hyperplane_cls_weights(seed);
  Rng xrng(derive_seed(seed, "hyperplane-cls-x"));
  LabeledTrace tr;
  tr.dim = 10;
  tr.samples.resize(n);
  tr.stage.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int st = detail::stage_of(i, n, 9);
    Sample& s = tr.samples[i];
    s.x.resize(10);
    double v = 0.0;
    for (std::size_t j = 0; j < 10; ++j) {
      s.x[j] = xrng.uniform();
      v += ws[st][j] * (s.x[j] - 0.5);
    }
    s.y = sign_label(v);
    tr.stage[i] = st;
  }
  return tr;
}

/// hyperplane_reg: ten attributes uniform on [0, 1], four stages; y is the
/// mean of three consecutive attributes whose block shifts at each boundary.
/// Noise-free, so y = x . w(stage) exactly. An auxiliary +/-1 label
/// (y >= 0.5, ties to +1) is recorded alongside. Weight truth follows the
/// one-step-ahead convention documented on LabeledTrace.
inline LabeledTrace gen_hyperplane_reg(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("stream length must be >= 1");
  Rng xrng(derive_seed(seed, "hyperplane-reg-x"));
  LabeledTrace tr;
  tr.dim = 10;
  tr.samples.resize(n);
  tr.stage.resize(n);
  tr.true_w.resize(n);
  tr.drift_s.resize(n);
  tr.noise_eps.assign(n, 0.0);
  tr.label.resize(n);
  tr.w0_truth = detail::hyperplane_reg_weights(0);
  for (std::size_t i = 0; i < n; ++i) {
    const int st = detail::stage_of(i, n, 4);
    const Vec w = detail::hyperplane_reg_weights(st);
    Sample& s = tr.samples[i];
    s.x.resize(10);
    for (std::size_t j = 0; j < 10; ++j) s.x[j] = xrng.uniform();
    s.y = dot(w, s.x);
    tr.label[i] = sign_label(s.y - 0.5);
    tr.stage[i] = st;
    const int next_st = (i + 1 < n) ? detail::stage_of(i + 1, n, 4) : st;
    tr.true_w[i] = detail::hyperplane_reg_weights(next_st);
    const Vec& prev = (i == 0) ? tr.w0_truth : tr.true_w[i - 1];
    tr.drift_s[i].resize(10);
    for (std::size_t j = 0; j < 10; ++j) tr.drift_s[i][j] = tr.true_w[i][j] - prev[j];
  }
  return tr;
}

/// drifting_linear: a random-walk regression stream,
///     w(t) = w(t-1) + s(t),      s(t) ~ N(0, gamma^2 I)
///     y(t) = x(t) . w(t-1) + eps(t),  eps(t) ~ N(0, sigma^2),
/// with x uniform on [-1, 1]^d. Full ground truth (w, s, eps) is recorded,
/// which makes this the stream of choice for estimate-error studies and for
/// the error-propagation identity check.
inline LabeledTrace gen_drifting_linear(std::size_t d, std::size_t n, double gamma,
                                        double sigma, std::uint64_t seed,
                                        const Vec& w0 = Vec()) {
  StreamSpec spec;
  spec.kind = StreamKind::drifting_linear;
  spec.dim = d;
  spec.n = n;
  spec.gamma = gamma;
  spec.sigma = sigma;
  spec.w0 = w0;
  detail::check_stream_spec(spec);

  Rng xrng(derive_seed(seed, "drifting-linear-x"));
  Rng srng(derive_seed(seed, "drifting-linear-s"));
  Rng erng(derive_seed(seed, "drifting-linear-eps"));
  LabeledTrace tr;
  tr.dim = d;
  tr.samples.resize(n);
  tr.true_w.resize(n);
  tr.drift_s.resize(n);
  tr.noise_eps.resize(n);
  if (w0.empty()) {
    Rng wrng(derive_seed(seed, "drifting-linear-w0"));
    tr.w0_truth.resize(d);
    for (std::size_t j = 0; j < d; ++j) tr.w0_truth[j] = wrng.normal();
  } else {
    tr.w0_truth = w0;
  }

  Vec w = tr.w0_truth;
  for (std::size_t i = 0; i < n; ++i) {
    Sample& s = tr.samples[i];
    s.x.resize(d);
    for (std::size_t j = 0; j < d; ++j) s.x[j] = xrng.uniform(-1.0, 1.0);
    const double eps = sigma * erng.normal();
    s.y = dot(s.x, w) + eps;
    tr.noise_eps[i] = eps;
    tr.drift_s[i].resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double step = gamma * srng.normal();
      tr.drift_s[i][j] = step;
      w[j] += step;
    }
    tr.true_w[i] = w;
  }
  return tr;
}

/// The generating concept of one stage of a synthetic classification (or
/// thresholded regression) stream. Streams without stage concepts - CSV
/// input and the random-walk stream - raise MissingTruthError.
inline StageConcept stage_concept(const StreamSpec& spec, int stage) {
  const int stages = num_stages(spec.kind);
  if (stages == 0) {
    throw MissingTruthError(std::string("stream kind '") + to_string(spec.kind) +
                            "' has no stage concepts");
  }
  if (stage < 0 || stage >= stages) {
    throw ParameterError("stage id out of range");
  }
  StageConcept c;
  switch (spec.kind) {
    case StreamKind::sea:
      c.w = {-1.0, -1.0, 0.0};
      c.offset = detail::sea_threshold(stage);
      c.feat_lo = 0.0;
      c.feat_hi = 10.0;
      c.noise_rate = spec.noise_rate;
      c.dim = 3;
      break;
    case StreamKind::hyperplane_cls: {
      const std::vector<Vec> ws = detail::hyperplane_cls_weights(spec.seed);
      c.w = ws[static_cast<std::size_t>(stage)];
      c.offset = -0.5 * std::accumulate(c.w.begin(), c.w.end(), 0.0);
      c.feat_lo = 0.0;
      c.feat_hi = 1.0;
      c.dim = 10;
      break;
    }
    case StreamKind::hyperplane_reg:
      c.w = detail::hyperplane_reg_weights(stage);
      c.offset = -0.5;  // label = sign(y - 1/2)
      c.feat_lo = 0.0;
      c.feat_hi = 1.0;
      c.dim = 10;
      break;
    default:
      break;
  }
  return c;
}

// --- CSV ------------------------------------------------------------------
//
// Layout: header f0..f{d-1},y plus optional blocks, in this order:
// label, w0..w{d-1}, s0..s{d-1}, eps, stage. When weight truth is present an
// initial comment line "# w0,<values>" carries w(0), which has no row of its
// own. Values are written with 17 significant digits and round-trip exactly.

namespace detail {

inline double parse_csv_double(const std::string& tok, long long line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end == tok.c_str() || *end != '\0') {
    throw ParseError("malformed numeric field '" + tok + "'", line);
  }
  return v;
}

inline long long parse_csv_int(const std::string& tok, long long line) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || end == tok.c_str() || *end != '\0') {
    throw ParseError("malformed integer field '" + tok + "'", line);
  }
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_csv(const LabeledTrace& tr, std::ostream& out) {
  const std::size_t d = tr.dim;
  if (d == 0) throw ParameterError("cannot write a trace of dimension 0");
  if (tr.has_weight_truth()) {
    out << "# w0";
    for (std::size_t j = 0; j < d; ++j) out << ',' << detail::fmt_g17(tr.w0_truth[j]);
    out << '\n';
  }
  for (std::size_t j = 0; j < d; ++j) out << 'f' << j << ',';
  out << 'y';
  if (tr.has_aux_label()) out << ",label";
  if (tr.has_weight_truth()) {
    for (std::size_t j = 0; j < d; ++j) out << ",w" << j;
    for (std::size_t j = 0; j < d; ++j) out << ",s" << j;
  }
  if (tr.has_noise_truth()) out << ",eps";
  if (tr.has_stage()) out << ",stage";
  out << '\n';

  for (std::size_t i = 0; i < tr.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) out << detail::fmt_g17(tr.samples[i].x[j]) << ',';
    out << detail::fmt_g17(tr.samples[i].y);
    if (tr.has_aux_label()) out << ',' << detail::fmt_g17(tr.label[i]);
    if (tr.has_weight_truth()) {
      for (std::size_t j = 0; j < d; ++j) out << ',' << detail::fmt_g17(tr.true_w[i][j]);
      for (std::size_t j = 0; j < d; ++j) out << ',' << detail::fmt_g17(tr.drift_s[i][j]);
    }
    if (tr.has_noise_truth()) out << ',' << detail::fmt_g17(tr.noise_eps[i]);
    if (tr.has_stage()) out << ',' << tr.stage[i];
    out << '\n';
  }
  if (!out) throw Error("csv: write failed");
}

inline void write_csv(const LabeledTrace& tr, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("csv: cannot open '" + path + "' for writing");
  write_csv(tr, f);
  f.flush();
  if (!f) throw Error("csv: write to '" + path + "' failed");
}

inline LabeledTrace read_csv_stream(std::istream& in) {
  std::string line;
  long long lineno = 0;
  Vec w0_comment;

  // Optional comment lines before the header; only "# w0,..." is meaningful.
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::vector<std::string> f = detail::split_csv_line(line);
      if (!f.empty() && (f[0] == "# w0" || f[0] == "#w0")) {
        for (std::size_t j = 1; j < f.size(); ++j) {
          w0_comment.push_back(detail::parse_csv_double(f[j], lineno));
        }
      }
      continue;
    }
    break;  // header line reached
  }
  if (line.empty() || line[0] == '#') throw SchemaError("csv: missing header row");

  const std::vector<std::string> head = detail::split_csv_line(line);
  std::size_t pos = 0;
  std::size_t d = 0;
  while (pos < head.size() && head[pos] == "f" + std::to_string(d)) {
    ++pos;
    ++d;
  }
  if (d == 0) throw SchemaError("csv: header must start with feature columns f0, f1, ...");
  if (pos >= head.size() || head[pos] != "y") {
    throw SchemaError("csv: expected column 'y' after the feature block");
  }
  ++pos;
  bool has_label = false, has_w = false, has_eps = false, has_stage = false;
  if (pos < head.size() && head[pos] == "label") {
    has_label = true;
    ++pos;
  }
  if (pos < head.size() && head[pos] == "w0") {
    for (std::size_t j = 0; j < d; ++j, ++pos) {
      if (pos >= head.size() || head[pos] != "w" + std::to_string(j)) {
        throw SchemaError("csv: incomplete weight-truth block in header");
      }
    }
    for (std::size_t j = 0; j < d; ++j, ++pos) {
      if (pos >= head.size() || head[pos] != "s" + std::to_string(j)) {
        throw SchemaError("csv: incomplete drift-truth block in header");
      }
    }
    has_w = true;
  }
  if (pos < head.size() && head[pos] == "eps") {
    has_eps = true;
    ++pos;
  }
  if (pos < head.size() && head[pos] == "stage") {
    has_stage = true;
    ++pos;
  }
  if (pos != head.size()) {
    throw SchemaError("csv: unexpected column '" + head[pos] + "'");
  }
  const std::size_t ncols = head.size();

  LabeledTrace tr;
  tr.dim = d;
  if (has_w) {
    if (!w0_comment.empty() && w0_comment.size() != d) {
      throw SchemaError("csv: w0 comment has wrong dimension");
    }
    tr.w0_truth = w0_comment;  // may still be empty; reconstructed below
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = detail::split_csv_line(line);
    if (f.size() != ncols) {
      throw ParseError("expected " + std::to_string(ncols) + " fields, found " +
                           std::to_string(f.size()),
                       lineno);
    }
    std::size_t c = 0;
    Sample s;
    s.x.resize(d);
    for (std::size_t j = 0; j < d; ++j) s.x[j] = detail::parse_csv_double(f[c++], lineno);
    s.y = detail::parse_csv_double(f[c++], lineno);
    tr.samples.push_back(std::move(s));
    if (has_label) tr.label.push_back(detail::parse_csv_double(f[c++], lineno));
    if (has_w) {
      Vec w(d), sv(d);
      for (std::size_t j = 0; j < d; ++j) w[j] = detail::parse_csv_double(f[c++], lineno);
      for (std::size_t j = 0; j < d; ++j) sv[j] = detail::parse_csv_double(f[c++], lineno);
      tr.true_w.push_back(std::move(w));
      tr.drift_s.push_back(std::move(sv));
    }
    if (has_eps) tr.noise_eps.push_back(detail::parse_csv_double(f[c++], lineno));
    if (has_stage) {
      const long long st = detail::parse_csv_int(f[c++], lineno);
      if (st < 0) throw ParseError("negative stage id", lineno);
      tr.stage.push_back(static_cast<int>(st));
    }
  }
  if (tr.samples.empty()) throw SchemaError("csv: no data rows");
  if (has_w && tr.w0_truth.empty()) {
    // No "# w0" comment: recover w(0) from w(1) - s(1).
    tr.w0_truth.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      tr.w0_truth[j] = tr.true_w[0][j] - tr.drift_s[0][j];
    }
  }
  return tr;
}

inline LabeledTrace read_csv_stream(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("csv: cannot open '" + path + "'");
  return read_csv_stream(f);
}

/// Generates (or, for the csv kind, loads) the stream a spec describes.
inline LabeledTrace generate(const StreamSpec& spec) {
  switch (spec.kind) {
    case StreamKind::sea:
      return gen_sea(spec.n, spec.noise_rate, spec.seed);
    case StreamKind::hyperplane_cls:
      return gen_hyperplane_cls(spec.n, spec.seed);
    case StreamKind::hyperplane_reg:
      return gen_hyperplane_reg(spec.n, spec.seed);
    case StreamKind::drifting_linear:
      return gen_drifting_linear(spec.dim, spec.n, spec.gamma, spec.sigma, spec.seed,
                                 spec.w0);
    case StreamKind::csv:
      return read_csv_stream(spec.path);
  }
  throw ParameterError("unknown stream kind");
}

}  // namespace dfop
