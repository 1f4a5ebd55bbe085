/*
 * Copyright 2026 The dualex Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

/**
 * @file cli.hpp
 * @brief The dualex command line: explain, compare, examples, gen-data.
 *
 * run() never calls exit(); it returns 0 on success, 1 on runtime or numeric
 * failure and 2 on usage, configuration or input errors.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dualex/blackbox.hpp"
#include "dualex/data.hpp"
#include "dualex/dual_explainer.hpp"
#include "dualex/errors.hpp"
#include "dualex/example_explainer.hpp"
#include "dualex/external.hpp"
#include "dualex/geometry.hpp"
#include "dualex/linalg.hpp"
#include "dualex/nam.hpp"
#include "dualex/report.hpp"
#include "dualex/surrogate.hpp"
#include "dualex/svg.hpp"

namespace dualex::cli {

struct Options {
  // data
  std::string synthetic;
  std::string data;
  std::string target_col;
  bool zscore = false;
  Index n = 0;
  // black box
  std::string blackbox = "knn";
  std::string fn;
  Index bb_k = 6;
  Index bb_trees = 100;
  std::string external_cmd;
  double external_timeout = 30.0;
  // dual
  Index K = 10;
  Index n_lambda = 30;
  Index points = 0;
  bool global = false;
  std::string recovery = "linear";
  // LIME
  std::string lime_cov = "0.05";
  double lime_v = 0.01;
  Index lime_n = 30;
  std::string lime_weights = "kernel";
  // example-based
  std::string id;
  std::string polytope;
  int epochs = 300;
  std::optional<double> alpha;
  Index bins = 20;
  std::string ale_probe = "standard";
  bool no_gauge = false;
  // run
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  std::string out_dir = ".";
  bool no_timestamp = false;
};

namespace detail {

inline unsigned worker_count(unsigned requested, Index tasks) {
  unsigned n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<Index>(1, std::min<Index>(n, tasks)));
}

// Runs body(i) for i in [0, n) on `jobs` threads. The exception of the lowest
// failing index is rethrown after all workers join.
inline void parallel_for(Index n, unsigned jobs, const std::function<void(Index)>& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const unsigned w = worker_count(jobs, n);
  if (w <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < w; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

inline std::string join(const Vector& v, const char* sep = ",", bool short_form = false) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) out += (i ? sep : "") + (short_form ? fmt_short(v(i)) : fmt(v(i)));
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline std::string path_in(const Options& o, const std::string& name) {
  return (std::filesystem::path(o.out_dir) / name).string();
}

inline void prepare_out_dir(const Options& o) {
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec || !std::filesystem::is_directory(o.out_dir))
    throw ConfigError("cannot create output directory '" + o.out_dir + "'");
}

inline void write_text(const std::string& path, const std::string& text) { svg::write_file(path, text); }

inline Vector parse_list(const std::string& text, Index dim, const std::string& flag) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!dualex::detail::parse_double(dualex::detail::trim(item), v))
      throw ConfigError(flag + ": '" + item + "' is not a number");
    vals.push_back(v);
  }
  if (vals.size() == 1) return Vector::Constant(dim, vals[0]);
  if (static_cast<Index>(vals.size()) != dim)
    throw ConfigError(flag + " has " + std::to_string(vals.size()) + " entries for " + std::to_string(dim) +
                      " features");
  return to_vector(vals);
}

inline RecoveryMode parse_recovery(const std::string& s) {
  if (s == "linear") return RecoveryMode::kLinear;
  if (s == "affine") return RecoveryMode::kAffine;
  throw ConfigError("--recovery must be 'linear' or 'affine', got '" + s + "'");
}

inline AnalyticFn default_fn_for(const std::string& id) {
  if (id == "feat-ex1") return AnalyticFn::kLinear7;
  if (id == "feat-ex2a" || id == "feat-ex2b") return AnalyticFn::kQuad2;
  if (id == "feat-ex3") return AnalyticFn::kRing;
  throw ConfigError("no analytic black box is associated with '" + id + "'; pass --fn");
}

struct Source {
  Dataset train;
  std::string name;
  std::optional<AnalyticFn> fn;
};

inline Source load_source(const Options& o) {
  if (!o.synthetic.empty() && !o.data.empty()) throw ConfigError("use either --synthetic or --data, not both");
  if (o.synthetic.empty() && o.data.empty()) throw ConfigError("a dataset is required: --synthetic <id> or --data <path>");
  Source s;
  if (!o.synthetic.empty()) {
    SyntheticSpec spec{o.synthetic, o.seed, o.n};
    try {
      spec.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
    if (spec.is_lambda())
      throw ConfigError("'" + o.synthetic + "' is a simplex experiment; use the examples command");
    s.train = generate(spec);
    s.name = o.synthetic;
    if (!o.fn.empty()) {
      s.fn = parse_analytic_fn(o.fn);
    } else if (o.blackbox == "analytic") {
      s.fn = default_fn_for(o.synthetic);
    }
  } else {
    if (!std::filesystem::exists(o.data)) throw IngestionError("data file '" + o.data + "' does not exist");
    s.train = load_csv(o.data, o.target_col, o.zscore);
    s.name = o.data;
    if (!o.fn.empty()) s.fn = parse_analytic_fn(o.fn);
  }
  return s;
}

inline PredictorPtr make_blackbox(const Options& o, const Source& s) {
  const Dataset& ds = s.train;
  auto need_targets = [&] {
    if (!ds.y) throw ConfigError("black box '" + o.blackbox + "' needs a target column (--target-col)");
  };
  if (o.blackbox == "knn") {
    need_targets();
    if (o.bb_k < 1 || o.bb_k > ds.rows())
      throw ConfigError("--bb-k must be in [1, " + std::to_string(ds.rows()) + "]");
    return knn_fit(ds.x, *ds.y, o.bb_k);
  }
  if (o.blackbox == "trees") {
    need_targets();
    if (o.bb_trees < 1) throw ConfigError("--bb-trees must be at least 1");
    return trees_fit(ds.x, *ds.y, o.bb_trees, o.seed);
  }
  if (o.blackbox == "analytic") {
    if (!s.fn) throw ConfigError("--blackbox analytic needs --fn with --data");
    PredictorPtr p = analytic(*s.fn);
    if (p->input_dim() != ds.cols())
      throw ConfigError("analytic function '" + std::string(to_string(*s.fn)) + "' takes " +
                        std::to_string(p->input_dim()) + " features, data has " + std::to_string(ds.cols()));
    return p;
  }
  if (o.blackbox == "external") {
    if (o.external_cmd.empty()) throw ConfigError("--blackbox external needs --external-cmd");
    return external_predictor(o.external_cmd, ds.cols(),
                              std::chrono::milliseconds(static_cast<long>(o.external_timeout * 1000.0)));
  }
  throw ConfigError("--blackbox must be one of knn, trees, analytic, external; got '" + o.blackbox + "'");
}

inline Json base_config(const Options& o) {
  Json c = Json::object();
  c["synthetic"] = o.synthetic;
  c["data"] = o.data;
  c["target_col"] = o.target_col;
  c["zscore"] = o.zscore;
  c["n"] = o.n;
  c["blackbox"] = o.blackbox;
  c["fn"] = o.fn;
  c["bb_k"] = o.bb_k;
  c["bb_trees"] = o.bb_trees;
  c["external_cmd"] = o.external_cmd;
  return c;
}

inline void finish(RunReport& r, const Options& o, std::chrono::steady_clock::time_point start) {
  if (!o.no_timestamp) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.timing = Timing{secs, timestamp_utc()};
  }
  write_report(path_in(o, "report.json"), r);
}

// Distinct per-point warnings, each with the number of points raising it.
inline std::vector<std::string> summarize_warnings(const std::vector<PointResult>& points) {
  std::map<std::string, Index> counts;
  for (const auto& p : points)
    for (const auto& w : p.warnings) ++counts[w];
  std::vector<std::string> out;
  for (const auto& [w, c] : counts) out.push_back(std::to_string(c) + " point(s): " + w);
  return out;
}

inline DualConfig dual_config(const Options& o) {
  DualConfig cfg;
  cfg.K = o.K;
  cfg.n_lambda = o.n_lambda;
  cfg.seed = o.seed;
  cfg.recovery = parse_recovery(o.recovery);
  cfg.validate();
  return cfg;
}

inline PointResult point_from(const DualExplanation& e, Index index, const Vector* x0) {
  PointResult p;
  p.index = index;
  p.d = e.diagnostics.d;
  p.contains_x0 = e.diagnostics.contains_x0;
  if (x0 != nullptr) p.x0 = to_std(*x0);
  p.a = to_std(e.a);
  p.b = to_std(e.b);
  p.metrics["fit_rms"] = e.diagnostics.fit_residual;
  p.metrics["rank"] = static_cast<double>(e.diagnostics.rank);
  if (e.intercept != 0.0) p.metrics["intercept"] = e.intercept;
  p.warnings = e.diagnostics.warnings;
  return p;
}

inline void write_contributions(std::ostream& os, Index index, const DualExplanation& e) {
  std::optional<Vector> v, v_abs;
  try {
    v = contribution_weights(e.b);
  } catch (const DegenerateError&) {
  }
  try {
    v_abs = abs_contribution_weights(e.b);
  } catch (const DegenerateError&) {
  }
  for (Index i = 0; i < e.b.size(); ++i) {
    const Index src = e.poly.source_indices[static_cast<std::size_t>(i)];
    const Index row = src < static_cast<Index>(e.neighborhood.size()) ? e.neighborhood[static_cast<std::size_t>(src)] : -1;
    os << index << "," << i << "," << row << "," << fmt(e.b(i)) << "," << (v ? fmt((*v)(i)) : "") << ","
       << (v_abs ? fmt((*v_abs)(i)) : "") << "\n";
  }
}

// ---------------------------------------------------------------- explain

inline int cmd_explain(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const DualConfig cfg = dual_config(o);
  Source src = load_source(o);
  PredictorPtr bb = make_blackbox(o, src);
  prepare_out_dir(o);
  const Matrix& X = src.train.x;
  const Index m = X.cols();

  RunReport r;
  r.command = "explain";
  r.seed = o.seed;
  r.config = base_config(o);
  r.config["K"] = o.K;
  r.config["n_lambda"] = o.n_lambda;
  r.config["points"] = o.points;
  r.config["global"] = o.global;
  r.config["recovery"] = o.recovery;

  std::vector<DualExplanation> expl;
  if (o.global) {
    expl.push_back(explain_global(X, *bb, cfg));
    r.points.push_back(point_from(expl[0], 0, nullptr));
  } else {
    const Index np = o.points > 0 ? o.points : X.rows();
    if (np > X.rows())
      throw ConfigError("--points " + std::to_string(np) + " exceeds the " + std::to_string(X.rows()) + " rows");
    expl.resize(static_cast<std::size_t>(np));
    parallel_for(np, o.jobs, [&](Index i) {
      DualConfig c = cfg;
      c.stream = static_cast<std::uint64_t>(i);
      expl[static_cast<std::size_t>(i)] = explain_local(X.row(i).transpose(), X, *bb, c);
    });
    for (Index i = 0; i < np; ++i) {
      const Vector x0 = X.row(i).transpose();
      r.points.push_back(point_from(expl[static_cast<std::size_t>(i)], i, &x0));
    }
  }

  Matrix A(static_cast<Index>(expl.size()), m);
  Matrix I(static_cast<Index>(expl.size()), m);
  double mean_d = 0.0;
  std::vector<std::string> importance_warnings;
  for (std::size_t i = 0; i < expl.size(); ++i) {
    A.row(static_cast<Index>(i)) = expl[i].a.transpose();
    I.row(static_cast<Index>(i)) = feature_importance(expl[i], ImportanceMode::kNormalized,
                                                      &r.points[i].warnings).transpose();
    mean_d += static_cast<double>(expl[i].diagnostics.d);
  }
  mean_d /= static_cast<double>(expl.size());
  const Vector mean_a = A.colwise().mean().transpose();
  Vector sd_a = Vector::Zero(m);
  if (A.rows() > 1)
    sd_a = ((A.rowwise() - mean_a.transpose()).array().square().colwise().sum() / static_cast<double>(A.rows() - 1))
               .sqrt()
               .transpose();
  const Vector mean_imp = I.colwise().mean().transpose();
  r.aggregate["n_points"] = static_cast<Index>(expl.size());
  r.aggregate["feature_names"] = src.train.feature_names;
  r.aggregate["mean_a"] = to_std(mean_a);
  r.aggregate["sd_a"] = to_std(sd_a);
  r.aggregate["mean_normalized_importance"] = to_std(mean_imp);
  r.aggregate["mean_d"] = mean_d;
  r.warnings = summarize_warnings(r.points);

  std::ostringstream csv, contrib;
  csv << "index";
  for (const auto& name : src.train.feature_names) csv << ",a_" << name;
  csv << "\n";
  contrib << "index,extreme,train_row,b,v,v_abs\n";
  for (std::size_t i = 0; i < expl.size(); ++i) {
    csv << r.points[i].index << "," << join(expl[i].a) << "\n";
    write_contributions(contrib, r.points[i].index, expl[i]);
  }
  write_text(path_in(o, "a_vectors.csv"), csv.str());
  write_text(path_in(o, "contributions.csv"), contrib.str());

  std::vector<svg::Series> bars{{"mean |a| share", {}, to_std(mean_imp)}};
  write_text(path_in(o, "importance.svg"),
             svg::bars(src.train.feature_names, bars, {"Mean normalized feature importance", "", "importance"}));
  finish(r, o, start);

  out << "explained " << expl.size() << " point(s), mean d = " << fmt_short(mean_d) << "\n";
  out << "mean a: " << join(mean_a, " ", true) << "\n";
  out << "mean normalized importance: " << join(mean_imp, " ", true) << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  out << "report: " << path_in(o, "report.json") << "\n";
  return 0;
}

// ---------------------------------------------------------------- compare

inline int cmd_compare(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const DualConfig cfg = dual_config(o);
  Source src = load_source(o);
  PredictorPtr bb = make_blackbox(o, src);
  prepare_out_dir(o);
  const Matrix& X = src.train.x;

  LimeConfig lime;
  lime.n_samples = o.lime_n;
  lime.cov_diag = parse_list(o.lime_cov, X.cols(), "--lime-cov");
  lime.kernel_v = o.lime_v;
  if (o.lime_weights == "kernel") {
    lime.weighting = LimeWeighting::kKernel;
  } else if (o.lime_weights == "random") {
    lime.weighting = LimeWeighting::kRandom;
  } else {
    throw ConfigError("--lime-weights must be 'kernel' or 'random', got '" + o.lime_weights + "'");
  }
  lime.validate(X.cols());

  // Test points: the ring's outer band for the ring data, segments between
  // extreme points of the training set otherwise.
  Matrix test;
  std::string test_kind;
  if (o.synthetic == "feat-ex3") {
    const Index l = o.points > 0 ? o.points : 100;
    test = gen_ring(l, 1.9 * 1.9, 4.0, o.seed + 1).x;
    test_kind = "ring-band";
  } else {
    const Index l = o.points > 0 ? o.points : 200;
    test = gen_edge_testset(X, l, o.seed).points;
    test_kind = "hull-edges";
  }
  const Index l = test.rows();

  std::vector<DualExplanation> dual(static_cast<std::size_t>(l));
  std::vector<LimeResult> lr(static_cast<std::size_t>(l));
  parallel_for(l, o.jobs, [&](Index i) {
    DualConfig c = cfg;
    c.stream = static_cast<std::uint64_t>(i);
    const Vector x0 = test.row(i).transpose();
    dual[static_cast<std::size_t>(i)] = explain_local(x0, X, *bb, c);
    lr[static_cast<std::size_t>(i)] = lime_explain(x0, *bb, lime, o.seed, static_cast<std::uint64_t>(l + i));
  });

  std::vector<LinearModel> dual_models, lime_models;
  for (Index i = 0; i < l; ++i) {
    dual_models.push_back(dual[static_cast<std::size_t>(i)].primal_model());
    lime_models.push_back(lr[static_cast<std::size_t>(i)].model);
  }
  const MseSummary dm = surrogate_mse(test, *bb, dual_models);
  const MseSummary lm = surrogate_mse(test, *bb, lime_models);

  RunReport r;
  r.command = "compare";
  r.seed = o.seed;
  r.config = base_config(o);
  r.config["K"] = o.K;
  r.config["n_lambda"] = o.n_lambda;
  r.config["points"] = l;
  r.config["test_set"] = test_kind;
  r.config["recovery"] = o.recovery;
  r.config["lime_cov"] = to_std(lime.cov_diag);
  r.config["lime_v"] = o.lime_v;
  r.config["lime_n"] = o.lime_n;
  r.config["lime_weights"] = o.lime_weights;

  Index dual_better = 0;
  for (Index i = 0; i < l; ++i) {
    const Vector x0 = test.row(i).transpose();
    PointResult p = point_from(dual[static_cast<std::size_t>(i)], i, &x0);
    p.metrics["dual_sq_err"] = dm.per_point(i);
    p.metrics["lime_sq_err"] = lm.per_point(i);
    for (const auto& w : lr[static_cast<std::size_t>(i)].warnings) p.warnings.push_back("LIME: " + w);
    if (dm.per_point(i) < lm.per_point(i)) ++dual_better;
    r.points.push_back(std::move(p));
  }
  const double dual_median = median(to_std(dm.per_point));
  const double lime_median = median(to_std(lm.per_point));
  r.aggregate["n_points"] = l;
  r.aggregate["dual"] = Json{{"mean", dm.mse}, {"median", dual_median}};
  r.aggregate["lime"] = Json{{"mean", lm.mse}, {"median", lime_median}};
  r.aggregate["dual_better_fraction"] = static_cast<double>(dual_better) / static_cast<double>(l);
  r.warnings = summarize_warnings(r.points);

  std::ostringstream csv;
  csv << "index,dual_sq_err,lime_sq_err\n";
  for (Index i = 0; i < l; ++i) csv << i << "," << fmt(dm.per_point(i)) << "," << fmt(lm.per_point(i)) << "\n";
  write_text(path_in(o, "mse.csv"), csv.str());
  svg::Style st{"Per-point squared error: dual vs LIME", "LIME", "dual", 640, 480, true, true, true};
  write_text(path_in(o, "mse_scatter.svg"), svg::scatter({{"", to_std(lm.per_point), to_std(dm.per_point)}}, st));
  finish(r, o, start);

  out << l << " test points (" << test_kind << "), black box " << o.blackbox << "\n";
  out << "dual MSE: mean " << fmt_short(dm.mse) << ", median " << fmt_short(dual_median) << "\n";
  out << "LIME MSE: mean " << fmt_short(lm.mse) << ", median " << fmt_short(lime_median) << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  out << "report: " << path_in(o, "report.json") << "\n";
  return 0;
}

// ---------------------------------------------------------------- examples

struct ExamplesResult {
  LambdaExperiment experiment;
  ExampleImportance ale, lr, nam;
  Vector lr_coefficients;
  std::vector<AleCurve> curves;
  TrainResult training;
  double gauge = 0.0;
};

inline ExamplesResult run_examples(const LambdaExperiment& ex, const TrainConfig& tc, Index bins, AleProbe probe,
                                   bool gauge) {
  ExamplesResult res{ex, {}, {}, {}, {}, {}, {AdditiveNet::zeros(1, 1), {}, 0.0, 0.0}, 0.0};
  res.ale = ale_importance(ex.lambdas, *ex.fn, bins, probe, &res.curves);
  res.lr = lr_importance(ex.lambdas, ex.z, kDefaultRidge, &res.lr_coefficients);
  res.training = train(AdditiveNet(ex.lambdas.cols(), tc.seed), ex.lambdas, ex.z, tc);
  res.nam = nam_importance(res.training.net, ex.lambdas, gauge, &res.gauge);
  return res;
}

inline LambdaExperiment user_polytope_experiment(const Options& o) {
  if (!std::filesystem::exists(o.polytope))
    throw IngestionError("polytope file '" + o.polytope + "' does not exist");
  const Dataset verts = load_csv(o.polytope, "", false);
  LambdaExperiment ex;
  ex.id = "polytope";
  ex.vertices = verts.x;
  Source s{verts, o.polytope, std::nullopt};
  if (!o.fn.empty()) s.fn = parse_analytic_fn(o.fn);
  if (o.blackbox != "analytic" && o.blackbox != "external")
    throw ConfigError("with --polytope the black box must be analytic or external");
  ex.fn = std::make_shared<DualView>(make_blackbox(o, s), verts.x);
  SimplexSampler sampler(verts.rows(), o.seed, stream::kFeatures);
  ex.lambdas = stack(sampler.sample(o.n > 0 ? o.n : 1000));
  ex.z = ex.fn->predict_batch(ex.lambdas);
  return ex;
}

inline int cmd_examples(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const std::string id = !o.id.empty() ? o.id : o.synthetic;
  if (id.empty() == o.polytope.empty())
    throw ConfigError("examples needs exactly one of --id ex-based-{1,2,3} or --polytope <vertices.csv>");
  AleProbe probe = AleProbe::kStandard;
  if (o.ale_probe == "renormalize") {
    probe = AleProbe::kRenormalize;
  } else if (o.ale_probe != "standard") {
    throw ConfigError("--ale-probe must be 'standard' or 'renormalize'");
  }
  if (o.bins < 2) throw ConfigError("--bins must be at least 2");

  LambdaExperiment ex;
  if (!id.empty()) {
    if (id.rfind("ex-based-", 0) != 0)
      throw ConfigError("unknown example id '" + id + "' (expected ex-based-1, ex-based-2 or ex-based-3)");
    try {
      ex = gen_lambda_experiment(id, o.seed, o.n);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  } else {
    ex = user_polytope_experiment(o);
  }
  TrainConfig tc;
  tc.alpha = o.alpha ? *o.alpha : ex.alpha;
  tc.epochs = o.epochs;
  tc.seed = o.seed;
  tc.validate();
  prepare_out_dir(o);

  const ExamplesResult res = run_examples(ex, tc, o.bins, probe, !o.no_gauge);
  const Index d = ex.lambdas.cols();

  RunReport r;
  r.command = "examples";
  r.seed = o.seed;
  r.config = Json::object();
  r.config["id"] = ex.id;
  r.config["polytope"] = o.polytope;
  r.config["blackbox"] = o.polytope.empty() ? "analytic" : o.blackbox;
  r.config["fn"] = o.fn;
  r.config["external_cmd"] = o.external_cmd;
  r.config["n"] = ex.lambdas.rows();
  r.config["d"] = d;
  r.config["epochs"] = tc.epochs;
  r.config["alpha"] = tc.alpha;
  r.config["lr"] = tc.lr;
  r.config["batch"] = tc.batch;
  r.config["bins"] = o.bins;
  r.config["ale_probe"] = o.ale_probe;
  r.config["gauge"] = !o.no_gauge;

  Json table = Json::object();
  Json raw = Json::object();
  for (const ExampleImportance* imp : {&res.ale, &res.lr, &res.nam}) {
    table[to_string(imp->method)] = to_std(imp->normalized);
    raw[to_string(imp->method)] = to_std(imp->raw);
    for (const auto& w : imp->warnings) r.warnings.push_back(w);
  }
  r.aggregate["importance"] = table;
  r.aggregate["raw_importance"] = raw;
  r.aggregate["lr_coefficients"] = to_std(res.lr_coefficients);
  try {
    const Vector v = contribution_weights(res.lr_coefficients);
    r.aggregate["contribution_weights"] = to_std(v);
    if (ex.vertices) {
      Polytope poly;
      poly.extremes = *ex.vertices;
      for (Index i = 0; i < d; ++i) poly.source_indices.push_back(i);
      r.aggregate["explaining_instance"] = to_std(explaining_instance(v, poly));
    }
  } catch (const DegenerateError& e) {
    r.warnings.push_back(e.what());
  }
  r.aggregate["contribution_weights_abs"] = to_std(abs_contribution_weights(res.lr_coefficients));
  r.aggregate["nam"] = Json{{"initial_loss", res.training.initial_loss},
                            {"final_loss", res.training.final_loss},
                            {"gauge_shift", res.gauge}};

  // importance table
  std::ostringstream csv;
  csv << "method";
  for (Index k = 0; k < d; ++k) csv << ",lambda" << k + 1;
  csv << "\n";
  for (const ExampleImportance* imp : {&res.ale, &res.lr, &res.nam})
    csv << to_string(imp->method) << "," << join(imp->normalized) << "\n";
  write_text(path_in(o, "importance.csv"), csv.str());

  // shapes and ALE curves
  const Vector grid = uniform_grid(101);
  const ShapeTable shapes = o.no_gauge ? extract_shapes(res.training.net, grid)
                                       : gauge_fixed_shapes(res.training.net, grid, res.gauge);
  std::vector<svg::Series> shape_series, ale_series;
  std::vector<std::string> names;
  for (Index k = 0; k < d; ++k) {
    const std::string name = "lambda" + std::to_string(k + 1);
    names.push_back(name);
    std::ostringstream sc;
    sc << "lambda,h\n";
    for (Index g = 0; g < grid.size(); ++g) sc << fmt(grid(g)) << "," << fmt(shapes.values(g, k)) << "\n";
    write_text(path_in(o, "shape_" + name + ".csv"), sc.str());
    shape_series.push_back({name, to_std(grid), to_std(shapes.values.col(k))});

    const AleCurve& c = res.curves[static_cast<std::size_t>(k)];
    std::ostringstream ac;
    ac << "bin_lo,bin_hi,center,effect,count\n";
    const Vector centers = c.centers();
    for (Index b = 0; b < c.bins(); ++b)
      ac << fmt(c.bin_edges(b)) << "," << fmt(c.bin_edges(b + 1)) << "," << fmt(centers(b)) << ","
         << fmt(c.centered_effects(b)) << "," << c.bin_counts[static_cast<std::size_t>(b)] << "\n";
    write_text(path_in(o, "ale_" + name + ".csv"), ac.str());
    ale_series.push_back({name, to_std(centers), to_std(c.centered_effects)});
  }
  std::ostringstream hist;
  hist << "epoch,loss\n";
  for (std::size_t e = 0; e < res.training.loss_history.size(); ++e)
    hist << e + 1 << "," << fmt(res.training.loss_history[e]) << "\n";
  write_text(path_in(o, "loss_history.csv"), hist.str());
  {
    std::ofstream model(path_in(o, "nam.txt"), std::ios::binary);
    if (!model) throw IngestionError("cannot write '" + path_in(o, "nam.txt") + "'");
    res.training.net.save(model);
  }
  std::vector<svg::Series> bar_series;
  for (const ExampleImportance* imp : {&res.ale, &res.lr, &res.nam})
    bar_series.push_back({to_string(imp->method), {}, to_std(imp->normalized)});
  write_text(path_in(o, "importance.svg"),
             svg::bars(names, bar_series, {"Normalized importance of dual coordinates", "", "importance"}));
  write_text(path_in(o, "shapes.svg"), svg::line(shape_series, {"NAM shape functions", "lambda", "h"}));
  write_text(path_in(o, "ale.svg"), svg::line(ale_series, {"ALE curves", "lambda", "centered effect"}));
  finish(r, o, start);

  out << ex.id << ": n = " << ex.lambdas.rows() << ", d = " << d << "\n";
  for (const ExampleImportance* imp : {&res.ale, &res.lr, &res.nam})
    out << to_string(imp->method) << ": " << join(imp->normalized, " ", true) << "\n";
  out << "NAM loss " << fmt_short(res.training.initial_loss) << " -> " << fmt_short(res.training.final_loss) << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  out << "report: " << path_in(o, "report.json") << "\n";
  return 0;
}

// ---------------------------------------------------------------- gen-data

inline int cmd_gen_data(const Options& o, std::ostream& out) {
  const std::string id = !o.id.empty() ? o.id : o.synthetic;
  if (id.empty()) throw ConfigError("gen-data needs --id <synthetic id>");
  SyntheticSpec spec{id, o.seed, o.n};
  try {
    spec.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  prepare_out_dir(o);
  const Dataset ds = generate(spec);
  const std::string path = path_in(o, id + ".csv");
  write_csv(path, ds);
  out << "wrote " << ds.rows() << " rows x " << ds.cols() << " features to " << path << "\n";
  return 0;
}

inline void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "Worker threads (0 = available parallelism)");
  sub->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  sub->add_flag("--no-timestamp", o.no_timestamp, "Omit timing from the report");
}

inline void add_data(CLI::App* sub, Options& o) {
  sub->add_option("--synthetic", o.synthetic, "Synthetic dataset id");
  sub->add_option("--data", o.data, "CSV file with a header row");
  sub->add_option("--target-col", o.target_col, "Target column name in --data");
  sub->add_flag("--zscore", o.zscore, "Z-score the feature columns");
  sub->add_option("--n", o.n, "Dataset size (0 = experiment default)");
}

inline void add_blackbox(CLI::App* sub, Options& o) {
  sub->add_option("--blackbox", o.blackbox, "knn, trees, analytic or external")->capture_default_str();
  sub->add_option("--fn", o.fn, "Analytic function name");
  sub->add_option("--bb-k", o.bb_k, "Neighbours of the KNN black box")->capture_default_str();
  sub->add_option("--bb-trees", o.bb_trees, "Trees in the bagged black box")->capture_default_str();
  sub->add_option("--external-cmd", o.external_cmd, "Shell command speaking the PREDICT protocol");
  sub->add_option("--external-timeout", o.external_timeout, "Seconds per external batch")->capture_default_str();
}

inline void add_dual(CLI::App* sub, Options& o) {
  sub->add_option("--K", o.K, "Nearest neighbours forming the hull")->capture_default_str();
  sub->add_option("--n-lambda", o.n_lambda, "Simplex samples per explanation")->capture_default_str();
  sub->add_option("--points", o.points, "Number of explained points (0 = default)");
  sub->add_option("--recovery", o.recovery, "Primal recovery: linear or affine")->capture_default_str();
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"dualex: dual explanations of black-box regressors", "dualex"};
  app.require_subcommand(1);

  auto* explain = app.add_subcommand("explain", "Explain points with the dual surrogate");
  detail::add_data(explain, o);
  detail::add_blackbox(explain, o);
  detail::add_dual(explain, o);
  explain->add_flag("--global", o.global, "One explanation over the whole dataset");
  detail::add_common(explain, o);

  auto* compare = app.add_subcommand("compare", "Dual surrogate vs LIME fidelity");
  detail::add_data(compare, o);
  detail::add_blackbox(compare, o);
  detail::add_dual(compare, o);
  compare->add_option("--lime-cov", o.lime_cov, "LIME perturbation variances (one value or a list)")
      ->capture_default_str();
  compare->add_option("--lime-v", o.lime_v, "LIME weight parameter v")->capture_default_str();
  compare->add_option("--lime-n", o.lime_n, "LIME samples")->capture_default_str();
  compare->add_option("--lime-weights", o.lime_weights, "kernel or random")->capture_default_str();
  detail::add_common(compare, o);

  auto* examples = app.add_subcommand("examples", "Example-based importances of simplex coordinates");
  examples->add_option("--id", o.id, "ex-based-1, ex-based-2 or ex-based-3");
  examples->add_option("--synthetic", o.synthetic, "Alias of --id");
  examples->add_option("--polytope", o.polytope, "CSV of polytope vertices (header row)");
  examples->add_option("--n", o.n, "Simplex samples (0 = experiment default)");
  detail::add_blackbox(examples, o);
  examples->add_option("--epochs", o.epochs, "NAM epochs")->capture_default_str();
  examples->add_option("--alpha", o.alpha, "NAM L2 coefficient (default per experiment)");
  examples->add_option("--bins", o.bins, "ALE quantile bins")->capture_default_str();
  examples->add_option("--ale-probe", o.ale_probe, "standard or renormalize")->capture_default_str();
  examples->add_flag("--no-gauge", o.no_gauge, "Skip the NAM gauge fix");
  detail::add_common(examples, o);

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  gen->add_option("--id", o.id, "Synthetic id");
  gen->add_option("--synthetic", o.synthetic, "Alias of --id");
  gen->add_option("--n", o.n, "Rows (0 = experiment default)");
  detail::add_common(gen, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*explain) return detail::cmd_explain(o, out);
    if (*compare) return detail::cmd_compare(o, out);
    if (*examples) return detail::cmd_examples(o, out);
    if (*gen) return detail::cmd_gen_data(o, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const IngestionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace dualex::cli
