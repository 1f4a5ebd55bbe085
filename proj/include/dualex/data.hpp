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
 * @file data.hpp
 * @brief Synthetic experiment generators, CSV input/output and the
 * hull-edge test-set generator.
 *
 * Every generator draws from CounterRng(seed, stream) with fixed stream ids
 * (0 features, 1 noise), so a dataset is a pure function of its seed.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dualex/blackbox.hpp"
#include "dualex/errors.hpp"
#include "dualex/geometry.hpp"
#include "dualex/linalg.hpp"
#include "dualex/random.hpp"
#include "dualex/simplex.hpp"

namespace dualex {

struct Normalization {
  Vector mean;
  Vector std;  // population standard deviation; 1 for constant columns
};

struct Dataset {
  Matrix x;
  std::optional<Vector> y;
  std::vector<std::string> feature_names;
  std::string target_name = "y";
  std::optional<Normalization> normalization;

  Index rows() const noexcept { return x.rows(); }
  Index cols() const noexcept { return x.cols(); }

  // Features mapped back to the original units.
  Matrix denormalized() const {
    if (!normalization) return x;
    Matrix out = x.array().rowwise() * normalization->std.transpose().array();
    out.rowwise() += normalization->mean.transpose();
    return out;
  }
};

inline std::vector<std::string> default_names(const std::string& prefix, Index m) {
  std::vector<std::string> names;
  for (Index j = 0; j < m; ++j) names.push_back(prefix + std::to_string(j + 1));
  return names;
}

namespace stream {
inline constexpr std::uint64_t kFeatures = 0;
inline constexpr std::uint64_t kNoise = 1;
}  // namespace stream

// Adds N(0, sd^2) noise in place.
inline void add_noise(Vector& y, double sd, std::uint64_t seed) {
  if (sd <= 0.0) return;
  CounterRng rng(seed, stream::kNoise);
  for (Index i = 0; i < y.size(); ++i) y(i) += rng.normal(0.0, sd);
}

// x = rho (cos phi, sin phi) with rho^2 ~ U[lo, hi], phi ~ U[0, 2 pi];
// y = |x|^2 + N(0, noise_sd^2).
inline Dataset gen_ring(Index n, double lo, double hi, std::uint64_t seed, double noise_sd = 0.05) {
  if (n < 1) throw InvalidInput("ring dataset needs n >= 1");
  if (!(lo >= 0.0 && lo < hi)) throw InvalidInput("ring radius range must satisfy 0 <= lo < hi");
  CounterRng rng(seed, stream::kFeatures);
  Dataset ds;
  ds.x.resize(n, 2);
  Vector y(n);
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (Index i = 0; i < n; ++i) {
    const double rho2 = rng.uniform(lo, hi);
    const double phi = rng.uniform(0.0, kTwoPi);
    const double rho = std::sqrt(rho2);
    ds.x(i, 0) = rho * std::cos(phi);
    ds.x(i, 1) = rho * std::sin(phi);
    y(i) = rho2;
  }
  add_noise(y, noise_sd, seed);
  ds.y = std::move(y);
  ds.feature_names = default_names("x", 2);
  return ds;
}

inline Matrix uniform_box(Index n, Index m, double lo, double hi, std::uint64_t seed) {
  CounterRng rng(seed, stream::kFeatures);
  Matrix x(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) x(i, j) = rng.uniform(lo, hi);
  return x;
}

inline Dataset gen_analytic(AnalyticFn fn, Index n, double lo, double hi, double noise_sd, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("dataset size must be at least 1");
  const AnalyticPredictor f(fn);
  Dataset ds;
  ds.x = uniform_box(n, f.input_dim(), lo, hi, seed);
  Vector y = f.predict_batch(ds.x);
  add_noise(y, noise_sd, seed);
  ds.y = std::move(y);
  ds.feature_names = default_names("x", f.input_dim());
  return ds;
}

// 10 x1 - 20 x2 - 2 x3 + 3 x4 on U[0,1]^7 with N(0, 0.1^2) noise.
inline Dataset gen_linear7(Index n, std::uint64_t seed, double noise_sd = 0.1) {
  return gen_analytic(AnalyticFn::kLinear7, n, 0.0, 1.0, noise_sd, seed);
}

// -x1^2 + 2 x2 on U[lo, lo + 1]^2 with N(0, 0.05^2) noise.
inline Dataset gen_quad2(Index n, double lo, std::uint64_t seed, double noise_sd = 0.05) {
  return gen_analytic(AnalyticFn::kQuad2, n, lo, lo + 1.0, noise_sd, seed);
}

// Simplex-coordinate experiment: samples, noiseless targets and the black box
// as a function of lambda.
struct LambdaExperiment {
  std::string id;
  Matrix lambdas;
  Vector z;
  PredictorPtr fn;
  std::optional<Matrix> vertices;  // primal vertices when the black box lives in x
  double alpha = 1e-4;             // NAM L2 coefficient used for this experiment
};

inline Matrix triangle_vertices() {
  Matrix v(3, 2);
  v << -1.0, -1.0, 0.0, 2.0, 1.0, 0.0;
  return v;
}

inline LambdaExperiment gen_lambda_experiment(const std::string& id, std::uint64_t seed, Index n = 0) {
  LambdaExperiment ex;
  ex.id = id;
  Index d = 0;
  if (id == "ex-based-1") {
    d = 6;
    n = n > 0 ? n : 2000;
    ex.fn = analytic(AnalyticFn::kLambdaHump);
    ex.alpha = 1e-4;
  } else if (id == "ex-based-2") {
    d = 4;
    n = n > 0 ? n : 1000;
    ex.fn = analytic(AnalyticFn::kLambdaPoly);
    ex.alpha = 1e-6;
  } else if (id == "ex-based-3") {
    d = 3;
    n = n > 0 ? n : 1000;
    ex.vertices = triangle_vertices();
    ex.fn = std::make_shared<DualView>(analytic(AnalyticFn::kSign2), *ex.vertices);
    ex.alpha = 0.0;
  } else {
    throw InvalidInput("unknown simplex experiment '" + id + "' (expected ex-based-1, ex-based-2 or ex-based-3)");
  }
  SimplexSampler sampler(d, seed, stream::kFeatures);
  ex.lambdas = stack(sampler.sample(n));
  ex.z = ex.fn->predict_batch(ex.lambdas);
  return ex;
}

inline const std::vector<std::string>& synthetic_ids() {
  static const std::vector<std::string> ids = {"feat-ex1",   "feat-ex2a",  "feat-ex2b", "feat-ex3",
                                               "ex-based-1", "ex-based-2", "ex-based-3"};
  return ids;
}

struct SyntheticSpec {
  std::string id;
  std::uint64_t seed = 0;
  Index n = 0;  // 0: the experiment's default size

  void validate() const {
    const auto& ids = synthetic_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      std::string list;
      for (const auto& s : ids) list += (list.empty() ? "" : ", ") + s;
      throw InvalidInput("unknown synthetic id '" + id + "' (expected one of " + list + ")");
    }
    if (n < 0) throw InvalidInput("dataset size must be >= 0");
  }

  bool is_lambda() const { return id.rfind("ex-based-", 0) == 0; }
};

// Feature-space datasets; simplex experiments come back as lambda columns
// with z as the target.
inline Dataset generate(const SyntheticSpec& spec) {
  spec.validate();
  if (spec.id == "feat-ex1") return gen_linear7(spec.n > 0 ? spec.n : 1000, spec.seed);
  if (spec.id == "feat-ex2a") return gen_quad2(spec.n > 0 ? spec.n : 400, 0.0, spec.seed);
  if (spec.id == "feat-ex2b") return gen_quad2(spec.n > 0 ? spec.n : 400, 15.0, spec.seed);
  if (spec.id == "feat-ex3") return gen_ring(spec.n > 0 ? spec.n : 400, 0.0, 4.0, spec.seed);
  LambdaExperiment ex = gen_lambda_experiment(spec.id, spec.seed, spec.n);
  Dataset ds;
  ds.x = std::move(ex.lambdas);
  ds.y = std::move(ex.z);
  ds.feature_names = default_names("lambda", ds.x.cols());
  ds.target_name = "z";
  return ds;
}

// Per-column z-score with population std. Constant columns keep std = 1.
inline Normalization zscore_inplace(Matrix& x) {
  Normalization norm;
  const double n = static_cast<double>(x.rows());
  norm.mean = x.colwise().mean().transpose();
  norm.std.resize(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - norm.mean(j)).square().sum() / n;
    norm.std(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    x.col(j) = (x.col(j).array() - norm.mean(j)) / norm.std(j);
  }
  return norm;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

// Comma-separated numeric table with a header row. `target_column` names a
// header entry (or is empty for no target).
inline Dataset load_csv(const std::string& path, const std::string& target_column, bool zscore) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open data file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("data file '" + path + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header;
  for (auto f : detail::split_csv_line(line)) header.emplace_back(detail::trim(f));
  const Index ncols = static_cast<Index>(header.size());

  Index target = -1;
  if (!target_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), target_column);
    if (it == header.end())
      throw IngestionError("target column '" + target_column + "' not found in header of '" + path + "'");
    target = static_cast<Index>(it - header.begin());
  }

  std::vector<double> values;
  Index rows = 0;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (static_cast<Index>(fields.size()) != ncols)
      throw IngestionError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(ncols) +
                           " fields, found " + std::to_string(fields.size()));
    for (Index j = 0; j < ncols; ++j) {
      double v = 0.0;
      const std::string_view cell = detail::trim(fields[static_cast<std::size_t>(j)]);
      if (!detail::parse_double(cell, v))
        throw IngestionError(path + ":" + std::to_string(lineno) + ": column '" +
                             header[static_cast<std::size_t>(j)] + "' has non-numeric value '" +
                             std::string(cell) + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw IngestionError("data file '" + path + "' has no data rows");

  Dataset ds;
  const Index m = target >= 0 ? ncols - 1 : ncols;
  if (m < 1) throw IngestionError("data file '" + path + "' has no feature columns");
  ds.x.resize(rows, m);
  Vector y(rows);
  for (Index i = 0; i < rows; ++i) {
    Index c = 0;
    for (Index j = 0; j < ncols; ++j) {
      const double v = values[static_cast<std::size_t>(i * ncols + j)];
      if (j == target) {
        y(i) = v;
      } else {
        ds.x(i, c++) = v;
      }
    }
  }
  for (Index j = 0; j < ncols; ++j)
    if (j != target) ds.feature_names.push_back(header[static_cast<std::size_t>(j)]);
  if (target >= 0) {
    ds.y = std::move(y);
    ds.target_name = target_column;
  }
  if (zscore) ds.normalization = zscore_inplace(ds.x);
  return ds;
}

inline void write_csv(std::ostream& os, const Dataset& ds) {
  for (std::size_t j = 0; j < ds.feature_names.size(); ++j) os << (j ? "," : "") << ds.feature_names[j];
  if (ds.y) os << "," << ds.target_name;
  os << "\n";
  char buf[40];
  for (Index i = 0; i < ds.rows(); ++i) {
    for (Index j = 0; j < ds.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.x(i, j));
      os << (j ? "," : "") << buf;
    }
    if (ds.y) {
      std::snprintf(buf, sizeof(buf), "%.17g", (*ds.y)(i));
      os << "," << buf;
    }
    os << "\n";
  }
}

inline void write_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  write_csv(out, ds);
  if (!out) throw IngestionError("write to '" + path + "' failed");
}

struct EdgeTestSet {
  Matrix points;                  // l x m
  std::vector<Index> first, second;  // extreme-point rows (into poly.extremes)
  Vector weights;                 // lambda per point
  Polytope poly;
};

// Each point is lambda x_j1 + (1 - lambda) x_j2 for a uniform pair of distinct
// extreme points of the training set and lambda ~ U[0, 1].
inline EdgeTestSet gen_edge_testset(const Matrix& train, Index l, std::uint64_t seed) {
  if (l < 1) throw InvalidInput("edge test set size must be at least 1");
  EdgeTestSet out;
  out.poly = find_extreme_points(PointSet(train));
  const Index d = out.poly.d();
  if (d < 2) throw DegenerateError("training hull has fewer than two extreme points");
  CounterRng rng(seed, stream::kFeatures);
  out.points.resize(l, train.cols());
  out.weights.resize(l);
  for (Index t = 0; t < l; ++t) {
    const auto j1 = static_cast<Index>(rng.below(static_cast<std::uint64_t>(d)));
    auto j2 = static_cast<Index>(rng.below(static_cast<std::uint64_t>(d - 1)));
    if (j2 >= j1) ++j2;
    const double lam = rng.uniform01();
    out.first.push_back(j1);
    out.second.push_back(j2);
    out.weights(t) = lam;
    out.points.row(t) = lam * out.poly.extremes.row(j1) + (1.0 - lam) * out.poly.extremes.row(j2);
  }
  return out;
}

}  // namespace dualex
