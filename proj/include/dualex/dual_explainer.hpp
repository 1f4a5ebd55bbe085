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
 * @file dual_explainer.hpp
 * @brief Feature importances from a linear surrogate fitted in dual
 * (simplex) coordinates over the extreme points around the explained point.
 *
 * Local pipeline for an explained point x0:
 *   1. take the K nearest training rows (ties by lower index) and append x0;
 *   2. find the extreme points x*_1..x*_d of that set;
 *   3. draw n_lambda uniform vectors on the (d-1)-simplex;
 *   4. query the black box at sum_i lambda_i x*_i;
 *   5. fit z ~ b.lambda without intercept (ridge only if rank deficient);
 *   6. recover primal coefficients a from X a = b.
 * Every query in step 4 is a convex combination of the neighbourhood, so the
 * black box is never asked about points outside the data.
 */

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dualex/blackbox.hpp"
#include "dualex/errors.hpp"
#include "dualex/geometry.hpp"
#include "dualex/linalg.hpp"
#include "dualex/simplex.hpp"
#include "dualex/surrogate.hpp"

namespace dualex {

struct DualConfig {
  Index K = 10;
  Index n_lambda = 30;
  double tol = 0.0;  // <= 0: default_tolerance of the neighbourhood
  double ridge = kDefaultRidge;
  RecoveryMode recovery = RecoveryMode::kLinear;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  void validate() const {
    if (K < 1) throw ConfigError("K must be at least 1");
    if (n_lambda < 2) throw ConfigError("n_lambda must be at least 2");
    if (ridge < 0.0) throw ConfigError("ridge must be >= 0");
  }
};

struct DualDiagnostics {
  Index d = 0;
  bool contains_x0 = false;
  double fit_residual = 0.0;  // RMS of z - b.lambda over the dual dataset
  Index rank = 0;             // rank of the extreme-point matrix
  std::vector<std::string> warnings;
};

struct DualExplanation {
  Vector a;                   // primal importances, one per feature
  double intercept = 0.0;     // nonzero only with RecoveryMode::kAffine
  Vector b;                   // dual coefficients, one per extreme point
  Polytope poly;
  std::vector<Index> neighborhood;  // training rows forming the hull input
  Matrix lambdas;             // n_lambda x d
  Matrix queries;             // n_lambda x m primal images
  Vector z;                   // black-box predictions at the queries
  DualDiagnostics diagnostics;

  LinearModel primal_model() const { return LinearModel{a, intercept, 0.0}; }
};

namespace detail {

inline std::vector<Index> nearest_rows(const Matrix& train, const Vector& x0, Index K) {
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(train.rows()));
  for (Index i = 0; i < train.rows(); ++i)
    dist[static_cast<std::size_t>(i)] = {(train.row(i).transpose() - x0).squaredNorm(), i};
  std::partial_sort(dist.begin(), dist.begin() + K, dist.end());
  std::vector<Index> out(static_cast<std::size_t>(K));
  for (Index j = 0; j < K; ++j) out[static_cast<std::size_t>(j)] = dist[static_cast<std::size_t>(j)].second;
  return out;
}

inline DualExplanation explain_on(const Matrix& hull_input, std::vector<Index> neighborhood,
                                  const Vector* x0, const Predictor& predictor,
                                  const DualConfig& cfg) {
  DualExplanation out;
  out.neighborhood = std::move(neighborhood);
  out.poly = find_extreme_points(PointSet(hull_input), cfg.tol);
  const Index d = out.poly.d();
  if (x0 != nullptr) {
    for (Index i = 0; i < d; ++i) {
      if ((out.poly.extremes.row(i).transpose() - *x0).norm() <= out.poly.tol) {
        out.poly.contains_x0 = true;
        break;
      }
    }
  }
  if (cfg.n_lambda < d)
    throw ConfigError("n_lambda=" + std::to_string(cfg.n_lambda) + " is smaller than the " +
                      std::to_string(d) + " extreme points found; the dual fit would be underdetermined");

  SimplexSampler sampler(d, cfg.seed, cfg.stream);
  out.lambdas = stack(sampler.sample(cfg.n_lambda));
  out.queries.resize(cfg.n_lambda, out.poly.dim());
  for (Index j = 0; j < cfg.n_lambda; ++j)
    out.queries.row(j) = map_to_primal(Vector(out.lambdas.row(j).transpose()), out.poly.extremes).transpose();
  out.z = predictor.predict_batch(out.queries);
  require_finite(out.z, "black-box predictions");

  const double b_ridge = column_rank(out.lambdas) < d ? cfg.ridge : 0.0;
  out.b = fit_linear(out.lambdas, out.z, std::nullopt, b_ridge, false).coefficients;
  PrimalRecovery primal = recover_primal(out.b, out.poly.extremes, cfg.ridge, cfg.recovery);
  out.a = std::move(primal.a);
  out.intercept = primal.intercept;

  auto& diag = out.diagnostics;
  diag.d = d;
  diag.contains_x0 = out.poly.contains_x0;
  diag.rank = primal.rank;
  diag.fit_residual = std::sqrt((out.lambdas * out.b - out.z).squaredNorm() / static_cast<double>(cfg.n_lambda));
  diag.warnings = std::move(primal.warnings);
  return out;
}

}  // namespace detail

inline DualExplanation explain_local(const Vector& x0, const Matrix& train_x, const Predictor& predictor,
                                     const DualConfig& cfg) {
  cfg.validate();
  if (x0.size() != train_x.cols())
    throw InvalidInput("explained point has " + std::to_string(x0.size()) + " features, data has " +
                       std::to_string(train_x.cols()));
  require_finite(x0, "explained point");
  if (train_x.rows() < cfg.K)
    throw ConfigError("K=" + std::to_string(cfg.K) + " exceeds the " + std::to_string(train_x.rows()) +
                      " training rows");

  std::vector<Index> nn = detail::nearest_rows(train_x, x0, cfg.K);
  Matrix hull_input(cfg.K + 1, train_x.cols());
  for (Index j = 0; j < cfg.K; ++j) hull_input.row(j) = train_x.row(nn[static_cast<std::size_t>(j)]);
  hull_input.row(cfg.K) = x0.transpose();
  return detail::explain_on(hull_input, std::move(nn), &x0, predictor, cfg);
}

// Same pipeline with the whole dataset as the neighbourhood and no explained point.
inline DualExplanation explain_global(const Matrix& train_x, const Predictor& predictor,
                                      const DualConfig& cfg) {
  cfg.validate();
  if (train_x.rows() < 1) throw InvalidInput("explain_global: empty dataset");
  std::vector<Index> all(static_cast<std::size_t>(train_x.rows()));
  for (Index i = 0; i < train_x.rows(); ++i) all[static_cast<std::size_t>(i)] = i;
  return detail::explain_on(train_x, std::move(all), nullptr, predictor, cfg);
}

enum class ImportanceMode { kSigned, kNormalized };

// kNormalized: |a_i| / sum_j |a_j|; an all-zero vector maps to the uniform one.
inline Vector feature_importance(const Vector& a, ImportanceMode mode,
                                 std::vector<std::string>* warnings = nullptr) {
  if (mode == ImportanceMode::kSigned) return a;
  const double total = a.cwiseAbs().sum();
  if (!(total > 0.0)) {
    if (warnings != nullptr) warnings->push_back("all feature importances are zero; reporting uniform weights");
    return Vector::Constant(a.size(), 1.0 / static_cast<double>(a.size()));
  }
  return a.cwiseAbs() / total;
}

inline Vector feature_importance(const DualExplanation& expl, ImportanceMode mode,
                                 std::vector<std::string>* warnings = nullptr) {
  return feature_importance(expl.a, mode, warnings);
}

}  // namespace dualex
