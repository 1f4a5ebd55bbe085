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
 * @file surrogate.hpp
 * @brief Linear surrogates: weighted ridge least squares, recovery of primal
 * coefficients from a dual fit, and the Gaussian-perturbation LIME baseline.
 */

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualex/blackbox.hpp"
#include "dualex/errors.hpp"
#include "dualex/linalg.hpp"
#include "dualex/random.hpp"

namespace dualex {

inline constexpr double kDefaultRidge = 1e-8;

struct LinearModel {
  Vector coefficients;
  double intercept = 0.0;
  double ridge = 0.0;

  double predict(const Eigen::Ref<const Vector>& x) const { return coefficients.dot(x) + intercept; }
};

/// Minimises sum_i w_i (t_i - c.x_i - b)^2 + ridge |c|^2 (the intercept b is
/// not penalised). The system is solved as an augmented least-squares problem
/// with a complete orthogonal decomposition, so a rank-deficient design with
/// ridge = 0 yields the minimum-norm solution.
inline LinearModel fit_linear(const Matrix& inputs, const Vector& targets,
                              const std::optional<Vector>& weights = std::nullopt,
                              double ridge = kDefaultRidge, bool with_intercept = false) {
  const Index n = inputs.rows();
  const Index m = inputs.cols();
  if (targets.size() != n)
    throw InvalidInput("fit_linear: " + std::to_string(n) + " rows but " +
                       std::to_string(targets.size()) + " targets");
  if (n == 0) throw InvalidInput("fit_linear: empty design");
  if (ridge < 0.0 || !std::isfinite(ridge)) throw InvalidInput("fit_linear: ridge must be >= 0");
  require_finite(inputs, "fit_linear inputs");
  require_finite(targets, "fit_linear targets");
  if (weights) {
    if (weights->size() != n) throw InvalidInput("fit_linear: weight count mismatch");
    require_finite(*weights, "fit_linear weights");
    if ((weights->array() < 0.0).any()) throw InvalidInput("fit_linear: negative weight");
    if (!(weights->sum() > 0.0)) throw InvalidInput("fit_linear: all weights are zero");
  }

  const Index cols = m + (with_intercept ? 1 : 0);
  const Index extra = ridge > 0.0 ? m : 0;
  Matrix design = Matrix::Zero(n + extra, cols);
  Vector rhs = Vector::Zero(n + extra);
  for (Index i = 0; i < n; ++i) {
    const double s = weights ? std::sqrt((*weights)(i)) : 1.0;
    design.row(i).head(m) = s * inputs.row(i);
    if (with_intercept) design(i, m) = s;
    rhs(i) = s * targets(i);
  }
  if (extra > 0) design.block(n, 0, m, m).diagonal().setConstant(std::sqrt(ridge));

  const Vector solution = design.completeOrthogonalDecomposition().solve(rhs);
  LinearModel model;
  model.coefficients = solution.head(m);
  model.intercept = with_intercept ? solution(m) : 0.0;
  model.ridge = ridge;
  if (!model.coefficients.allFinite() || !std::isfinite(model.intercept))
    throw InvalidInput("fit_linear: solution is not finite");
  return model;
}

struct PrimalRecovery {
  Vector a;
  double intercept = 0.0;
  Index rank = 0;
  std::vector<std::string> warnings;
};

// kLinear: b_i = a.x*_i (the dual model's own identity). kAffine adds an
// unpenalised intercept, b_i = a.x*_i + a0.
enum class RecoveryMode { kLinear, kAffine };

inline const char* to_string(RecoveryMode m) { return m == RecoveryMode::kAffine ? "affine" : "linear"; }

// Full column rank of `design` (threshold 1e-10 relative).
inline Index column_rank(const Matrix& design) {
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  return qr.rank();
}

/// Solves min_a |X a - b|^2 where the rows of X are the extreme points, i.e.
/// the primal model reproduces b_i at every vertex. The ridge term is only
/// added when X is rank deficient.
inline PrimalRecovery recover_primal(const Vector& b, const Matrix& extremes,
                                     double ridge = kDefaultRidge,
                                     RecoveryMode mode = RecoveryMode::kLinear) {
  if (extremes.rows() < 1) throw InvalidInput("recover_primal: no extreme points");
  if (b.size() != extremes.rows())
    throw InvalidInput("recover_primal: " + std::to_string(b.size()) + " dual coefficients for " +
                       std::to_string(extremes.rows()) + " extreme points");
  PrimalRecovery out;
  const bool affine = mode == RecoveryMode::kAffine;
  Matrix design = extremes;
  if (affine) design.rowwise() -= extremes.colwise().mean();
  out.rank = column_rank(design);
  const bool deficient = out.rank < extremes.cols();
  LinearModel fit = fit_linear(extremes, b, std::nullopt, deficient ? ridge : 0.0, affine);
  out.a = std::move(fit.coefficients);
  out.intercept = fit.intercept;
  if (deficient) {
    out.warnings.push_back("extreme-point matrix has rank " + std::to_string(out.rank) + " < " +
                           std::to_string(extremes.cols()) +
                           " features; primal coefficients are the minimum-norm solution");
  }
  return out;
}

enum class LimeWeighting {
  kKernel,  // w = exp(-|x - x0|^2 / (2 v))
  kRandom,  // w = |N(0, v)| drawn independently of the sample position
};

struct LimeConfig {
  Index n_samples = 30;
  Vector cov_diag;  // per-feature perturbation variance
  double kernel_v = 0.01;
  LimeWeighting weighting = LimeWeighting::kKernel;
  double ridge = kDefaultRidge;

  void validate(Index dim) const {
    if (cov_diag.size() != dim)
      throw ConfigError("LIME covariance has " + std::to_string(cov_diag.size()) +
                        " entries for " + std::to_string(dim) + " features");
    if (n_samples < dim + 1)
      throw ConfigError("LIME needs at least " + std::to_string(dim + 1) + " samples, got " +
                        std::to_string(n_samples));
    if (!((cov_diag.array() > 0.0).all())) throw ConfigError("LIME variances must be positive");
    if (!(kernel_v > 0.0)) throw ConfigError("LIME kernel parameter v must be positive");
  }
};

struct LimeResult {
  LinearModel model;
  std::vector<std::string> warnings;
};

inline LimeResult lime_explain(const Vector& x0, const Predictor& predictor, const LimeConfig& cfg,
                               std::uint64_t seed, std::uint64_t stream = 0) {
  cfg.validate(x0.size());
  require_finite(x0, "LIME explained point");
  CounterRng rng(seed, stream);
  const Index m = x0.size();
  Matrix samples(cfg.n_samples, m);
  const Vector sd = cfg.cov_diag.cwiseSqrt();
  for (Index j = 0; j < cfg.n_samples; ++j)
    for (Index c = 0; c < m; ++c) samples(j, c) = x0(c) + sd(c) * rng.normal();

  Vector weights(cfg.n_samples);
  for (Index j = 0; j < cfg.n_samples; ++j) {
    if (cfg.weighting == LimeWeighting::kKernel) {
      weights(j) = std::exp(-(samples.row(j).transpose() - x0).squaredNorm() / (2.0 * cfg.kernel_v));
    } else {
      weights(j) = std::abs(rng.normal(0.0, std::sqrt(cfg.kernel_v)));
    }
  }

  LimeResult out;
  if ((weights.array() <= 1e-300).any()) {
    out.warnings.push_back("LIME weights underflowed; floored at 1e-300");
    weights = weights.cwiseMax(1e-300);
    // Rescale so the floored system stays well inside double range.
    weights /= weights.maxCoeff();
  }
  const Vector targets = predictor.predict_batch(samples);
  out.model = fit_linear(samples, targets, weights, cfg.ridge, true);
  return out;
}

struct MseSummary {
  Vector per_point;  // (f(x_j) - g_j(x_j))^2
  double mse = 0.0;  // their mean
};

inline MseSummary surrogate_mse(const Matrix& test_points, const Predictor& predictor,
                                const std::vector<LinearModel>& explanations) {
  if (static_cast<Index>(explanations.size()) != test_points.rows())
    throw InvalidInput("surrogate_mse: " + std::to_string(explanations.size()) +
                       " explanations for " + std::to_string(test_points.rows()) + " points");
  MseSummary out;
  const Vector f = predictor.predict_batch(test_points);
  out.per_point.resize(test_points.rows());
  for (Index j = 0; j < test_points.rows(); ++j) {
    const double diff = f(j) - explanations[static_cast<std::size_t>(j)].predict(test_points.row(j).transpose());
    out.per_point(j) = diff * diff;
  }
  out.mse = test_points.rows() > 0 ? out.per_point.mean() : 0.0;
  return out;
}

}  // namespace dualex
