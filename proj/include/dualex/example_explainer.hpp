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
 * @file example_explainer.hpp
 * @brief Example-based explanation in dual coordinates.
 *
 * Extreme points are weighted by normalised dual coefficients, and each
 * simplex coordinate gets an importance from one of three curves:
 * accumulated local effects of the black box (ALE), the linear dual surrogate
 * b_k lambda_k (LR), or a trained additive network's shape h_k (NAM). The
 * importance of a curve is the sample standard deviation of its values.
 */

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dualex/blackbox.hpp"
#include "dualex/errors.hpp"
#include "dualex/geometry.hpp"
#include "dualex/linalg.hpp"
#include "dualex/nam.hpp"
#include "dualex/surrogate.hpp"

namespace dualex {

// v_i = b_i / sum_j b_j. Negative entries are kept as is.
inline Vector contribution_weights(const Vector& b) {
  if (b.size() == 0) throw InvalidInput("contribution weights of an empty vector");
  require_finite(b, "dual coefficients");
  const double total = b.sum();
  if (total == 0.0) throw DegenerateError("dual coefficients sum to zero; contribution weights undefined");
  return b / total;
}

// |b_i| / sum_j |b_j|.
inline Vector abs_contribution_weights(const Vector& b) {
  const double total = b.cwiseAbs().sum();
  if (!(total > 0.0)) throw DegenerateError("dual coefficients are all zero; contribution weights undefined");
  return b.cwiseAbs() / total;
}

inline Vector explaining_instance(const Vector& v, const Polytope& poly) {
  if (v.size() != poly.d())
    throw InvalidInput("weight vector has " + std::to_string(v.size()) + " entries, polytope has " +
                       std::to_string(poly.d()) + " extreme points");
  return poly.extremes.transpose() * v;
}

// Sample standard deviation (divisor r - 1).
inline double deviation_importance(const Eigen::Ref<const Vector>& values) {
  const Index r = values.size();
  if (r < 2) throw InvalidInput("deviation importance needs at least two values, got " + std::to_string(r));
  const double mean = values.mean();
  return std::sqrt((values.array() - mean).square().sum() / static_cast<double>(r - 1));
}

inline double deviation_importance(const std::vector<double>& values) {
  return deviation_importance(Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())));
}

// kStandard replaces lambda_k by the bin edge and leaves the other coordinates
// alone. kRenormalize rescales the others by (1 - new) / (1 - old) so the
// probe stays on the simplex, spreading uniformly when old = 1.
enum class AleProbe { kStandard, kRenormalize };

struct AleCurve {
  Vector bin_edges;         // r + 1 increasing values
  Vector centered_effects;  // r values, zero sample-weighted mean
  std::vector<Index> bin_counts;
  std::vector<std::string> warnings;

  Index bins() const noexcept { return centered_effects.size(); }
  Vector centers() const {
    return 0.5 * (bin_edges.head(bins()) + bin_edges.tail(bins()));
  }
};

namespace detail {

// Linear-interpolation quantile of sorted data (numpy's default rule).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Index bin_of(const std::vector<double>& edges, double v) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  const Index idx = static_cast<Index>(it - edges.begin()) - 1;
  return std::clamp<Index>(idx, 0, static_cast<Index>(edges.size()) - 2);
}

inline std::vector<Index> bin_counts(const std::vector<double>& edges, const Vector& values) {
  std::vector<Index> counts(edges.size() - 1, 0);
  for (Index i = 0; i < values.size(); ++i) ++counts[static_cast<std::size_t>(bin_of(edges, values(i)))];
  return counts;
}

inline Matrix ale_probe(const Matrix& lambdas, Index coord, const Vector& values, AleProbe probe) {
  Matrix out = lambdas;
  const Index d = lambdas.cols();
  for (Index i = 0; i < lambdas.rows(); ++i) {
    const double old = lambdas(i, coord);
    if (probe == AleProbe::kRenormalize && d > 1) {
      const double rest = 1.0 - values(i);
      if (1.0 - old > 0.0) {
        out.row(i) *= rest / (1.0 - old);
      } else {
        out.row(i).setConstant(rest / static_cast<double>(d - 1));
      }
    }
    out(i, coord) = values(i);
  }
  return out;
}

}  // namespace detail

inline AleCurve ale_curve(const Matrix& lambdas, const Predictor& fn, Index coord, Index r_bins = 20,
                          AleProbe probe = AleProbe::kStandard) {
  const Index n = lambdas.rows();
  if (coord < 0 || coord >= lambdas.cols())
    throw InvalidInput("ALE coordinate " + std::to_string(coord) + " out of range");
  if (r_bins < 1) throw InvalidInput("ALE needs at least one bin");
  if (n < 2) throw InvalidInput("ALE needs at least two samples");

  const Vector lk = lambdas.col(coord);
  std::vector<double> sorted(lk.data(), lk.data() + n);
  std::sort(sorted.begin(), sorted.end());

  AleCurve curve;
  if (sorted.front() == sorted.back()) {
    curve.bin_edges = Vector::LinSpaced(2, 0.0, 1.0);
    curve.centered_effects = Vector::Zero(1);
    curve.bin_counts = {n};
    curve.warnings.push_back("coordinate " + std::to_string(coord) + " is constant across samples; ALE is flat");
    return curve;
  }

  std::vector<double> edges;
  for (Index j = 0; j <= r_bins; ++j) {
    const double q = detail::quantile_sorted(sorted, static_cast<double>(j) / static_cast<double>(r_bins));
    if (edges.empty() || q > edges.back()) edges.push_back(q);
  }
  // Merge bins holding fewer than two samples into a neighbour.
  for (;;) {
    const std::vector<Index> counts = detail::bin_counts(edges, lk);
    if (counts.size() <= 1) break;
    auto sparse = std::find_if(counts.begin(), counts.end(), [](Index c) { return c < 2; });
    if (sparse == counts.end()) break;
    const auto b = static_cast<std::size_t>(sparse - counts.begin());
    edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(b + 1 < counts.size() ? b + 1 : b));
  }

  const Index nb = static_cast<Index>(edges.size()) - 1;
  std::vector<Index> idx(static_cast<std::size_t>(n));
  Vector lo(n), hi(n);
  for (Index i = 0; i < n; ++i) {
    const Index b = detail::bin_of(edges, lk(i));
    idx[static_cast<std::size_t>(i)] = b;
    lo(i) = edges[static_cast<std::size_t>(b)];
    hi(i) = edges[static_cast<std::size_t>(b + 1)];
  }
  const Vector diff = fn.predict_batch(detail::ale_probe(lambdas, coord, hi, probe)) -
                      fn.predict_batch(detail::ale_probe(lambdas, coord, lo, probe));
  require_finite(diff, "ALE finite differences");

  Vector local = Vector::Zero(nb);
  std::vector<Index> counts(static_cast<std::size_t>(nb), 0);
  for (Index i = 0; i < n; ++i) {
    local(idx[static_cast<std::size_t>(i)]) += diff(i);
    ++counts[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
  }
  Vector acc = Vector::Zero(nb + 1);
  for (Index b = 0; b < nb; ++b) acc(b + 1) = acc(b) + local(b) / static_cast<double>(counts[static_cast<std::size_t>(b)]);

  Vector effects = 0.5 * (acc.head(nb) + acc.tail(nb));
  double weighted = 0.0;
  for (Index b = 0; b < nb; ++b) weighted += effects(b) * static_cast<double>(counts[static_cast<std::size_t>(b)]);
  effects.array() -= weighted / static_cast<double>(n);

  curve.bin_edges = Eigen::Map<const Vector>(edges.data(), nb + 1);
  curve.centered_effects = std::move(effects);
  curve.bin_counts = std::move(counts);
  return curve;
}

// Gauge shift c minimising sum_k I(h_k + c lambda_k). Adding c lambda_k to
// every shape leaves the additive model unchanged on the simplex.
inline double gauge_shift(const Matrix& shape_values, const Matrix& lambdas) {
  if (shape_values.rows() != lambdas.rows() || shape_values.cols() != lambdas.cols())
    throw InvalidInput("gauge shift: shape values and samples differ in shape");
  if (lambdas.rows() < 2) return 0.0;
  const Index d = lambdas.cols();
  auto objective = [&](double c) {
    double total = 0.0;
    for (Index k = 0; k < d; ++k) total += deviation_importance(shape_values.col(k) + c * lambdas.col(k));
    return total;
  };
  double spread_h = 0.0, spread_l = 0.0;
  for (Index k = 0; k < d; ++k) {
    spread_h += deviation_importance(shape_values.col(k));
    spread_l += deviation_importance(lambdas.col(k));
  }
  if (!(spread_l > 0.0) || !(spread_h > 0.0)) return 0.0;
  // Beyond this radius the objective exceeds its value at c = 0.
  double a = -2.0 * spread_h / spread_l;
  double b = -a;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 200 && b - a > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = objective(x2);
    }
  }
  return 0.5 * (a + b);
}

enum class ExampleMethod { kAle, kLr, kNam };

inline const char* to_string(ExampleMethod m) {
  switch (m) {
    case ExampleMethod::kAle: return "ALE";
    case ExampleMethod::kLr: return "LR";
    case ExampleMethod::kNam: return "NAM";
  }
  return "?";
}

struct ExampleImportance {
  ExampleMethod method = ExampleMethod::kAle;
  Vector raw;
  Vector normalized;
  std::vector<std::string> warnings;
};

inline ExampleImportance make_importance(ExampleMethod method, Vector raw, std::vector<std::string> warnings = {}) {
  ExampleImportance out;
  out.method = method;
  out.warnings = std::move(warnings);
  const double total = raw.sum();
  if (!(total > 0.0)) {
    out.warnings.push_back(std::string(to_string(method)) + " importances are all zero; reporting uniform weights");
    out.normalized = Vector::Constant(raw.size(), 1.0 / static_cast<double>(raw.size()));
  } else {
    out.normalized = raw / total;
  }
  out.raw = std::move(raw);
  return out;
}

inline ExampleImportance ale_importance(const Matrix& lambdas, const Predictor& fn, Index r_bins = 20,
                                        AleProbe probe = AleProbe::kStandard,
                                        std::vector<AleCurve>* curves = nullptr) {
  const Index d = lambdas.cols();
  Vector raw(d);
  std::vector<std::string> warnings;
  if (curves != nullptr) curves->clear();
  for (Index k = 0; k < d; ++k) {
    AleCurve c = ale_curve(lambdas, fn, k, r_bins, probe);
    raw(k) = c.bins() >= 2 ? deviation_importance(c.centered_effects) : 0.0;
    warnings.insert(warnings.end(), c.warnings.begin(), c.warnings.end());
    if (curves != nullptr) curves->push_back(std::move(c));
  }
  return make_importance(ExampleMethod::kAle, std::move(raw), std::move(warnings));
}

// raw_k = I(b_k lambda_k) over the samples, b from a no-intercept fit of z on lambda.
inline ExampleImportance lr_importance(const Matrix& lambdas, const Vector& z, double ridge = kDefaultRidge,
                                       Vector* coefficients = nullptr) {
  if (lambdas.rows() < 2) throw InvalidInput("LR importance needs at least two samples");
  const Vector b = fit_linear(lambdas, z, std::nullopt, ridge, false).coefficients;
  Vector raw(lambdas.cols());
  for (Index k = 0; k < lambdas.cols(); ++k) raw(k) = deviation_importance(b(k) * lambdas.col(k));
  if (coefficients != nullptr) *coefficients = b;
  return make_importance(ExampleMethod::kLr, std::move(raw));
}

// Shapes evaluated on the samples, gauge-fixed unless `gauge` is false.
inline ExampleImportance nam_importance(const AdditiveNet& net, const Matrix& lambdas, bool gauge = true,
                                        double* shift = nullptr) {
  if (lambdas.rows() < 2) throw InvalidInput("NAM importance needs at least two samples");
  const Matrix h = net.shapes(lambdas);
  const double c = gauge ? gauge_shift(h, lambdas) : 0.0;
  Vector raw(lambdas.cols());
  for (Index k = 0; k < lambdas.cols(); ++k) raw(k) = deviation_importance(h.col(k) + c * lambdas.col(k));
  if (shift != nullptr) *shift = c;
  return make_importance(ExampleMethod::kNam, std::move(raw));
}

// Shape table with the gauge shift applied before centring.
inline ShapeTable gauge_fixed_shapes(const AdditiveNet& net, const Vector& grid, double shift) {
  ShapeTable t = extract_shapes(net, grid, false);
  for (Index k = 0; k < net.d(); ++k) t.values.col(k) += shift * grid;
  if (grid.size() > 0) t.values.rowwise() -= t.values.colwise().mean();
  return t;
}

}  // namespace dualex
