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
 * @file blackbox.hpp
 * @brief The models being explained, behind one prediction interface.
 *
 * Predictors are immutable once built and deterministic: batch prediction
 * is defined as element-wise single prediction, so the two always agree
 * exactly. Noise never enters at prediction time; synthetic targets carry
 * their noise from the data generators.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualex/errors.hpp"
#include "dualex/linalg.hpp"
#include "dualex/random.hpp"

namespace dualex {

enum class PredictorKind { kKnn, kBaggedTrees, kAnalytic, kExternal };

inline std::string_view to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kKnn: return "knn";
    case PredictorKind::kBaggedTrees: return "trees";
    case PredictorKind::kAnalytic: return "analytic";
    case PredictorKind::kExternal: return "external";
  }
  return "unknown";
}

class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual PredictorKind kind() const = 0;
  // Expected input dimension; 0 when the predictor accepts any.
  virtual Index input_dim() const = 0;
  virtual double predict(const Eigen::Ref<const Vector>& x) const = 0;

  virtual Vector predict_batch(const Eigen::Ref<const Matrix>& xs) const {
    Vector out(xs.rows());
    for (Index i = 0; i < xs.rows(); ++i) out(i) = predict(xs.row(i).transpose());
    return out;
  }

 protected:
  void check_dim(Index got) const {
    const Index want = input_dim();
    if (want != 0 && got != want)
      throw InvalidInput(std::string(to_string(kind())) + " predictor expects " +
                         std::to_string(want) + " features, got " + std::to_string(got));
  }
};

using PredictorPtr = std::shared_ptr<const Predictor>;

// ---------------------------------------------------------------------------
// k-nearest-neighbour regression

class KnnRegressor final : public Predictor {
 public:
  KnnRegressor(Matrix train_x, Vector train_y, Index k)
      : x_(std::move(train_x)), y_(std::move(train_y)), k_(k) {
    if (k_ < 1) throw InvalidInput("knn: k must be at least 1");
    if (x_.rows() != y_.size())
      throw InvalidInput("knn: " + std::to_string(x_.rows()) + " rows but " +
                         std::to_string(y_.size()) + " targets");
    if (k_ > x_.rows())
      throw InvalidInput("knn: k=" + std::to_string(k_) + " exceeds " +
                         std::to_string(x_.rows()) + " training rows");
    require_finite(x_, "knn training features");
    require_finite(y_, "knn training targets");
  }

  PredictorKind kind() const override { return PredictorKind::kKnn; }
  Index input_dim() const override { return x_.cols(); }
  Index k() const noexcept { return k_; }

  // Indices of the k nearest rows, closest first, ties by lower index.
  std::vector<Index> neighbors(const Eigen::Ref<const Vector>& x) const {
    check_dim(x.size());
    std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(x_.rows()));
    for (Index i = 0; i < x_.rows(); ++i)
      dist[static_cast<std::size_t>(i)] = {(x_.row(i).transpose() - x).squaredNorm(), i};
    std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
    std::vector<Index> out(static_cast<std::size_t>(k_));
    for (Index j = 0; j < k_; ++j) out[static_cast<std::size_t>(j)] = dist[static_cast<std::size_t>(j)].second;
    return out;
  }

  double predict(const Eigen::Ref<const Vector>& x) const override {
    double sum = 0.0;
    for (Index i : neighbors(x)) sum += y_(i);
    return sum / static_cast<double>(k_);
  }

 private:
  Matrix x_;
  Vector y_;
  Index k_;
};

inline PredictorPtr knn_fit(Matrix train_x, Vector train_y, Index k) {
  return std::make_shared<KnnRegressor>(std::move(train_x), std::move(train_y), k);
}

// ---------------------------------------------------------------------------
// Regression trees and their bagged ensemble

class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  // Variance-reduction CART over every feature, grown until a node is pure,
  // has fewer than two samples, or has no distinct feature values left.
  static RegressionTree fit(const Matrix& x, const Vector& y, std::vector<Index> rows) {
    RegressionTree tree;
    tree.nodes_.reserve(2 * rows.size());
    tree.grow(x, y, rows, 0, rows.size());
    return tree;
  }

  double predict(const Eigen::Ref<const Vector>& x) const {
    int at = 0;
    while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
      const Node& n = nodes_[static_cast<std::size_t>(at)];
      at = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(at)].value;
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
  }

 private:
  int grow(const Matrix& x, const Vector& y, std::vector<Index>& rows, std::size_t begin,
           std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const std::size_t n = end - begin;

    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = y(rows[i]);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    nodes_[static_cast<std::size_t>(id)].value = sum / static_cast<double>(n);
    if (n < 2 || lo == hi) return id;

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = 0.0;
    std::vector<Index> sorted(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(end));
    const double parent = sum * sum / static_cast<double>(n);
    for (Index f = 0; f < x.cols(); ++f) {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](Index a, Index b) { return x(a, f) < x(b, f); });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += y(sorted[i]);
        const double here = x(sorted[i], f);
        const double next = x(sorted[i + 1], f);
        if (!(here < next)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double mid = 0.5 * (here + next);
          if (!(mid < next)) mid = here;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    const auto first = rows.begin() + static_cast<std::ptrdiff_t>(begin);
    const auto last = rows.begin() + static_cast<std::ptrdiff_t>(end);
    const auto split = std::stable_partition(
        first, last, [&](Index r) { return x(r, best_feature) <= best_threshold; });
    const std::size_t mid = static_cast<std::size_t>(split - rows.begin());

    const int left = grow(x, y, rows, begin, mid);
    const int right = grow(x, y, rows, mid, end);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  std::vector<Node> nodes_;
};

struct TreesOptions {
  Index n_trees = 100;
  std::uint64_t seed = 0;
  bool bootstrap = true;  // resample of size n with replacement per tree
};

class BaggedTrees final : public Predictor {
 public:
  BaggedTrees(const Matrix& x, const Vector& y, const TreesOptions& opts) : dim_(x.cols()) {
    if (x.rows() < 2) throw InvalidInput("trees: need at least 2 training rows");
    if (x.rows() != y.size())
      throw InvalidInput("trees: " + std::to_string(x.rows()) + " rows but " +
                         std::to_string(y.size()) + " targets");
    if (opts.n_trees < 1) throw InvalidInput("trees: n_trees must be at least 1");
    require_finite(x, "tree training features");
    require_finite(y, "tree training targets");

    const auto n = static_cast<std::size_t>(x.rows());
    trees_.reserve(static_cast<std::size_t>(opts.n_trees));
    for (Index t = 0; t < opts.n_trees; ++t) {
      std::vector<Index> rows(n);
      if (opts.bootstrap) {
        CounterRng rng(opts.seed, static_cast<std::uint64_t>(t));
        for (auto& r : rows) r = static_cast<Index>(rng.below(n));
      } else {
        std::iota(rows.begin(), rows.end(), Index{0});
      }
      trees_.push_back(RegressionTree::fit(x, y, std::move(rows)));
    }
  }

  PredictorKind kind() const override { return PredictorKind::kBaggedTrees; }
  Index input_dim() const override { return dim_; }
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

  double predict(const Eigen::Ref<const Vector>& x) const override {
    check_dim(x.size());
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return sum / static_cast<double>(trees_.size());
  }

 private:
  Index dim_;
  std::vector<RegressionTree> trees_;
};

inline PredictorPtr trees_fit(const Matrix& x, const Vector& y, Index n_trees, std::uint64_t seed) {
  return std::make_shared<BaggedTrees>(x, y, TreesOptions{n_trees, seed, true});
}

// ---------------------------------------------------------------------------
// Closed-form functions used by the synthetic experiments

enum class AnalyticFn {
  kLinear7,     // 10x1 - 20x2 - 2x3 + 3x4 + 0x5 + 0x6 + 0x7
  kQuad2,       // -x1^2 + 2x2
  kRing,        // x1^2 + x2^2
  kSign2,       // 0.7 sign(x1) + sign(x2)
  kLambdaHump,  // 15l1 + 22l2 + 0l3 + 40(1-l4) sin(3.14 l4) + 0l5 + 0l6
  kLambdaPoly,  // l1^2 + l1 l2 - l3 l4 + l4
};

inline std::string_view to_string(AnalyticFn fn) {
  switch (fn) {
    case AnalyticFn::kLinear7: return "linear7";
    case AnalyticFn::kQuad2: return "quad2";
    case AnalyticFn::kRing: return "ring";
    case AnalyticFn::kSign2: return "sign2";
    case AnalyticFn::kLambdaHump: return "lambda-hump";
    case AnalyticFn::kLambdaPoly: return "lambda-poly";
  }
  return "unknown";
}

inline AnalyticFn parse_analytic_fn(std::string_view name) {
  for (auto fn : {AnalyticFn::kLinear7, AnalyticFn::kQuad2, AnalyticFn::kRing, AnalyticFn::kSign2,
                  AnalyticFn::kLambdaHump, AnalyticFn::kLambdaPoly}) {
    if (to_string(fn) == name) return fn;
  }
  throw InvalidInput("unknown analytic function '" + std::string(name) + "'");
}

inline double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

class AnalyticPredictor final : public Predictor {
 public:
  explicit AnalyticPredictor(AnalyticFn fn) : fn_(fn) {}

  PredictorKind kind() const override { return PredictorKind::kAnalytic; }
  AnalyticFn fn() const noexcept { return fn_; }

  Index input_dim() const override {
    switch (fn_) {
      case AnalyticFn::kLinear7: return 7;
      case AnalyticFn::kQuad2:
      case AnalyticFn::kRing:
      case AnalyticFn::kSign2: return 2;
      case AnalyticFn::kLambdaHump: return 6;
      case AnalyticFn::kLambdaPoly: return 4;
    }
    return 0;
  }

  double predict(const Eigen::Ref<const Vector>& x) const override {
    check_dim(x.size());
    switch (fn_) {
      case AnalyticFn::kLinear7:
        return 10.0 * x(0) - 20.0 * x(1) - 2.0 * x(2) + 3.0 * x(3);
      case AnalyticFn::kQuad2: return -x(0) * x(0) + 2.0 * x(1);
      case AnalyticFn::kRing: return x(0) * x(0) + x(1) * x(1);
      case AnalyticFn::kSign2: return 0.7 * sign(x(0)) + sign(x(1));
      case AnalyticFn::kLambdaHump:
        return 15.0 * x(0) + 22.0 * x(1) + 40.0 * (1.0 - x(3)) * std::sin(3.14 * x(3));
      case AnalyticFn::kLambdaPoly: return x(0) * x(0) + x(0) * x(1) - x(2) * x(3) + x(3);
    }
    return 0.0;
  }

  // True coefficients when the function is linear, for tests and reports.
  std::optional<Vector> linear_coefficients() const {
    if (fn_ != AnalyticFn::kLinear7) return std::nullopt;
    Vector a(7);
    a << 10, -20, -2, 3, 0, 0, 0;
    return a;
  }

 private:
  AnalyticFn fn_;
};

inline PredictorPtr analytic(AnalyticFn fn) { return std::make_shared<AnalyticPredictor>(fn); }

// ---------------------------------------------------------------------------
// Predictor over dual coordinates: lambda -> f(sum_i lambda_i x*_i).

class DualView final : public Predictor {
 public:
  DualView(PredictorPtr primal, Matrix extremes)
      : primal_(std::move(primal)), extremes_(std::move(extremes)) {}

  PredictorKind kind() const override { return primal_->kind(); }
  Index input_dim() const override { return extremes_.rows(); }

  double predict(const Eigen::Ref<const Vector>& lambda) const override {
    check_dim(lambda.size());
    return primal_->predict(extremes_.transpose() * lambda);
  }

  Vector predict_batch(const Eigen::Ref<const Matrix>& lambdas) const override {
    check_dim(lambdas.cols());
    Matrix primal(lambdas.rows(), extremes_.cols());
    for (Index i = 0; i < lambdas.rows(); ++i)
      primal.row(i) = (extremes_.transpose() * lambdas.row(i).transpose()).transpose();
    return primal_->predict_batch(primal);
  }

 private:
  PredictorPtr primal_;
  Matrix extremes_;
};

}  // namespace dualex
