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


#include "dualex/dual_explainer.hpp"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "dualex/random.hpp"

namespace dualex {
namespace {

Matrix uniform_points(Index n, Index m, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  CounterRng rng(seed, 0);
  Matrix p(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) p(i, j) = rng.uniform(lo, hi);
  return p;
}

class Recorder final : public Predictor {
 public:
  explicit Recorder(PredictorPtr inner) : inner_(std::move(inner)) {}
  PredictorKind kind() const override { return inner_->kind(); }
  Index input_dim() const override { return inner_->input_dim(); }
  double predict(const Eigen::Ref<const Vector>& x) const override {
    seen.push_back(x);
    return inner_->predict(x);
  }
  mutable std::vector<Vector> seen;

 private:
  PredictorPtr inner_;
};

TEST(DualExplainer, LinearBlackBoxIsRecoveredExactly) {
  const auto f = analytic(AnalyticFn::kLinear7);
  Vector want(7);
  want << 10, -20, -2, 3, 0, 0, 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix x = uniform_points(200, 7, seed);
    DualConfig cfg;
    cfg.K = 20;
    cfg.seed = seed;
    const DualExplanation e = explain_local(x.row(3).transpose(), x, *f, cfg);
    EXPECT_LT((e.a - want).cwiseAbs().maxCoeff(), 1e-6) << "seed " << seed;
    EXPECT_LT(e.diagnostics.fit_residual, 1e-9);
    EXPECT_EQ(e.diagnostics.rank, 7);
  }
}

TEST(DualExplainer, AffineRecoveryReturnsIntercept) {
  Matrix x = uniform_points(100, 2, 3);
  const auto f = analytic(AnalyticFn::kQuad2);
  DualConfig cfg;
  cfg.recovery = RecoveryMode::kAffine;
  const DualExplanation e = explain_local(x.row(0).transpose(), x, *f, cfg);
  EXPECT_EQ(e.primal_model().intercept, e.intercept);
  EXPECT_LT(std::abs(e.a(1) - 2.0), 0.5);
}

TEST(DualExplainer, EveryQueryLiesInsideTheNeighbourhoodHull) {
  const Matrix x = uniform_points(150, 2, 11);
  auto rec = std::make_shared<Recorder>(analytic(AnalyticFn::kRing));
  DualConfig cfg;
  cfg.K = 8;
  cfg.n_lambda = 50;
  Vector x0(2);
  x0 << 0.1, -0.2;
  const DualExplanation e = explain_local(x0, x, *rec, cfg);
  ASSERT_EQ(static_cast<Index>(rec->seen.size()), cfg.n_lambda);
  const PointSet hood = [&] {
    Matrix h(cfg.K + 1, 2);
    for (Index j = 0; j < cfg.K; ++j) h.row(j) = x.row(e.neighborhood[static_cast<std::size_t>(j)]);
    h.row(cfg.K) = x0.transpose();
    return PointSet(h);
  }();
  const Polytope hull = find_extreme_points(hood);
  for (const Vector& q : rec->seen) EXPECT_TRUE(contains(hull, q).inside);
  for (Index j = 0; j < e.lambdas.rows(); ++j) {
    EXPECT_NEAR(e.lambdas.row(j).sum(), 1.0, 1e-12);
    EXPECT_GE(e.lambdas.row(j).minCoeff(), 0.0);
  }
}

TEST(DualExplainer, FarPointBecomesAVertex) {
  const Matrix x = uniform_points(100, 2, 12);
  Vector x0(2);
  x0 << 5.0, 5.0;
  const DualExplanation e = explain_local(x0, x, *analytic(AnalyticFn::kRing), DualConfig{});
  EXPECT_TRUE(e.diagnostics.contains_x0);
  const auto& src = e.poly.source_indices;
  EXPECT_NE(std::find(src.begin(), src.end(), Index{10}), src.end());
}

TEST(DualExplainer, RepeatedPointCollapsesToOneVertex) {
  Matrix x(12, 2);
  x.rowwise() = Eigen::RowVector2d(0.5, -0.5);
  DualConfig cfg;
  const DualExplanation e = explain_local(Vector(x.row(0).transpose()), x, *analytic(AnalyticFn::kRing), cfg);
  EXPECT_EQ(e.diagnostics.d, 1);
  EXPECT_FALSE(e.diagnostics.warnings.empty());
  EXPECT_NEAR(e.a.dot(x.row(0).transpose()), 0.5, 1e-6);
}

TEST(DualExplainer, ConfigErrors) {
  const Matrix x = uniform_points(20, 2, 13);
  const auto f = analytic(AnalyticFn::kRing);
  DualConfig cfg;
  cfg.K = 0;
  EXPECT_THROW(explain_local(Vector::Zero(2), x, *f, cfg), ConfigError);
  cfg.K = 21;
  EXPECT_THROW(explain_local(Vector::Zero(2), x, *f, cfg), ConfigError);
  cfg.K = 19;
  cfg.n_lambda = 2;
  EXPECT_THROW(explain_local(Vector::Zero(2), x, *f, cfg), ConfigError);
  cfg.n_lambda = 30;
  EXPECT_THROW(explain_local(Vector::Zero(3), x, *f, cfg), InvalidInput);
}

TEST(DualExplainer, GlobalOnLinearIsExact) {
  const Matrix x = uniform_points(40, 7, 14);
  DualConfig cfg;
  cfg.n_lambda = 100;
  const DualExplanation e = explain_global(x, *analytic(AnalyticFn::kLinear7), cfg);
  Vector want(7);
  want << 10, -20, -2, 3, 0, 0, 0;
  EXPECT_LT((e.a - want).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_FALSE(e.diagnostics.contains_x0);
}

TEST(DualExplainer, DeterministicForSeedAndStream) {
  const Matrix x = uniform_points(100, 2, 15);
  const auto f = analytic(AnalyticFn::kRing);
  DualConfig cfg;
  cfg.seed = 4;
  cfg.stream = 2;
  const Vector x0 = x.row(7).transpose();
  const auto a = explain_local(x0, x, *f, cfg), b = explain_local(x0, x, *f, cfg);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.lambdas, b.lambdas);
  cfg.stream = 3;
  EXPECT_NE(explain_local(x0, x, *f, cfg).lambdas, a.lambdas);
}

TEST(FeatureImportance, NormalizesAbsoluteValues) {
  Vector a(3);
  a << 2.0, -1.0, 1.0;
  const Vector n = feature_importance(a, ImportanceMode::kNormalized);
  EXPECT_DOUBLE_EQ(n(0), 0.5);
  EXPECT_DOUBLE_EQ(n(1), 0.25);
  EXPECT_EQ(feature_importance(a, ImportanceMode::kSigned), a);
  std::vector<std::string> w;
  const Vector u = feature_importance(Vector::Zero(4), ImportanceMode::kNormalized, &w);
  EXPECT_DOUBLE_EQ(u(2), 0.25);
  EXPECT_EQ(w.size(), 1u);
}

}  // namespace
}  // namespace dualex
