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


#include "dualex/example_explainer.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "dualex/simplex.hpp"

namespace dualex {
namespace {

Matrix dirichlet(Index d, Index n, std::uint64_t seed) {
  SimplexSampler s(d, seed);
  return stack(s.sample(n));
}

class Fn final : public Predictor {
 public:
  using F = double (*)(const Eigen::Ref<const Vector>&);
  Fn(Index d, F f) : d_(d), f_(f) {}
  PredictorKind kind() const override { return PredictorKind::kAnalytic; }
  Index input_dim() const override { return d_; }
  double predict(const Eigen::Ref<const Vector>& x) const override { return f_(x); }

 private:
  Index d_;
  F f_;
};

// Identity subnet (hidden = 1) scaled by c.
void set_linear_subnet(AdditiveNet& net, Index k, double c) {
  net.params()(net.w1_offset(k)) = 1.0;
  net.params()(net.w2_offset(k)) = 1.0;
  net.params()(net.w3_offset(k)) = c;
}

TEST(ContributionWeights, HandExamples) {
  Vector b(2);
  b << 3.0, -1.0;
  const Vector v = contribution_weights(b);
  EXPECT_DOUBLE_EQ(v(0), 1.5);
  EXPECT_DOUBLE_EQ(v(1), -0.5);
  const Vector w = abs_contribution_weights(b);
  EXPECT_DOUBLE_EQ(w(0), 0.75);
  EXPECT_DOUBLE_EQ(w(1), 0.25);
  b << 1.0, -1.0;
  EXPECT_THROW(contribution_weights(b), DegenerateError);
  EXPECT_THROW(abs_contribution_weights(Vector::Zero(2)), DegenerateError);
}

TEST(ExplainingInstance, TriangleAndLinearity) {
  Polytope tri;
  tri.extremes.resize(3, 2);
  tri.extremes << 0, 0, 2, 0, 0, 4;
  Vector v(3);
  v << 0.5, 0.25, 0.25;
  const Vector x = explaining_instance(v, tri);
  EXPECT_DOUBLE_EQ(x(0), 0.5);
  EXPECT_DOUBLE_EQ(x(1), 1.0);
  Vector u(3);
  u << -1.0, 2.0, 0.0;
  const Vector lhs = explaining_instance(2.0 * v + 3.0 * u, tri);
  const Vector rhs = 2.0 * explaining_instance(v, tri) + 3.0 * explaining_instance(u, tri);
  EXPECT_LT((lhs - rhs).norm(), 1e-12);
  EXPECT_THROW(explaining_instance(Vector::Ones(2), tri), InvalidInput);
}

TEST(DeviationImportance, SampleStdAndInvariances) {
  EXPECT_NEAR(deviation_importance(std::vector<double>{0.0, 1.0}), std::sqrt(0.5), 1e-15);
  Vector h(5);
  h << 1.0, -2.0, 0.5, 3.0, 0.0;
  const double base = deviation_importance(h);
  EXPECT_NEAR(deviation_importance(Vector(h.array() + 7.0)), base, 1e-12);
  EXPECT_NEAR(deviation_importance(Vector(-3.0 * h)), 3.0 * base, 1e-12);
  EXPECT_THROW(deviation_importance(std::vector<double>{1.0}), InvalidInput);
}

TEST(Quantile, MatchesLinearInterpolation) {
  const std::vector<double> s = {1.0, 2.0, 4.0, 8.0};
  EXPECT_DOUBLE_EQ(detail::quantile_sorted(s, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(detail::quantile_sorted(s, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(detail::quantile_sorted(s, 1.0), 8.0);
}

TEST(Ale, IgnoredCoordinateIsFlat) {
  const Matrix l = dirichlet(6, 2000, 1);
  const auto f = analytic(AnalyticFn::kLambdaHump);
  std::vector<AleCurve> curves;
  const ExampleImportance imp = ale_importance(l, *f, 20, AleProbe::kStandard, &curves);
  ASSERT_EQ(curves.size(), 6u);
  EXPECT_LT(imp.raw(2), 1e-12);
  EXPECT_LE(imp.normalized(4), 0.02);
  EXPECT_GT(imp.normalized(3), imp.normalized(0));
  for (const auto& c : curves) {
    double weighted = 0.0;
    for (Index b = 0; b < c.bins(); ++b) {
      EXPECT_GE(c.bin_counts[static_cast<std::size_t>(b)], 2);
      weighted += c.centered_effects(b) * static_cast<double>(c.bin_counts[static_cast<std::size_t>(b)]);
    }
    EXPECT_NEAR(weighted, 0.0, 1e-9);
  }
}

TEST(Ale, AdditiveFunctionGivesEdgeAverages) {
  const Matrix l = dirichlet(6, 1000, 2);
  const auto f = analytic(AnalyticFn::kLambdaHump);
  const AleCurve c = ale_curve(l, *f, 3);
  auto g = [](double t) { return 40.0 * (1.0 - t) * std::sin(3.14 * t); };
  for (Index b = 0; b + 1 < c.bins(); ++b) {
    const double want = 0.5 * (g(c.bin_edges(b + 2)) - g(c.bin_edges(b)));
    EXPECT_NEAR(c.centered_effects(b + 1) - c.centered_effects(b), want, 1e-9);
  }
}

TEST(Ale, RenormalizedProbeOnTwoCoordinates) {
  const Matrix l = dirichlet(2, 400, 3);
  Fn f(2, [](const Eigen::Ref<const Vector>& x) { return 5.0 * x(0) + 2.0 * x(1); });
  const AleCurve c = ale_curve(l, f, 0, 10, AleProbe::kRenormalize);
  const Vector centers = c.centers();
  for (Index b = 0; b + 1 < c.bins(); ++b) {
    EXPECT_NEAR((c.centered_effects(b + 1) - c.centered_effects(b)) / (centers(b + 1) - centers(b)), 3.0, 1e-9);
  }
}

TEST(Ale, ConstantCoordinateWarns) {
  Matrix l = dirichlet(3, 50, 4);
  l.col(2).setConstant(0.0);
  Fn g(3, [](const Eigen::Ref<const Vector>& x) { return x(0); });
  const AleCurve c = ale_curve(l, g, 2);
  EXPECT_EQ(c.bins(), 1);
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_NE(c.warnings[0].find("constant"), std::string::npos);
  EXPECT_THROW(ale_curve(l, g, 3), InvalidInput);
}

TEST(LrImportance, LinearTargets) {
  const Matrix l = dirichlet(3, 500, 5);
  Vector b(3);
  b << 2.0, -1.0, 0.0;
  Vector coef;
  const ExampleImportance imp = lr_importance(l, l * b, kDefaultRidge, &coef);
  EXPECT_LT((coef - b).norm(), 1e-6);
  EXPECT_NEAR(imp.raw(0), deviation_importance(Vector(2.0 * l.col(0))), 1e-6);
  EXPECT_NEAR(imp.normalized(2), 0.0, 1e-6);
  EXPECT_NEAR(imp.normalized.sum(), 1.0, 1e-12);
}

TEST(MakeImportance, AllZeroGivesUniform) {
  const ExampleImportance imp = make_importance(ExampleMethod::kNam, Vector::Zero(4));
  EXPECT_DOUBLE_EQ(imp.normalized(1), 0.25);
  ASSERT_EQ(imp.warnings.size(), 1u);
  EXPECT_STREQ(to_string(ExampleMethod::kAle), "ALE");
}

TEST(GaugeShift, RemovesPureGaugeComponent) {
  const Matrix l = dirichlet(4, 300, 6);
  AdditiveNet net = AdditiveNet::zeros(4, 1);
  for (Index k = 0; k < 4; ++k) set_linear_subnet(net, k, -2.0);
  double shift = 0.0;
  const ExampleImportance imp = nam_importance(net, l, true, &shift);
  EXPECT_NEAR(shift, 2.0, 1e-6);
  EXPECT_LT(imp.raw.sum(), 1e-5);
  const ExampleImportance raw = nam_importance(net, l, false);
  EXPECT_NEAR(raw.normalized(0), 0.25, 0.05);
  EXPECT_GT(raw.raw.sum(), 0.1);
}

TEST(GaugeShift, KeepsGenuineSignal) {
  const Matrix l = dirichlet(3, 300, 7);
  AdditiveNet net = AdditiveNet::zeros(3, 1);
  set_linear_subnet(net, 0, 5.0);
  double shift = 0.0;
  const ExampleImportance imp = nam_importance(net, l, true, &shift);
  EXPECT_GT(imp.normalized(0), 0.5);
  const Vector grid = uniform_grid(11);
  const ShapeTable t = gauge_fixed_shapes(net, grid, shift);
  EXPECT_NEAR(t.values.col(1).mean(), 0.0, 1e-12);
  EXPECT_NEAR(t.values(10, 0) - t.values(0, 0), 5.0 + shift, 1e-9);
}

}  // namespace
}  // namespace dualex
