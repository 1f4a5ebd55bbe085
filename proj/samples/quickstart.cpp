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


// Explain one prediction of a KNN regressor on the ring data and list the
// extreme points that carry the explanation.

#include <cstdio>

#include "dualex/data.hpp"
#include "dualex/dual_explainer.hpp"
#include "dualex/example_explainer.hpp"

int main() {
  using namespace dualex;
  const Dataset train = gen_ring(400, 0.0, 4.0, /*seed=*/0);
  const PredictorPtr knn = knn_fit(train.x, *train.y, 6);

  Vector x0(2);
  x0 << 1.2, -0.4;
  DualConfig cfg;
  cfg.K = 10;
  const DualExplanation e = explain_local(x0, train.x, *knn, cfg);

  std::printf("f(x0) = %.4f, surrogate = %.4f\n", knn->predict(x0), e.primal_model().predict(x0));
  std::printf("a = (%.4f, %.4f), d = %ld extreme points\n", e.a(0), e.a(1), static_cast<long>(e.diagnostics.d));
  const Vector v = abs_contribution_weights(e.b);
  for (Index i = 0; i < e.poly.d(); ++i) {
    const Index src = e.poly.source_indices[static_cast<std::size_t>(i)];
    const Index row = src < cfg.K ? e.neighborhood[static_cast<std::size_t>(src)] : -1;  // -1: x0 itself
    std::printf("  vertex %ld (train row %ld): (%.3f, %.3f) b = %.4f share = %.3f\n", static_cast<long>(i),
                static_cast<long>(row), e.poly.extremes(i, 0), e.poly.extremes(i, 1), e.b(i), v(i));
  }
  for (const auto& w : e.diagnostics.warnings) std::printf("warning: %s\n", w.c_str());
  return 0;
}
