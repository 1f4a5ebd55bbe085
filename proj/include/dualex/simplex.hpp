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

// Uniform sampling on the unit simplex and the map back to primal space.

#include <cstdint>
#include <string>
#include <vector>

#include "dualex/errors.hpp"
#include "dualex/geometry.hpp"
#include "dualex/linalg.hpp"
#include "dualex/random.hpp"

namespace dualex {

// Nonnegative weights summing to one.
struct LambdaVector {
  Vector values;

  Index d() const noexcept { return values.size(); }
  double operator[](Index i) const { return values(i); }
};

class SimplexSampler {
 public:
  SimplexSampler(Index d, std::uint64_t seed, std::uint64_t stream_id = 0)
      : d_(d), rng_(seed, stream_id) {
    if (d < 1) throw InvalidInput("simplex dimension must be at least 1");
  }

  Index d() const noexcept { return d_; }
  std::uint64_t seed() const noexcept { return rng_.seed(); }
  std::uint64_t stream_id() const noexcept { return rng_.stream(); }

  // d unit-rate exponentials normalised by their sum (Dirichlet(1, ..., 1)).
  LambdaVector next() {
    Vector e(d_);
    for (Index i = 0; i < d_; ++i) e(i) = rng_.exponential();
    const double total = e.sum();
    if (!(total > 0.0)) return {Vector::Constant(d_, 1.0 / static_cast<double>(d_))};
    return {e / total};
  }

  std::vector<LambdaVector> sample(Index n) {
    if (n < 1) throw InvalidInput("sample count must be at least 1");
    std::vector<LambdaVector> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) out.push_back(next());
    return out;
  }

 private:
  Index d_;
  CounterRng rng_;
};

// Rows of the result are the sampled vectors.
inline Matrix stack(const std::vector<LambdaVector>& lambdas) {
  if (lambdas.empty()) return {};
  Matrix out(static_cast<Index>(lambdas.size()), lambdas.front().d());
  for (std::size_t j = 0; j < lambdas.size(); ++j) out.row(static_cast<Index>(j)) = lambdas[j].values;
  return out;
}

inline Vector map_to_primal(const Vector& lambda, const Matrix& extremes) {
  if (lambda.size() != extremes.rows())
    throw InvalidInput("lambda has " + std::to_string(lambda.size()) + " entries, polytope has " +
                       std::to_string(extremes.rows()) + " extreme points");
  return extremes.transpose() * lambda;
}

inline Vector map_to_primal(const LambdaVector& lambda, const Polytope& poly) {
  return map_to_primal(lambda.values, poly.extremes);
}

}  // namespace dualex
