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

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dualex/errors.hpp"

namespace dualex {

using Vector = Eigen::VectorXd;
// Point collections are stored one point per row.
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

inline void require_finite(const Eigen::Ref<const Matrix>& m, const std::string& what) {
  if (!m.allFinite()) throw InvalidInput(what + " contains non-finite values");
}

inline Vector to_vector(std::span<const double> xs) {
  return Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size()));
}

inline std::vector<double> to_std(const Eigen::Ref<const Vector>& v) {
  return {v.data(), v.data() + v.size()};
}

// Upper bound of the point-set diameter: the diagonal of the bounding box.
inline double bounding_diagonal(const Eigen::Ref<const Matrix>& points) {
  if (points.rows() == 0) return 0.0;
  return (points.colwise().maxCoeff() - points.colwise().minCoeff()).norm();
}

// Geometry tolerance used when callers do not pass one: 1e-8 * (1 + diameter).
inline double default_tolerance(const Eigen::Ref<const Matrix>& points) {
  return 1e-8 * (1.0 + bounding_diagonal(points));
}

}  // namespace dualex
