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

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dualex/linalg.hpp"
#include "dualex/nam.hpp"

namespace oracle {

using dualex::Index;
using dualex::Matrix;
using dualex::Vector;

inline double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain. Returns the indices of strict hull vertices
// (collinear boundary points dropped), sorted ascending. Duplicates keep the
// lowest index.
inline std::vector<Index> monotone_chain(const Matrix& pts) {
  const Index n = pts.rows();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    if (pts(a, 0) != pts(b, 0)) return pts(a, 0) < pts(b, 0);
    return pts(a, 1) < pts(b, 1);
  });
  std::vector<Index> uniq;
  for (Index i : idx)
    if (uniq.empty() || pts.row(uniq.back()) != pts.row(i)) uniq.push_back(i);
  if (uniq.size() <= 2) {
    std::sort(uniq.begin(), uniq.end());
    return uniq;
  }
  auto p = [&](Index i) { return Eigen::Vector2d(pts(i, 0), pts(i, 1)); };
  std::vector<Index> hull(2 * uniq.size());
  std::size_t k = 0;
  for (Index i : uniq) {
    while (k >= 2 && cross(p(hull[k - 2]), p(hull[k - 1]), p(i)) <= 0) --k;
    hull[k++] = i;
  }
  for (std::size_t t = uniq.size() - 1, lo = k + 1; t-- > 0;) {
    const Index i = uniq[t];
    while (k >= lo && cross(p(hull[k - 2]), p(hull[k - 1]), p(i)) <= 0) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  std::sort(hull.begin(), hull.end());
  return hull;
}

// Vertices of the hull in counter-clockwise order (for polygon oracles).
inline std::vector<Eigen::Vector2d> ccw_polygon(const Matrix& pts) {
  const std::vector<Index> v = monotone_chain(pts);
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (Index i : v) c += Eigen::Vector2d(pts(i, 0), pts(i, 1));
  c /= static_cast<double>(v.size());
  std::vector<Eigen::Vector2d> poly;
  for (Index i : v) poly.emplace_back(pts(i, 0), pts(i, 1));
  std::sort(poly.begin(), poly.end(), [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  return poly;
}

inline double point_segment_distance(const Eigen::Vector2d& q, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - q).norm();
}

// Even-odd ray casting.
inline bool ray_cast_inside(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& q) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > q.y()) != (b.y() > q.y()) && q.x() < (b.x() - a.x()) * (q.y() - a.y()) / (b.y() - a.y()) + a.x())
      inside = !inside;
  }
  return inside;
}

// Euclidean distance from q to a convex polygon (0 inside).
inline double polygon_distance(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& q) {
  if (poly.size() >= 3 && ray_cast_inside(poly, q)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    best = std::min(best, point_segment_distance(q, poly[i], poly[(i + 1) % poly.size()]));
  return best;
}

// Full stable sort by (distance, index).
inline std::vector<Index> knn_sorted(const Matrix& x, const Vector& q, Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::vector<double> d(idx.size());
  for (Index i = 0; i < x.rows(); ++i) d[static_cast<std::size_t>(i)] = (x.row(i).transpose() - q).squaredNorm();
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)];
  });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

// Weighted ridge least squares through the normal equations.
inline Vector normal_equations(const Matrix& a, const Vector& t, const Vector& w, double ridge, bool intercept) {
  Matrix design = a;
  if (intercept) {
    design.conservativeResize(Eigen::NoChange, a.cols() + 1);
    design.col(a.cols()).setOnes();
  }
  Matrix lhs = design.transpose() * w.asDiagonal() * design;
  for (Index j = 0; j < a.cols(); ++j) lhs(j, j) += ridge;
  const Vector rhs = design.transpose() * (w.asDiagonal() * t);
  return lhs.ldlt().solve(rhs);
}

// Scalar-loop forward pass of one subnetwork.
inline double naive_subnet(const dualex::AdditiveNet& net, Index k, double v) {
  const Index H = net.hidden();
  const Vector& p = net.params();
  std::vector<double> a1(static_cast<std::size_t>(H)), a2(static_cast<std::size_t>(H));
  for (Index i = 0; i < H; ++i)
    a1[static_cast<std::size_t>(i)] = std::max(0.0, p(net.w1_offset(k) + i) * v + p(net.b1_offset(k) + i));
  for (Index i = 0; i < H; ++i) {
    double s = p(net.b2_offset(k) + i);
    for (Index j = 0; j < H; ++j) s += p(net.w2_offset(k) + j * H + i) * a1[static_cast<std::size_t>(j)];
    a2[static_cast<std::size_t>(i)] = std::max(0.0, s);
  }
  double out = p(net.b3_offset(k));
  for (Index i = 0; i < H; ++i) out += p(net.w3_offset(k) + i) * a2[static_cast<std::size_t>(i)];
  return out;
}

inline double naive_loss(const dualex::AdditiveNet& net, const Matrix& lambdas, const Vector& z, double alpha) {
  double loss = 0.0;
  for (Index i = 0; i < lambdas.rows(); ++i) {
    double f = 0.0;
    for (Index k = 0; k < net.d(); ++k) f += naive_subnet(net, k, lambdas(i, k));
    loss += (z(i) - f) * (z(i) - f);
  }
  double w2 = 0.0;
  const Index H = net.hidden();
  for (Index k = 0; k < net.d(); ++k) {
    for (Index i = 0; i < H; ++i) w2 += std::pow(net.params()(net.w1_offset(k) + i), 2);
    for (Index i = 0; i < H * H; ++i) w2 += std::pow(net.params()(net.w2_offset(k) + i), 2);
    for (Index i = 0; i < H; ++i) w2 += std::pow(net.params()(net.w3_offset(k) + i), 2);
  }
  return loss + alpha * w2;
}

}  // namespace oracle
