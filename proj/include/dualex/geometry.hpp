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
 * @file geometry.hpp
 * @brief Convex-hull predicates over finite point sets.
 *
 * Hulls are never enumerated facet by facet. Everything reduces to the
 * least-distance problem
 *
 *     min_w || sum_j w_j p_j - q ||^2   s.t.  w >= 0, sum_j w_j = 1,
 *
 * solved by conditional gradient with away steps. A point is extreme iff its
 * distance to the hull of the remaining points exceeds the tolerance.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "dualex/errors.hpp"
#include "dualex/linalg.hpp"
#include "dualex/random.hpp"

namespace dualex {

class PointSet {
 public:
  explicit PointSet(Matrix points) : points_(std::move(points)) {
    if (points_.rows() < 1) throw InvalidInput("point set must contain at least one point");
    if (points_.cols() < 1) throw InvalidInput("points must have at least one coordinate");
    require_finite(points_, "point set");
  }

  Index count() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }
  const Matrix& points() const noexcept { return points_; }
  auto point(Index i) const { return points_.row(i); }

 private:
  Matrix points_;
};

struct Polytope {
  Matrix extremes;                    // d x m, one extreme point per row
  std::vector<Index> source_indices;  // row of each extreme in the input set
  bool contains_x0 = false;           // the explained point is one of the vertices
  double tol = 0.0;

  Index d() const noexcept { return extremes.rows(); }
  Index dim() const noexcept { return extremes.cols(); }
};

struct HullProjection {
  Vector weights;  // simplex vector over the reference points
  Vector image;    // sum_j weights_j p_j
  double distance = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

enum class HullDecision { kInside, kOutside, kUndecided };

// Conditional gradient with away steps and exact line search. In decision
// mode the loop stops as soon as the distance is certified to be <= tol or
// > tol; otherwise it runs until the duality gap bounds the distance error
// by tol.
struct FrankWolfeResult {
  HullProjection projection;
  HullDecision decision = HullDecision::kUndecided;
};

// Wolfe's minimum-norm-point method on the translated set refs - query.
// Finite and exact up to rounding; used when conditional gradient stalls.
inline HullProjection min_norm_point(const Eigen::Ref<const Vector>& query, const Eigen::Ref<const Matrix>& refs) {
  const Index k = refs.rows();
  const Matrix p = refs.rowwise() - query.transpose();
  const double scale = std::max(1.0, p.rowwise().squaredNorm().maxCoeff());
  const double eps = 1e-13 * scale;

  Index start = 0;
  p.rowwise().squaredNorm().minCoeff(&start);
  std::vector<Index> corral{start};
  std::vector<double> weight{1.0};
  Vector x = p.row(start).transpose();
  int it = 0;
  const int max_iter = static_cast<int>(20 * k + 200);

  for (; it < max_iter; ++it) {
    Index j = 0;
    const Vector dots = p * x;
    dots.minCoeff(&j);
    if (dots(j) >= x.squaredNorm() - eps) break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
    corral.push_back(j);
    weight.push_back(0.0);

    for (; it < max_iter; ++it) {
      const auto c = static_cast<Index>(corral.size());
      Matrix kkt = Matrix::Zero(c + 1, c + 1);
      for (Index a = 0; a < c; ++a) {
        for (Index b = 0; b < c; ++b)
          kkt(a, b) = p.row(corral[static_cast<std::size_t>(a)]).dot(p.row(corral[static_cast<std::size_t>(b)]));
        kkt(a, c) = 1.0;
        kkt(c, a) = 1.0;
      }
      Vector rhs = Vector::Zero(c + 1);
      rhs(c) = 1.0;
      const Vector alpha = kkt.completeOrthogonalDecomposition().solve(rhs).head(c);

      if ((alpha.array() > 1e-15).all()) {
        for (Index a = 0; a < c; ++a) weight[static_cast<std::size_t>(a)] = alpha(a);
        break;
      }
      double theta = 1.0;
      for (Index a = 0; a < c; ++a) {
        const double w = weight[static_cast<std::size_t>(a)];
        if (alpha(a) <= 1e-15 && w - alpha(a) > 0.0) theta = std::min(theta, w / (w - alpha(a)));
      }
      std::vector<Index> next;
      std::vector<double> next_w;
      for (Index a = 0; a < c; ++a) {
        const double w = theta * alpha(a) + (1.0 - theta) * weight[static_cast<std::size_t>(a)];
        if (w > 1e-15) {
          next.push_back(corral[static_cast<std::size_t>(a)]);
          next_w.push_back(w);
        }
      }
      if (next.empty()) {
        next.push_back(corral.back());
        next_w.push_back(1.0);
      }
      corral = std::move(next);
      weight = std::move(next_w);
      const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
      for (auto& w : weight) w /= total;
    }
    x.setZero();
    for (std::size_t a = 0; a < corral.size(); ++a) x += weight[a] * p.row(corral[a]).transpose();
  }

  HullProjection out;
  out.weights = Vector::Zero(k);
  for (std::size_t a = 0; a < corral.size(); ++a) out.weights(corral[a]) = weight[a];
  out.image = refs.transpose() * out.weights;
  out.distance = (out.image - query).norm();
  out.iterations = it;
  out.converged = it < max_iter;
  return out;
}

inline FrankWolfeResult frank_wolfe(const Eigen::Ref<const Vector>& query,
                                    const Eigen::Ref<const Matrix>& refs, int max_iter, double tol,
                                    bool decision_mode, std::vector<double>* objective_trace) {
  const Index k = refs.rows();
  FrankWolfeResult out;
  Vector lambda = Vector::Zero(k);

  Index start = 0;
  (refs.rowwise() - query.transpose()).rowwise().squaredNorm().minCoeff(&start);
  lambda(start) = 1.0;
  Vector x = refs.row(start).transpose();

  Vector grad(k);
  int it = 0;
  for (;; ++it) {
    const Vector r = x - query;
    const double rr = r.squaredNorm();
    if (objective_trace != nullptr) objective_trace->push_back(0.5 * rr);

    grad.noalias() = refs * r;
    Index s = 0;
    grad.minCoeff(&s);
    const double g_lambda = lambda.dot(grad);
    const double fw_gap = std::max(0.0, g_lambda - grad(s));

    const double dist = std::sqrt(rr);
    const double lower = std::sqrt(std::max(0.0, rr - 2.0 * fw_gap));

    if (decision_mode) {
      if (dist <= tol) {
        out.decision = HullDecision::kInside;
        out.projection.converged = true;
        break;
      }
      if (lower > tol) {
        out.decision = HullDecision::kOutside;
        out.projection.converged = true;
        break;
      }
    } else if (dist - lower <= tol) {
      out.projection.converged = true;
      break;
    }
    if (it >= max_iter) break;

    // Away vertex: largest gradient among active atoms.
    Index v = -1;
    double g_away = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < k; ++j) {
      if (lambda(j) > 0.0 && grad(j) > g_away) {
        g_away = grad(j);
        v = j;
      }
    }
    const double away_gap = g_away - g_lambda;

    Vector dir;
    double step_max = 1.0;
    const bool toward = fw_gap >= away_gap || lambda(v) >= 1.0;
    if (toward) {
      dir = refs.row(s).transpose() - x;
    } else {
      dir = x - refs.row(v).transpose();
      step_max = lambda(v) / (1.0 - lambda(v));
    }
    const double dd = dir.squaredNorm();
    if (dd <= 0.0) {
      out.projection.converged = true;
      break;
    }
    const double step = std::clamp(-r.dot(dir) / dd, 0.0, step_max);
    if (step <= 0.0) {
      // No descent possible along either direction: stationary.
      out.projection.converged = true;
      break;
    }
    if (toward) {
      lambda *= (1.0 - step);
      lambda(s) += step;
    } else {
      lambda *= (1.0 + step);
      lambda(v) -= step;
      if (step >= step_max) lambda(v) = 0.0;
    }
    x += step * dir;
    if ((it + 1) % 64 == 0) x.noalias() = refs.transpose() * lambda;
  }

  lambda = lambda.cwiseMax(0.0);
  lambda /= lambda.sum();
  out.projection.weights = std::move(lambda);
  out.projection.image = refs.transpose() * out.projection.weights;
  out.projection.distance = (out.projection.image - query).norm();
  out.projection.iterations = it;
  if (decision_mode && out.decision == HullDecision::kUndecided) {
    HullProjection exact = min_norm_point(query, refs);
    if (exact.distance < out.projection.distance) out.projection = std::move(exact);
    out.decision = out.projection.distance <= tol ? HullDecision::kInside : HullDecision::kOutside;
  }
  return out;
}

inline Matrix drop_row(const Eigen::Ref<const Matrix>& m, Index row) {
  Matrix out(m.rows() - 1, m.cols());
  out.topRows(row) = m.topRows(row);
  out.bottomRows(m.rows() - row - 1) = m.bottomRows(m.rows() - row - 1);
  return out;
}

inline Matrix gather_rows(const Eigen::Ref<const Matrix>& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

// Indices of the first representative of each tol-cluster of duplicates,
// in increasing order.
inline std::vector<Index> unique_representatives(const Eigen::Ref<const Matrix>& points, double tol) {
  std::vector<Index> kept;
  for (Index i = 0; i < points.rows(); ++i) {
    bool duplicate = false;
    for (Index j : kept) {
      if ((points.row(i) - points.row(j)).norm() <= tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(i);
  }
  return kept;
}

inline constexpr Index kBruteForceLimit = 64;
inline constexpr int kDecisionMaxIter = 4000;

// Per-point definition applied literally: O(n) projections onto n-1 points.
inline std::vector<Index> extremes_brute_force(const Eigen::Ref<const Matrix>& pts, double tol) {
  std::vector<Index> out;
  if (pts.rows() <= 2) {
    for (Index i = 0; i < pts.rows(); ++i) out.push_back(i);
    return out;
  }
  for (Index i = 0; i < pts.rows(); ++i) {
    const Matrix others = drop_row(pts, i);
    const auto res = frank_wolfe(pts.row(i).transpose(), others, kDecisionMaxIter, tol, true, nullptr);
    if (res.decision == HullDecision::kOutside) out.push_back(i);
  }
  return out;
}

// Large sets: seed candidates with maxima along random directions, sweep the
// remaining points from the outside in and admit any point not covered by the
// current candidates, then drop candidates covered by the others.
inline std::vector<Index> extremes_accelerated(const Eigen::Ref<const Matrix>& pts, double tol) {
  const Index n = pts.rows();
  const Index m = pts.cols();
  if (n == 0) return {};
  std::vector<char> candidate(static_cast<std::size_t>(n), 0);

  CounterRng rng(0x5eed'face'd00dULL, 0);
  const Index directions = 16 * m + 64;
  Vector dir(m);
  for (Index t = 0; t < directions; ++t) {
    for (Index c = 0; c < m; ++c) dir(c) = rng.normal();
    Index best = 0;
    (pts * dir).maxCoeff(&best);
    if (best >= 0 && best < n) candidate[static_cast<std::size_t>(best)] = 1;
  }

  const Vector centroid = pts.colwise().mean().transpose();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector spread = (pts.rowwise() - centroid.transpose()).rowwise().squaredNorm();
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return spread(a) > spread(b); });

  std::vector<Index> current;
  for (Index i = 0; i < n; ++i)
    if (candidate[static_cast<std::size_t>(i)]) current.push_back(i);
  Matrix hull = gather_rows(pts, current);

  for (Index i : order) {
    if (candidate[static_cast<std::size_t>(i)]) continue;
    const auto res = frank_wolfe(pts.row(i).transpose(), hull, kDecisionMaxIter, tol, true, nullptr);
    if (res.decision == HullDecision::kOutside) {
      candidate[static_cast<std::size_t>(i)] = 1;
      current.push_back(i);
      hull.conservativeResize(hull.rows() + 1, Eigen::NoChange);
      hull.row(hull.rows() - 1) = pts.row(i);
    }
  }

  std::sort(current.begin(), current.end());
  const std::vector<Index> verified = extremes_brute_force(gather_rows(pts, current), tol);
  std::vector<Index> out;
  out.reserve(verified.size());
  for (Index v : verified) out.push_back(current[static_cast<std::size_t>(v)]);
  return out;
}

}  // namespace detail

/// Least-distance projection of `query` onto conv(refs). The returned
/// distance is within `tol` of the exact one when `converged` is set.
inline HullProjection project_onto_hull(const Vector& query, const PointSet& refs,
                                        int max_iter = 2000, double tol = 0.0,
                                        std::vector<double>* objective_trace = nullptr) {
  if (query.size() != refs.dim())
    throw InvalidInput("query has " + std::to_string(query.size()) + " coordinates, expected " +
                       std::to_string(refs.dim()));
  require_finite(query, "query");
  if (tol < 0.0 || !std::isfinite(tol)) throw InvalidInput("tolerance must be finite and >= 0");
  if (tol == 0.0) tol = default_tolerance(refs.points());
  return detail::frank_wolfe(query, refs.points(), max_iter, tol, false, objective_trace).projection;
}

/// Extreme points of a finite set. Duplicates within `tol` collapse onto the
/// lowest index first; `tol <= 0` selects default_tolerance(points).
inline Polytope find_extreme_points(const PointSet& points, double tol = 0.0) {
  if (!std::isfinite(tol)) throw InvalidInput("tolerance must be finite");
  if (tol <= 0.0) tol = default_tolerance(points.points());

  const std::vector<Index> reps = detail::unique_representatives(points.points(), tol);
  const Matrix unique = detail::gather_rows(points.points(), reps);
  const std::vector<Index> local = static_cast<Index>(reps.size()) <= detail::kBruteForceLimit
                                       ? detail::extremes_brute_force(unique, tol)
                                       : detail::extremes_accelerated(unique, tol);

  Polytope poly;
  poly.tol = tol;
  poly.source_indices.reserve(local.size());
  for (Index i : local) poly.source_indices.push_back(reps[static_cast<std::size_t>(i)]);
  poly.extremes = detail::gather_rows(points.points(), poly.source_indices);
  return poly;
}

struct Containment {
  bool inside = false;
  HullProjection projection;  // witness weights over poly.extremes
};

inline Containment contains(const Polytope& poly, const Vector& query, double tol = 0.0) {
  if (poly.d() < 1) throw InvalidInput("polytope has no extreme points");
  if (query.size() != poly.dim())
    throw InvalidInput("query has " + std::to_string(query.size()) + " coordinates, polytope has " +
                       std::to_string(poly.dim()));
  require_finite(query, "query");
  if (tol <= 0.0) tol = poly.tol > 0.0 ? poly.tol : default_tolerance(poly.extremes);
  Containment out;
  const auto res = detail::frank_wolfe(query, poly.extremes, detail::kDecisionMaxIter, tol, true, nullptr);
  out.projection = res.projection;
  out.inside = res.decision == detail::HullDecision::kInside;
  return out;
}

}  // namespace dualex
