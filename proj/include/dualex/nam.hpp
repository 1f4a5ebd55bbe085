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
 * @file nam.hpp
 * @brief Neural additive model over dual coordinates.
 *
 * d independent subnetworks 1 -> H -> H -> 1 (ReLU hidden layers, linear
 * output), one per simplex coordinate; the model output is the sum of the d
 * shape functions h_k(lambda_k). Training minimises
 *
 *     sum_i (z_i - sum_k h_k(lambda_ik))^2 + alpha |w|^2
 *
 * over mini-batches with Adam, where w are the weights (biases are not
 * penalised).
 *
 * Parameters live in one flat vector; subnetwork k owns the slice
 * [k * P, (k + 1) * P) with P = H + H + H*H + H + H + 1 laid out as
 *
 *     W1 (H x 1) | b1 (H) | W2 (H x H, column-major) | b2 (H) | W3 (1 x H) | b3
 */

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dualex/errors.hpp"
#include "dualex/linalg.hpp"
#include "dualex/random.hpp"

namespace dualex {

class AdditiveNet {
 public:
  static constexpr Index kDefaultHidden = 64;

  // Fan-in scaled uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
  AdditiveNet(Index d, std::uint64_t seed, Index hidden = kDefaultHidden) : d_(d), hidden_(hidden) {
    if (d < 1) throw InvalidInput("additive net needs at least one subnetwork");
    if (hidden < 1) throw InvalidInput("hidden width must be positive");
    params_ = Vector::Zero(parameter_count());
    CounterRng rng(seed, 0);
    const double b1 = std::sqrt(6.0);
    const double bh = std::sqrt(6.0 / static_cast<double>(hidden_));
    for (Index k = 0; k < d_; ++k) {
      for (Index i = 0; i < hidden_; ++i) params_(w1_offset(k) + i) = rng.uniform(-b1, b1);
      for (Index i = 0; i < hidden_ * hidden_; ++i) params_(w2_offset(k) + i) = rng.uniform(-bh, bh);
      for (Index i = 0; i < hidden_; ++i) params_(w3_offset(k) + i) = rng.uniform(-bh, bh);
    }
  }

  static AdditiveNet zeros(Index d, Index hidden = kDefaultHidden) {
    AdditiveNet net(d, 0, hidden);
    net.params_.setZero();
    return net;
  }

  Index d() const noexcept { return d_; }
  Index hidden() const noexcept { return hidden_; }
  Index per_subnet() const noexcept { return 4 * hidden_ + hidden_ * hidden_ + 1; }
  Index parameter_count() const noexcept { return d_ * per_subnet(); }

  Vector& params() noexcept { return params_; }
  const Vector& params() const noexcept { return params_; }

  Index w1_offset(Index k) const noexcept { return k * per_subnet(); }
  Index b1_offset(Index k) const noexcept { return w1_offset(k) + hidden_; }
  Index w2_offset(Index k) const noexcept { return b1_offset(k) + hidden_; }
  Index b2_offset(Index k) const noexcept { return w2_offset(k) + hidden_ * hidden_; }
  Index w3_offset(Index k) const noexcept { return b2_offset(k) + hidden_; }
  Index b3_offset(Index k) const noexcept { return w3_offset(k) + hidden_; }

  // Mask selecting weights (1) versus biases (0), for the L2 term.
  Vector weight_mask() const {
    Vector mask = Vector::Zero(parameter_count());
    for (Index k = 0; k < d_; ++k) {
      mask.segment(w1_offset(k), hidden_).setOnes();
      mask.segment(w2_offset(k), hidden_ * hidden_).setOnes();
      mask.segment(w3_offset(k), hidden_).setOnes();
    }
    return mask;
  }

  // h_k evaluated at each entry of `values`.
  Vector subnet(Index k, const Eigen::Ref<const Vector>& values) const {
    Workspace ws;
    forward_subnet(k, values, ws);
    return ws.out;
  }

  double shape(Index k, double value) const {
    Vector v(1);
    v(0) = value;
    return subnet(k, v)(0);
  }

  // n x d matrix of h_k(lambda_ik).
  Matrix shapes(const Eigen::Ref<const Matrix>& lambdas) const {
    check_cols(lambdas.cols());
    Matrix out(lambdas.rows(), d_);
    for (Index k = 0; k < d_; ++k) out.col(k) = subnet(k, lambdas.col(k));
    return out;
  }

  // Model output; per-coordinate values go to `shape_values` when given.
  double forward(const Eigen::Ref<const Vector>& lambda, Vector* shape_values = nullptr) const {
    check_cols(lambda.size());
    Vector h(d_);
    for (Index k = 0; k < d_; ++k) h(k) = shape(k, lambda(k));
    double total = 0.0;
    for (Index k = 0; k < d_; ++k) total += h(k);
    if (shape_values != nullptr) *shape_values = std::move(h);
    return total;
  }

  Vector predict(const Eigen::Ref<const Matrix>& lambdas) const {
    const Matrix h = shapes(lambdas);
    Vector out(lambdas.rows());
    for (Index i = 0; i < lambdas.rows(); ++i) {
      double total = 0.0;
      for (Index k = 0; k < d_; ++k) total += h(i, k);
      out(i) = total;
    }
    return out;
  }

  struct Workspace {
    Matrix z1, a1, z2, a2;
    Vector out;
  };

  void forward_subnet(Index k, const Eigen::Ref<const Vector>& x, Workspace& ws) const {
    const Index H = hidden_;
    Eigen::Map<const Vector> w1(params_.data() + w1_offset(k), H);
    Eigen::Map<const Vector> b1(params_.data() + b1_offset(k), H);
    Eigen::Map<const Matrix> w2(params_.data() + w2_offset(k), H, H);
    Eigen::Map<const Vector> b2(params_.data() + b2_offset(k), H);
    Eigen::Map<const Vector> w3(params_.data() + w3_offset(k), H);
    const double b3 = params_(b3_offset(k));

    ws.z1.noalias() = w1 * x.transpose();
    ws.z1.colwise() += b1;
    ws.a1 = ws.z1.cwiseMax(0.0);
    ws.z2.noalias() = w2 * ws.a1;
    ws.z2.colwise() += b2;
    ws.a2 = ws.z2.cwiseMax(0.0);
    ws.out.noalias() = ws.a2.transpose() * w3;
    ws.out.array() += b3;
  }

  // Accumulates d(loss)/d(params of subnet k) into grad given
  // d(loss)/d(h_k) per sample.
  void backward_subnet(Index k, const Eigen::Ref<const Vector>& x, const Workspace& ws,
                       const Vector& d_out, Vector& grad) const {
    const Index H = hidden_;
    Eigen::Map<const Matrix> w2(params_.data() + w2_offset(k), H, H);
    Eigen::Map<const Vector> w3(params_.data() + w3_offset(k), H);

    grad.segment(w3_offset(k), H).noalias() += ws.a2 * d_out;
    grad(b3_offset(k)) += d_out.sum();
    Matrix dz2 = w3 * d_out.transpose();
    dz2.array() *= (ws.z2.array() > 0.0).cast<double>();
    Eigen::Map<Matrix> gw2(grad.data() + w2_offset(k), H, H);
    gw2.noalias() += dz2 * ws.a1.transpose();
    grad.segment(b2_offset(k), H) += dz2.rowwise().sum();
    Matrix dz1 = w2.transpose() * dz2;
    dz1.array() *= (ws.z1.array() > 0.0).cast<double>();
    grad.segment(w1_offset(k), H).noalias() += dz1 * x;
    grad.segment(b1_offset(k), H) += dz1.rowwise().sum();
  }

  void check_cols(Index got) const {
    if (got != d_)
      throw InvalidInput("additive net has " + std::to_string(d_) + " inputs, got " + std::to_string(got));
  }

  // Plain-text format: "dualex-nam 1", then "d <d> hidden <H> params <P>",
  // then P values, one per line, with 17 significant digits.
  void save(std::ostream& os) const {
    os << "dualex-nam 1\n";
    os << "d " << d_ << " hidden " << hidden_ << " params " << parameter_count() << "\n";
    char buf[40];
    for (Index i = 0; i < params_.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g\n", params_(i));
      os << buf;
    }
  }

  static AdditiveNet load(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "dualex-nam")
      throw IngestionError("not a dualex-nam model file");
    if (version != 1) throw IngestionError("unsupported dualex-nam version " + std::to_string(version));
    std::string kd, kh, kp;
    Index d = 0, hidden = 0, count = 0;
    if (!(is >> kd >> d >> kh >> hidden >> kp >> count) || kd != "d" || kh != "hidden" || kp != "params")
      throw IngestionError("malformed dualex-nam header");
    if (d < 1 || hidden < 1) throw IngestionError("dualex-nam header has non-positive dimensions");
    AdditiveNet net = zeros(d, hidden);
    if (count != net.parameter_count())
      throw IngestionError("dualex-nam header declares " + std::to_string(count) +
                           " parameters, architecture needs " + std::to_string(net.parameter_count()));
    for (Index i = 0; i < count; ++i) {
      if (!(is >> net.params_(i)))
        throw IngestionError("dualex-nam file truncated at parameter " + std::to_string(i));
    }
    std::string rest;
    if (is >> rest) throw IngestionError("dualex-nam file has trailing data");
    return net;
  }

 private:
  Index d_;
  Index hidden_;
  Vector params_;
};

struct TrainConfig {
  double lr = 0.0005;
  double alpha = 1e-4;
  int epochs = 300;
  Index batch = 128;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch < 1) throw ConfigError("batch size must be at least 1");
  }
};

inline double loss(const AdditiveNet& net, const Eigen::Ref<const Matrix>& lambdas,
                   const Eigen::Ref<const Vector>& z, double alpha) {
  if (lambdas.rows() == 0) throw InvalidInput("loss over an empty batch");
  if (z.size() != lambdas.rows()) throw InvalidInput("loss: target count mismatch");
  const Vector residual = z - net.predict(lambdas);
  const Vector w = net.params().cwiseProduct(net.weight_mask());
  return residual.squaredNorm() + alpha * w.squaredNorm();
}

inline Vector gradient(const AdditiveNet& net, const Eigen::Ref<const Matrix>& lambdas,
                       const Eigen::Ref<const Vector>& z, double alpha, double* loss_out = nullptr) {
  if (lambdas.rows() == 0) throw InvalidInput("gradient over an empty batch");
  net.check_cols(lambdas.cols());
  const Index d = net.d();
  std::vector<AdditiveNet::Workspace> ws(static_cast<std::size_t>(d));
  Vector total = Vector::Zero(lambdas.rows());
  for (Index k = 0; k < d; ++k) {
    net.forward_subnet(k, lambdas.col(k), ws[static_cast<std::size_t>(k)]);
    total += ws[static_cast<std::size_t>(k)].out;
  }
  const Vector residual = z - total;
  const Vector d_out = -2.0 * residual;

  const Vector mask = net.weight_mask();
  Vector grad = 2.0 * alpha * net.params().cwiseProduct(mask);
  for (Index k = 0; k < d; ++k)
    net.backward_subnet(k, lambdas.col(k), ws[static_cast<std::size_t>(k)], d_out, grad);
  if (loss_out != nullptr)
    *loss_out = residual.squaredNorm() + alpha * net.params().cwiseProduct(mask).squaredNorm();
  return grad;
}

struct TrainResult {
  AdditiveNet net;
  // Per epoch: summed batch data losses / n + alpha |w|^2 at epoch end.
  std::vector<double> loss_history;
  double initial_loss = 0.0;  // full-data loss / n before the first step
  double final_loss = 0.0;    // full-data loss / n after the last step
};

inline TrainResult train(AdditiveNet net, const Matrix& lambdas, const Vector& z, const TrainConfig& cfg) {
  cfg.validate();
  net.check_cols(lambdas.cols());
  const Index n = lambdas.rows();
  if (n < 1) throw InvalidInput("training set is empty");
  if (z.size() != n) throw InvalidInput("training targets do not match samples");
  require_finite(lambdas, "training inputs");
  require_finite(z, "training targets");

  const Index batch = std::min(cfg.batch, n);
  const Vector mask = net.weight_mask();
  Vector m1 = Vector::Zero(net.parameter_count());
  Vector m2 = Vector::Zero(net.parameter_count());
  CounterRng shuffler(cfg.seed, 1);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  TrainResult out{net, {}, 0.0, 0.0};
  out.initial_loss = loss(net, lambdas, z, 0.0) / static_cast<double>(n);
  Matrix xb;
  Vector zb;
  long step = 0;
  double b1t = 1.0, b2t = 1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffler.shuffle(order);
    double epoch_loss = 0.0;
    for (Index start = 0; start < n; start += batch) {
      const Index len = std::min(batch, n - start);
      xb.resize(len, lambdas.cols());
      zb.resize(len);
      for (Index i = 0; i < len; ++i) {
        const Index row = order[static_cast<std::size_t>(start + i)];
        xb.row(i) = lambdas.row(row);
        zb(i) = z(row);
      }
      double batch_loss = 0.0;
      const Vector g = gradient(net, xb, zb, cfg.alpha, &batch_loss);
      ++step;
      if (!std::isfinite(batch_loss) || !g.allFinite())
        throw TrainingError("NAM training diverged at step " + std::to_string(step) + " (epoch " +
                            std::to_string(epoch + 1) + ", seed " + std::to_string(cfg.seed) + ")");
      epoch_loss += batch_loss - cfg.alpha * net.params().cwiseProduct(mask).squaredNorm();

      b1t *= cfg.beta1;
      b2t *= cfg.beta2;
      m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g;
      m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 / (1.0 - b1t);
      const double c2 = 1.0 / (1.0 - b2t);
      net.params().array() -=
          cfg.lr * (m1.array() * c1) / ((m2.array() * c2).sqrt() + cfg.eps);
    }
    out.loss_history.push_back(epoch_loss / static_cast<double>(n) +
                               cfg.alpha * net.params().cwiseProduct(mask).squaredNorm());
  }
  out.final_loss = loss(net, lambdas, z, 0.0) / static_cast<double>(n);
  out.net = std::move(net);
  return out;
}

// Per-coordinate (lambda, h_k(lambda)) pairs.
struct ShapeTable {
  Vector grid;
  Matrix values;  // grid.size() x d
};

// Evaluates every shape function on `grid`. With `center`, each column is
// shifted to zero mean over the grid.
inline ShapeTable extract_shapes(const AdditiveNet& net, const Vector& grid, bool center = true) {
  if ((grid.array() < 0.0).any() || (grid.array() > 1.0).any())
    throw InvalidInput("shape grid values must lie in [0, 1]");
  ShapeTable table;
  table.grid = grid;
  table.values.resize(grid.size(), net.d());
  for (Index k = 0; k < net.d(); ++k) table.values.col(k) = net.subnet(k, grid);
  if (center && grid.size() > 0) table.values.rowwise() -= table.values.colwise().mean();
  return table;
}

inline Vector uniform_grid(Index points) {
  if (points < 2) throw InvalidInput("grid needs at least two points");
  return Vector::LinSpaced(points, 0.0, 1.0);
}

}  // namespace dualex
