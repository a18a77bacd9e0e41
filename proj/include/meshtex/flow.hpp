// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <utility>

#include "meshtex/error.hpp"
#include "meshtex/rng.hpp"

namespace meshtex {

/// Straight-line interpolation batch between noise x0 and data x1: the
/// velocity target u_t = x1 - x0 is constant along each path.
struct FlowBatch {
  Eigen::MatrixXd x0;  // B x D
  Eigen::MatrixXd x1;  // B x D
  Eigen::VectorXd t;   // B, in [0,1]
  Eigen::MatrixXd xt;  // (1-t) x0 + t x1, rowwise
  Eigen::MatrixXd ut;  // x1 - x0
  Eigen::MatrixXd c;   // B x C condition, C may be 0
};

inline FlowBatch flow_path(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x1,
                           const Eigen::VectorXd& t,
                           const Eigen::MatrixXd& condition = Eigen::MatrixXd{}) {
  check(x0.rows() == x1.rows() && x0.cols() == x1.cols(), errc::shape_mismatch,
        "x0/x1 shapes differ");
  check(t.size() == x0.rows(), errc::shape_mismatch, "t length must match batch");
  check(x0.rows() > 0, errc::shape_mismatch, "empty batch");
  for (auto i = 0; i < t.size(); i++) {
    check(t[i] >= 0 && t[i] <= 1, errc::t_out_of_range, "t must lie in [0,1]");
  }
  auto batch = FlowBatch{};
  batch.x0 = x0;
  batch.x1 = x1;
  batch.t = t;
  batch.ut = x1 - x0;
  batch.xt = x0 + t.asDiagonal() * batch.ut;  // (1-t) x0 + t x1
  batch.c = condition.rows() == 0 ? Eigen::MatrixXd::Zero(x0.rows(), 0) : condition;
  check(batch.c.rows() == x0.rows(), errc::shape_mismatch, "condition rows must match batch");
  return batch;
}

/// Two-layer tanh regressor standing in for the velocity network: input
/// [x | c | t], hidden tanh, linear output of width D.
struct TinyMlp {
  int state_dim = 0;      // D
  int condition_dim = 0;  // C
  Eigen::MatrixXd w1;     // H x (D+C+1)
  Eigen::VectorXd b1;     // H
  Eigen::MatrixXd w2;     // D x H
  Eigen::VectorXd b2;     // D

  int input_dim() const { return state_dim + condition_dim + 1; }
  int hidden_dim() const { return int(w1.rows()); }
};

/// Deterministic scaled-gaussian initialization from our own generator, so
/// identical seeds give identical models on every platform.
inline TinyMlp make_tiny_mlp(int state_dim, int condition_dim, int hidden_dim, uint64_t seed) {
  check(state_dim >= 1 && hidden_dim >= 1 && condition_dim >= 0, errc::invalid_argument,
        "mlp dims must be positive");
  auto rng = Rng(seed);
  auto model = TinyMlp{};
  model.state_dim = state_dim;
  model.condition_dim = condition_dim;
  auto in = model.input_dim();
  auto fill = [&](Eigen::MatrixXd& m, long rows, long cols, double scale) {
    m.resize(rows, cols);
    for (auto r = 0l; r < rows; r++) {
      for (auto col = 0l; col < cols; col++) m(r, col) = scale * rng.next_gaussian();
    }
  };
  fill(model.w1, hidden_dim, in, std::sqrt(1.0 / in));
  fill(model.w2, state_dim, hidden_dim, std::sqrt(1.0 / hidden_dim));
  model.b1 = Eigen::VectorXd::Zero(hidden_dim);
  model.b2 = Eigen::VectorXd::Zero(state_dim);
  return model;
}

namespace detail {

// Assembled [x | c | t] input block for a batch.
inline Eigen::MatrixXd mlp_inputs(const TinyMlp& model, const Eigen::MatrixXd& x,
                                  const Eigen::MatrixXd& c, const Eigen::VectorXd& t) {
  check(x.cols() == model.state_dim, errc::shape_mismatch, "state width mismatch");
  check(c.cols() == model.condition_dim, errc::shape_mismatch, "condition width mismatch");
  check(c.rows() == x.rows() && t.size() == x.rows(), errc::shape_mismatch,
        "batch rows disagree");
  auto z = Eigen::MatrixXd(x.rows(), model.input_dim());
  z.leftCols(model.state_dim) = x;
  if (model.condition_dim > 0) z.middleCols(model.state_dim, model.condition_dim) = c;
  z.rightCols(1) = t;
  return z;
}

}  // namespace detail

/// Velocity prediction for a batch of states at (per-row) times.
inline Eigen::MatrixXd mlp_forward(const TinyMlp& model, const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& c, const Eigen::VectorXd& t) {
  auto z = detail::mlp_inputs(model, x, c, t);
  auto hidden = ((z * model.w1.transpose()).rowwise() + model.b1.transpose())
                    .array()
                    .tanh()
                    .matrix()
                    .eval();
  return ((hidden * model.w2.transpose()).rowwise() + model.b2.transpose()).eval();
}

/// Mean over the batch of the squared Euclidean distance between the
/// predicted and target velocities.
inline double flow_loss(const TinyMlp& model, const FlowBatch& batch) {
  auto pred = mlp_forward(model, batch.xt, batch.c, batch.t);
  check(pred.cols() == batch.ut.cols(), errc::shape_mismatch, "velocity width mismatch");
  return (pred - batch.ut).rowwise().squaredNorm().mean();
}

struct MlpGradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

/// Analytic full-batch gradient of flow_loss. loss = (1/B) sum_i |y_i-u_i|^2
/// with y = tanh(z W1' + b1) W2' + b2.
inline std::pair<MlpGradients, double> mlp_gradients(const TinyMlp& model,
                                                     const FlowBatch& batch) {
  auto z = detail::mlp_inputs(model, batch.xt, batch.c, batch.t);
  auto pre = ((z * model.w1.transpose()).rowwise() + model.b1.transpose()).eval();
  auto hidden = pre.array().tanh().matrix().eval();
  auto pred = ((hidden * model.w2.transpose()).rowwise() + model.b2.transpose()).eval();
  auto diff = (pred - batch.ut).eval();
  auto loss = diff.rowwise().squaredNorm().mean();

  auto scale = 2.0 / double(batch.xt.rows());
  auto d_pred = (scale * diff).eval();                               // B x D
  auto d_hidden = (d_pred * model.w2).eval();                        // B x H
  auto d_pre = (d_hidden.array() * (1.0 - hidden.array().square())).matrix().eval();

  auto grads = MlpGradients{};
  grads.w2 = d_pred.transpose() * hidden;
  grads.b2 = d_pred.colwise().sum().transpose();
  grads.w1 = d_pre.transpose() * z;
  grads.b1 = d_pre.colwise().sum().transpose();
  return {std::move(grads), loss};
}

/// One full-batch gradient-descent step; returns the stepped model and the
/// loss measured before the update.
inline std::pair<TinyMlp, double> mlp_train_step(const TinyMlp& model, const FlowBatch& batch,
                                                 double learning_rate) {
  auto [grads, loss] = mlp_gradients(model, batch);
  auto next = model;
  next.w1 -= learning_rate * grads.w1;
  next.b1 -= learning_rate * grads.b1;
  next.w2 -= learning_rate * grads.w2;
  next.b2 -= learning_rate * grads.b2;
  return {std::move(next), loss};
}

using VelocityField =
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, const Eigen::MatrixXd&, double)>;

/// First-order Euler integration of dx/dt = field(x, c, t) from t=0 to t=1:
/// x <- x + (1/S) field(x, c, i/S) for i = 0..S-1.
inline Eigen::MatrixXd euler_sample(const VelocityField& field, const Eigen::MatrixXd& x0,
                                    const Eigen::MatrixXd& c, int steps) {
  check(steps >= 1, errc::invalid_argument, "need at least one step");
  auto x = x0;
  auto dt = 1.0 / steps;
  for (auto i = 0; i < steps; i++) {
    x += dt * field(x, c, double(i) * dt);
  }
  return x;
}

inline Eigen::MatrixXd euler_sample(const TinyMlp& model, const Eigen::MatrixXd& x0,
                                    const Eigen::MatrixXd& c, int steps) {
  return euler_sample(
      [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& cond, double t) {
        auto tv = Eigen::VectorXd::Constant(x.rows(), t).eval();
        return mlp_forward(model, x, cond, tv);
      },
      x0, c, steps);
}

}  // namespace meshtex
