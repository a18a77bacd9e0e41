// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "meshtex/error.hpp"
#include "meshtex/math.hpp"

namespace meshtex {

using FeatureMatrix = Eigen::MatrixXd;

/// Positional encoding: each coordinate expands to itself followed by
/// sin/cos pairs at octave frequencies, row = [p, sin(2^0 pi p),
/// cos(2^0 pi p), ..., sin(2^{n-1} pi p), cos(2^{n-1} pi p)].
inline FeatureMatrix fourier_encode(const FeatureMatrix& points, int n_frequencies) {
  check(n_frequencies >= 0, errc::invalid_argument, "frequency count must be >= 0");
  auto rows = points.rows();
  auto coords = points.cols();
  auto out = FeatureMatrix(rows, coords * (1 + 2 * n_frequencies));
  out.leftCols(coords) = points;
  for (auto f = 0; f < n_frequencies; f++) {
    auto scaled = (points * (std::pow(2.0, f) * pi)).eval();
    out.middleCols(coords * (1 + 2 * f), coords) = scaled.array().sin();
    out.middleCols(coords * (2 + 2 * f), coords) = scaled.array().cos();
  }
  return out;
}

inline FeatureMatrix fourier_encode(const std::vector<Vec3>& points, int n_frequencies) {
  auto m = FeatureMatrix(long(points.size()), 3);
  for (auto i = 0; i < long(points.size()); i++) {
    m(i, 0) = points[size_t(i)].x;
    m(i, 1) = points[size_t(i)].y;
    m(i, 2) = points[size_t(i)].z;
  }
  return fourier_encode(m, n_frequencies);
}

/// Scaled dot-product attention with row-max softmax stabilization.
inline FeatureMatrix sdpa(const FeatureMatrix& q, const FeatureMatrix& k,
                          const FeatureMatrix& v) {
  check(q.cols() == k.cols(), errc::shape_mismatch, "q/k widths differ");
  check(k.rows() == v.rows(), errc::shape_mismatch, "k/v row counts differ");
  check(k.rows() > 0, errc::shape_mismatch, "attention over zero keys");
  auto logits = (q * k.transpose() / std::sqrt(double(q.cols()))).eval();
  auto out = FeatureMatrix(q.rows(), v.cols());
  for (auto row = 0; row < logits.rows(); row++) {
    auto shifted = (logits.row(row).array() - logits.row(row).maxCoeff()).exp().eval();
    out.row(row) = (shifted / shifted.sum()).matrix() * v;
  }
  return out;
}

/// Z_MVA = Z_SA + lambda_ref * sdpa(ref) + lambda_mv * sdpa(mv). A branch
/// with lambda == 0 is skipped entirely, so the reduction to Z_SA is
/// bit-exact.
inline FeatureMatrix multi_task_attention(const FeatureMatrix& z_sa, const FeatureMatrix& q_ref,
                                          const FeatureMatrix& k_ref, const FeatureMatrix& v_ref,
                                          const FeatureMatrix& q_mv, const FeatureMatrix& k_mv,
                                          const FeatureMatrix& v_mv, double lambda_ref,
                                          double lambda_mv) {
  auto out = z_sa;
  auto add_branch = [&](const FeatureMatrix& q, const FeatureMatrix& k, const FeatureMatrix& v,
                        double lambda) {
    if (lambda == 0) return;
    check(q.rows() == z_sa.rows() && v.cols() == z_sa.cols(), errc::shape_mismatch,
          "attention branch shape does not match z_sa");
    out += lambda * sdpa(q, k, v);
  };
  add_branch(q_ref, k_ref, v_ref, lambda_ref);
  add_branch(q_mv, k_mv, v_mv, lambda_mv);
  return out;
}

struct LatentSequence {
  Eigen::MatrixXd tokens;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd variance;  // elementwise, strictly positive
};

inline void validate(const LatentSequence& seq) {
  check(seq.mean.rows() == seq.variance.rows() && seq.mean.cols() == seq.variance.cols(),
        errc::shape_mismatch, "mean/variance shapes differ");
  check(seq.mean.size() > 0, errc::shape_mismatch, "empty latent sequence");
  check((seq.variance.array() > 0).all(), errc::non_positive_variance,
        "variance must be strictly positive");
}

/// KL of diagonal N(mean, variance) against the standard normal, averaged
/// over every element: 0.5 * mean(mu^2 + var - log var - 1).
inline double kl_loss(const LatentSequence& seq) {
  validate(seq);
  auto mu2 = seq.mean.array().square();
  auto var = seq.variance.array();
  return 0.5 * (mu2 + var - var.log() - 1.0).mean();
}

/// Mean squared error between predicted and reference values.
inline double recon_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  check(pred.size() == truth.size(), errc::shape_mismatch, "prediction length mismatch");
  check(pred.size() > 0, errc::shape_mismatch, "empty prediction");
  return (pred - truth).squaredNorm() / double(pred.size());
}

/// Combined autoencoder objective: reconstruction plus gamma-weighted KL.
inline double vae_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth,
                       const LatentSequence& seq, double gamma = 1e-3) {
  return recon_loss(pred, truth) + gamma * kl_loss(seq);
}

}  // namespace meshtex
