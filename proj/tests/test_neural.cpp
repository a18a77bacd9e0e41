// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "meshtex/attention.hpp"
#include "meshtex/flow.hpp"
#include "meshtex/rng.hpp"
#include "test_utils.hpp"

using namespace meshtex;
using testutil::error_code_of;

namespace {

Eigen::MatrixXd random_matrix(long rows, long cols, Rng& rng) {
  auto m = Eigen::MatrixXd(rows, cols);
  for (auto r = 0l; r < rows; r++) {
    for (auto c = 0l; c < cols; c++) m(r, c) = rng.next_gaussian();
  }
  return m;
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("fourier encoding interleaves octave sin/cos pairs", "[neural]") {
  SECTION("zero frequencies is the identity") {
    auto rng = Rng(5);
    auto points = random_matrix(6, 3, rng);
    auto out = fourier_encode(points, 0);
    CHECK(bitwise_equal(out, points));
  }
  SECTION("output width is coords * (1 + 2n)") {
    auto points = Eigen::MatrixXd::Zero(4, 2).eval();
    CHECK(fourier_encode(points, 3).cols() == 2 * 7);
    CHECK(fourier_encode(points, 3).rows() == 4);
  }
  SECTION("octave values at a half step") {
    auto points = Eigen::MatrixXd(1, 1);
    points(0, 0) = 0.5;
    auto out = fourier_encode(points, 3);
    REQUIRE(out.cols() == 7);
    CHECK(out(0, 0) == 0.5);
    CHECK(out(0, 1) == Catch::Approx(std::sin(pi * 0.5)).margin(1e-12));   // = 1
    CHECK(out(0, 2) == Catch::Approx(0.0).margin(1e-12));                  // cos(pi/2)
    CHECK(out(0, 3) == Catch::Approx(0.0).margin(1e-12));                  // sin(pi)
    CHECK(out(0, 4) == Catch::Approx(-1.0).margin(1e-12));                 // cos(pi)
    CHECK(out(0, 5) == Catch::Approx(0.0).margin(1e-12));                  // sin(2 pi)
    CHECK(out(0, 6) == Catch::Approx(1.0).margin(1e-12));                  // cos(2 pi)
  }
  SECTION("the point-list overload matches the matrix form") {
    auto points = std::vector<Vec3>{{0.1, -0.4, 0.9}, {2.5, 0.0, -1.25}};
    auto m = Eigen::MatrixXd(2, 3);
    m << 0.1, -0.4, 0.9, 2.5, 0.0, -1.25;
    CHECK(bitwise_equal(fourier_encode(points, 4), fourier_encode(m, 4)));
  }
  SECTION("negative frequency count is rejected") {
    auto points = Eigen::MatrixXd::Zero(1, 1).eval();
    CHECK(error_code_of([&] { fourier_encode(points, -1); }) == errc::invalid_argument);
  }
}

TEST_CASE("attention weights average the values", "[neural]") {
  auto rng = Rng(17);
  SECTION("a single key passes its value straight through") {
    auto q = random_matrix(5, 4, rng);
    auto k = random_matrix(1, 4, rng);
    auto v = random_matrix(1, 6, rng);
    auto out = sdpa(q, k, v);
    REQUIRE(out.rows() == 5);
    for (auto row = 0; row < 5; row++) {
      CHECK(max_abs_diff(out.row(row), v.row(0)) == 0.0);
    }
  }
  SECTION("a zero query averages the values uniformly") {
    auto q = Eigen::MatrixXd::Zero(1, 4).eval();
    auto k = random_matrix(8, 4, rng);
    auto v = random_matrix(8, 3, rng);
    auto out = sdpa(q, k, v);
    CHECK(max_abs_diff(out.row(0), v.colwise().mean()) < 1e-12);
  }
  SECTION("attention rows sum to one") {
    auto q = random_matrix(7, 5, rng);
    auto k = random_matrix(9, 5, rng);
    auto ones = Eigen::MatrixXd::Ones(9, 1).eval();
    auto sums = sdpa(q, k, ones);
    for (auto row = 0; row < 7; row++) {
      CHECK(std::abs(sums(row, 0) - 1.0) < 1e-9);
    }
  }
  SECTION("large logits stay finite through the max shift") {
    auto q = Eigen::MatrixXd::Constant(1, 1, 1000.0).eval();
    auto k = Eigen::MatrixXd(2, 1);
    k << 1000.0, -1000.0;
    auto v = Eigen::MatrixXd(2, 1);
    v << 2.0, 4.0;
    auto out = sdpa(q, k, v);
    CHECK(std::isfinite(out(0, 0)));
    CHECK(out(0, 0) == Catch::Approx(2.0).margin(1e-9));
  }
  SECTION("shape violations are rejected") {
    auto rng2 = Rng(3);
    auto q = random_matrix(2, 4, rng2);
    auto k = random_matrix(3, 5, rng2);
    auto v = random_matrix(3, 2, rng2);
    CHECK(error_code_of([&] { sdpa(q, k, v); }) == errc::shape_mismatch);
    auto k4 = random_matrix(3, 4, rng2);
    auto v_short = random_matrix(2, 2, rng2);
    CHECK(error_code_of([&] { sdpa(q, k4, v_short); }) == errc::shape_mismatch);
    auto empty = Eigen::MatrixXd(0, 4);
    auto empty_v = Eigen::MatrixXd(0, 2);
    CHECK(error_code_of([&] { sdpa(q, empty, empty_v); }) == errc::shape_mismatch);
  }
}

TEST_CASE("gated attention branches add linearly", "[neural]") {
  auto rng = Rng(23);
  auto z = random_matrix(5, 8, rng);
  auto q_ref = random_matrix(5, 6, rng);
  auto k_ref = random_matrix(7, 6, rng);
  auto v_ref = random_matrix(7, 8, rng);
  auto q_mv = random_matrix(5, 6, rng);
  auto k_mv = random_matrix(4, 6, rng);
  auto v_mv = random_matrix(4, 8, rng);

  SECTION("zero gates return the input bit for bit") {
    auto out = multi_task_attention(z, q_ref, k_ref, v_ref, q_mv, k_mv, v_mv, 0.0, 0.0);
    CHECK(bitwise_equal(out, z));
  }
  SECTION("zero-gated branches skip their shape checks") {
    auto bad = Eigen::MatrixXd(1, 1);
    CHECK_NOTHROW(multi_task_attention(z, bad, bad, bad, q_mv, k_mv, v_mv, 0.0, 0.4));
  }
  SECTION("a single branch is z plus the scaled attention") {
    auto out = multi_task_attention(z, q_ref, k_ref, v_ref, q_mv, k_mv, v_mv, 0.7, 0.0);
    auto expected = (z + 0.7 * sdpa(q_ref, k_ref, v_ref)).eval();
    CHECK(max_abs_diff(out, expected) < 1e-12);
  }
  SECTION("both branches accumulate") {
    auto out = multi_task_attention(z, q_ref, k_ref, v_ref, q_mv, k_mv, v_mv, 0.7, 0.4);
    auto expected =
        (z + 0.7 * sdpa(q_ref, k_ref, v_ref) + 0.4 * sdpa(q_mv, k_mv, v_mv)).eval();
    CHECK(max_abs_diff(out, expected) < 1e-12);
  }
  SECTION("doubling a gate doubles only that branch") {
    auto low = multi_task_attention(z, q_ref, k_ref, v_ref, q_mv, k_mv, v_mv, 0.35, 0.0);
    auto high = multi_task_attention(z, q_ref, k_ref, v_ref, q_mv, k_mv, v_mv, 0.70, 0.0);
    auto branch = (0.35 * sdpa(q_ref, k_ref, v_ref)).eval();
    CHECK(max_abs_diff(high - low, branch) < 1e-12);
  }
  SECTION("mismatched branch shapes are rejected when gated on") {
    auto v_narrow = random_matrix(7, 5, rng);
    CHECK(error_code_of([&] {
            multi_task_attention(z, q_ref, k_ref, v_narrow, q_mv, k_mv, v_mv, 0.7, 0.0);
          }) == errc::shape_mismatch);
  }
}

TEST_CASE("kl divergence against the standard normal", "[neural]") {
  auto make_seq = [](const Eigen::MatrixXd& mean, const Eigen::MatrixXd& variance) {
    auto seq = LatentSequence{};
    seq.mean = mean;
    seq.variance = variance;
    return seq;
  };
  SECTION("the standard normal has zero divergence") {
    auto seq = make_seq(Eigen::MatrixXd::Zero(3, 4), Eigen::MatrixXd::Ones(3, 4));
    CHECK(kl_loss(seq) == 0.0);
  }
  SECTION("a unit mean shift costs one half") {
    auto seq = make_seq(Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 2));
    CHECK(kl_loss(seq) == Catch::Approx(0.5).margin(1e-15));
  }
  SECTION("a pure variance change matches the closed form") {
    auto seq = make_seq(Eigen::MatrixXd::Zero(1, 1),
                        Eigen::MatrixXd::Constant(1, 1, 2.0));
    CHECK(kl_loss(seq) == Catch::Approx(0.5 * (2.0 - std::log(2.0) - 1.0)).margin(1e-15));
  }
  SECTION("divergence is never negative") {
    auto rng = Rng(31);
    for (auto trial = 0; trial < 50; trial++) {
      auto mean = random_matrix(2, 3, rng);
      auto variance = (random_matrix(2, 3, rng).array().abs() + 0.01).matrix().eval();
      CHECK(kl_loss(make_seq(mean, variance)) >= 0.0);
    }
  }
  SECTION("invalid sequences are rejected") {
    CHECK(error_code_of([&] {
            kl_loss(make_seq(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)));
          }) == errc::non_positive_variance);
    CHECK(error_code_of([&] {
            kl_loss(make_seq(Eigen::MatrixXd::Zero(2, 2),
                             Eigen::MatrixXd::Constant(2, 2, -1.0)));
          }) == errc::non_positive_variance);
    CHECK(error_code_of([&] {
            kl_loss(make_seq(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 3)));
          }) == errc::shape_mismatch);
    CHECK(error_code_of([&] {
            kl_loss(make_seq(Eigen::MatrixXd{}, Eigen::MatrixXd{}));
          }) == errc::shape_mismatch);
  }
}

TEST_CASE("reconstruction and combined objectives", "[neural]") {
  auto pred = Eigen::VectorXd(2);
  pred << 1.0, 2.0;
  auto truth = Eigen::VectorXd(2);
  truth << 2.0, 4.0;
  CHECK(recon_loss(pred, pred) == 0.0);
  CHECK(recon_loss(pred, truth) == Catch::Approx(2.5).margin(1e-15));

  auto seq = LatentSequence{};
  seq.mean = Eigen::MatrixXd::Ones(1, 2);
  seq.variance = Eigen::MatrixXd::Ones(1, 2);
  CHECK(vae_loss(pred, truth, seq, 1e-3) ==
        Catch::Approx(2.5 + 1e-3 * 0.5).margin(1e-15));

  auto short_vec = Eigen::VectorXd(1);
  CHECK(error_code_of([&] { recon_loss(pred, short_vec); }) == errc::shape_mismatch);
  auto empty = Eigen::VectorXd{};
  CHECK(error_code_of([&] { recon_loss(empty, empty); }) == errc::shape_mismatch);
}

TEST_CASE("straight-line paths interpolate between endpoints", "[neural]") {
  auto rng = Rng(41);
  auto x0 = random_matrix(5, 3, rng);
  auto x1 = random_matrix(5, 3, rng);
  SECTION("t=0 and t=1 hit the endpoints") {
    auto zeros = Eigen::VectorXd::Zero(5).eval();
    CHECK(max_abs_diff(flow_path(x0, x1, zeros).xt, x0) == 0.0);
    auto ones = Eigen::VectorXd::Ones(5).eval();
    CHECK(max_abs_diff(flow_path(x0, x1, ones).xt, x1) < 1e-12);
  }
  SECTION("the velocity target is the endpoint difference") {
    auto t = Eigen::VectorXd::Constant(5, 0.25).eval();
    auto batch = flow_path(x0, x1, t);
    CHECK(bitwise_equal(batch.ut, (x1 - x0).eval()));
    CHECK(max_abs_diff(batch.xt, (0.75 * x0 + 0.25 * x1).eval()) < 1e-12);
    CHECK(batch.c.rows() == 5);
    CHECK(batch.c.cols() == 0);
  }
  SECTION("out-of-range times are rejected") {
    auto low = Eigen::VectorXd::Constant(5, -0.1).eval();
    CHECK(error_code_of([&] { flow_path(x0, x1, low); }) == errc::t_out_of_range);
    auto high = Eigen::VectorXd::Constant(5, 1.1).eval();
    CHECK(error_code_of([&] { flow_path(x0, x1, high); }) == errc::t_out_of_range);
  }
  SECTION("shape violations are rejected") {
    auto t = Eigen::VectorXd::Zero(5).eval();
    auto narrow = random_matrix(5, 2, rng);
    CHECK(error_code_of([&] { flow_path(x0, narrow, t); }) == errc::shape_mismatch);
    auto t_short = Eigen::VectorXd::Zero(3).eval();
    CHECK(error_code_of([&] { flow_path(x0, x1, t_short); }) == errc::shape_mismatch);
    auto empty = Eigen::MatrixXd(0, 3);
    auto t_empty = Eigen::VectorXd{};
    CHECK(error_code_of([&] { flow_path(empty, empty, t_empty); }) == errc::shape_mismatch);
    auto c_bad = random_matrix(3, 2, rng);
    CHECK(error_code_of([&] { flow_path(x0, x1, t, c_bad); }) == errc::shape_mismatch);
  }
}

TEST_CASE("mlp construction is seeded and validated", "[neural]") {
  auto a = make_tiny_mlp(2, 1, 3, 7);
  auto b = make_tiny_mlp(2, 1, 3, 7);
  auto c = make_tiny_mlp(2, 1, 3, 8);
  CHECK(a.w1.rows() == 3);
  CHECK(a.w1.cols() == 4);  // D + C + 1
  CHECK(a.w2.rows() == 2);
  CHECK(a.w2.cols() == 3);
  CHECK(a.b1.isZero(0));
  CHECK(a.b2.isZero(0));
  CHECK(bitwise_equal(a.w1, b.w1));
  CHECK(bitwise_equal(a.w2, b.w2));
  CHECK(!bitwise_equal(a.w1, c.w1));
  CHECK(error_code_of([] { make_tiny_mlp(0, 0, 3, 1); }) == errc::invalid_argument);
  CHECK(error_code_of([] { make_tiny_mlp(2, 0, 0, 1); }) == errc::invalid_argument);
  CHECK(error_code_of([] { make_tiny_mlp(2, -1, 3, 1); }) == errc::invalid_argument);

  auto rng = Rng(2);
  auto x_bad = random_matrix(4, 3, rng);
  auto cond = random_matrix(4, 1, rng);
  auto t = Eigen::VectorXd::Zero(4).eval();
  CHECK(error_code_of([&] { mlp_forward(a, x_bad, cond, t); }) == errc::shape_mismatch);
}

TEST_CASE("analytic gradients agree with central differences", "[neural]") {
  auto model = make_tiny_mlp(2, 1, 3, 19);
  auto rng = Rng(20);
  auto x0 = random_matrix(4, 2, rng);
  auto x1 = random_matrix(4, 2, rng);
  auto c = random_matrix(4, 1, rng);
  auto t = Eigen::VectorXd(4);
  for (auto i = 0; i < 4; i++) t[i] = rng.next_double();
  auto batch = flow_path(x0, x1, t, c);

  auto [grads, loss] = mlp_gradients(model, batch);
  CHECK(loss == Catch::Approx(flow_loss(model, batch)).margin(1e-15));

  constexpr auto eps = 1e-5;
  auto check_block = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& analytic) {
    for (auto r = 0l; r < param.rows(); r++) {
      for (auto col = 0l; col < param.cols(); col++) {
        auto keep = param(r, col);
        param(r, col) = keep + eps;
        auto up = flow_loss(model, batch);
        param(r, col) = keep - eps;
        auto down = flow_loss(model, batch);
        param(r, col) = keep;
        auto numeric = (up - down) / (2 * eps);
        auto scale = std::max(1.0, std::abs(analytic(r, col)) + std::abs(numeric));
        REQUIRE(std::abs(analytic(r, col) - numeric) / scale < 1e-4);
      }
    }
  };
  check_block(model.w1, grads.w1);
  check_block(model.w2, grads.w2);
  for (auto i = 0l; i < model.b1.size(); i++) {
    auto keep = model.b1[i];
    model.b1[i] = keep + eps;
    auto up = flow_loss(model, batch);
    model.b1[i] = keep - eps;
    auto down = flow_loss(model, batch);
    model.b1[i] = keep;
    auto numeric = (up - down) / (2 * eps);
    auto scale = std::max(1.0, std::abs(grads.b1[i]) + std::abs(numeric));
    REQUIRE(std::abs(grads.b1[i] - numeric) / scale < 1e-4);
  }
  for (auto i = 0l; i < model.b2.size(); i++) {
    auto keep = model.b2[i];
    model.b2[i] = keep + eps;
    auto up = flow_loss(model, batch);
    model.b2[i] = keep - eps;
    auto down = flow_loss(model, batch);
    model.b2[i] = keep;
    auto numeric = (up - down) / (2 * eps);
    auto scale = std::max(1.0, std::abs(grads.b2[i]) + std::abs(numeric));
    REQUIRE(std::abs(grads.b2[i] - numeric) / scale < 1e-4);
  }
}

TEST_CASE("training steps follow the gradient", "[neural]") {
  auto model = make_tiny_mlp(2, 0, 8, 3);
  auto rng = Rng(4);
  auto x0 = random_matrix(64, 2, rng);
  auto x1 = (x0.array() + 1.5).matrix().eval();
  auto t = Eigen::VectorXd(64);
  for (auto i = 0; i < 64; i++) t[i] = rng.next_double();
  auto batch = flow_path(x0, x1, t);

  SECTION("a zero learning rate leaves the model untouched") {
    auto [next, loss] = mlp_train_step(model, batch, 0.0);
    CHECK(loss > 0.0);
    CHECK(bitwise_equal(next.w1, model.w1));
    CHECK(bitwise_equal(next.w2, model.w2));
    CHECK(bitwise_equal(Eigen::MatrixXd(next.b1), Eigen::MatrixXd(model.b1)));
    CHECK(bitwise_equal(Eigen::MatrixXd(next.b2), Eigen::MatrixXd(model.b2)));
  }
  SECTION("full-batch descent drives the loss down") {
    auto current = model;
    auto first = flow_loss(current, batch);
    auto last = first;
    for (auto step = 0; step < 60; step++) {
      auto [next, loss] = mlp_train_step(current, batch, 0.05);
      current = std::move(next);
      last = loss;
      CHECK(std::isfinite(loss));
    }
    auto final_loss = flow_loss(current, batch);
    CHECK(final_loss < 0.5 * first);
    CHECK(last >= final_loss);
  }
}

TEST_CASE("euler integration follows the field", "[neural]") {
  auto x0 = Eigen::MatrixXd(2, 2);
  x0 << 1.0, -2.0, 0.5, 3.0;
  auto c = Eigen::MatrixXd(2, 0);
  SECTION("a constant unit field translates by one") {
    auto field = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd&, double) {
      return Eigen::MatrixXd::Ones(x.rows(), x.cols()).eval();
    };
    auto out = euler_sample(field, x0, c, 4);
    CHECK(max_abs_diff(out, (x0.array() + 1.0).matrix().eval()) < 1e-12);
  }
  SECTION("a linear field compounds like discrete exponential growth") {
    auto field = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd&, double) {
      return x.eval();
    };
    auto steps = 8;
    auto out = euler_sample(field, x0, c, steps);
    auto factor = std::pow(1.0 + 1.0 / steps, steps);
    CHECK(max_abs_diff(out, (factor * x0).eval()) < 1e-9);
  }
  SECTION("fields are sampled at the left endpoint of each step") {
    auto field = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd&, double t) {
      return Eigen::MatrixXd::Constant(x.rows(), x.cols(), t).eval();
    };
    auto steps = 4;
    auto out = euler_sample(field, x0, c, steps);
    // sum over i of (i/S)*(1/S) = (S-1) / (2S)
    auto drift = (steps - 1) / (2.0 * steps);
    CHECK(max_abs_diff(out, (x0.array() + drift).matrix().eval()) < 1e-12);
  }
  SECTION("the model overload matches a hand-rolled field") {
    auto model = make_tiny_mlp(2, 0, 4, 9);
    auto by_model = euler_sample(model, x0, c, 6);
    auto by_field = euler_sample(
        [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& cond, double t) {
          auto tv = Eigen::VectorXd::Constant(x.rows(), t).eval();
          return mlp_forward(model, x, cond, tv);
        },
        x0, c, 6);
    CHECK(bitwise_equal(by_model, by_field));
  }
  SECTION("a non-positive step count is rejected") {
    auto field = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd&, double) {
      return x.eval();
    };
    CHECK(error_code_of([&] { euler_sample(field, x0, c, 0); }) == errc::invalid_argument);
  }
}
