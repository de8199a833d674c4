#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "nftsim/eq.hpp"
#include "nftsim/rng.hpp"

using namespace nftsim;
using Catch::Approx;

TEST_CASE("mmse recovers an exact linear relation: dA = 2 dLambda_im") {
  RandomStream rs(5, "test.mmse.exact");
  const int n = 4000;
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd ta(n), tp(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 4; ++k) x(i, k) = rs.normal();
    ta(i) = 2.0 * x(i, 3);
    tp(i) = 0.0;
  }
  const auto m = eq::mmse_fit(x, ta, tp);
  CHECK(std::abs(m.c(0)) < 1e-3);
  CHECK(std::abs(m.c(1)) < 1e-3);
  CHECK(std::abs(m.c(2)) < 1e-3);
  CHECK(m.c(3) == Approx(2.0).margin(1e-3));

  SECTION("corrected amplitude error vanishes") {
    double rms = 0.0;
    for (int i = 0; i < 200; ++i) {
      Eigen::VectorXd f = x.row(i);
      const cplx b_rx = std::polar(1.0 - ta(i), 0.3);  // amplitude short by the target
      const cplx b = eq::mmse_apply(m, f, b_rx);
      rms += std::pow(std::abs(b) - 1.0, 2.0);
    }
    CHECK(std::sqrt(rms / 200) < 1e-3);
  }
}

TEST_CASE("mmse weights vanish for uncorrelated targets") {
  RandomStream rs(6, "test.mmse.null");
  const int n = 20000;
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd ta(n), tp(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 4; ++k) x(i, k) = rs.normal();
    ta(i) = rs.normal();
    tp(i) = rs.normal();
  }
  const auto m = eq::mmse_fit(x, ta, tp);
  // 3 sigma of the weight estimate is ~3/sqrt(n)
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(m.c(k)) < 3.0 / std::sqrt(double(n)));
    CHECK(std::abs(m.d(k)) < 3.0 / std::sqrt(double(n)));
  }
}

TEST_CASE("mmse attains the closed form on jointly gaussian data") {
  RandomStream rs(7, "test.mmse.gauss");
  const int n = 100000;  // acceptance-scale sample count
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd ta(n), tp(n);
  const Eigen::Vector4d w_true{0.5, -1.2, 0.8, 2.0};
  const Eigen::Vector4d d_true{-0.3, 0.4, 1.1, -0.7};
  for (int i = 0; i < n; ++i) {
    // correlated features: x1 = g0, x2 = 0.6 g0 + 0.8 g1, ...
    const double g0 = rs.normal(), g1 = rs.normal(), g2 = rs.normal(), g3 = rs.normal();
    x(i, 0) = g0;
    x(i, 1) = 0.6 * g0 + 0.8 * g1;
    x(i, 2) = g2;
    x(i, 3) = 0.3 * g2 + 0.95 * g3;
    Eigen::Vector4d xi = x.row(i);
    ta(i) = w_true.dot(xi) + 0.5 * rs.normal();
    tp(i) = d_true.dot(xi) + 0.5 * rs.normal();
  }
  const auto m = eq::mmse_fit(x, ta, tp);
  CHECK((m.c - w_true).norm() / w_true.norm() < 0.02);
  CHECK((m.d - d_true).norm() / d_true.norm() < 0.02);
}

TEST_CASE("mmse preconditions") {
  Eigen::MatrixXd x(20, 4);
  x.setRandom();
  Eigen::VectorXd t = Eigen::VectorXd::Zero(20);
  CHECK_THROWS_AS(eq::mmse_fit(x, t, t), std::invalid_argument);  // < 10x samples
}

TEST_CASE("feature building shapes") {
  // synthetic symbol streams: 4 channels x 6 windows
  std::vector<std::vector<rx::RxSymbol>> sym(4, std::vector<rx::RxSymbol>(6));
  for (int c = 0; c < 4; ++c)
    for (int w = 0; w < 6; ++w) {
      auto& s = sym[c][w];
      s.channel = c;
      s.window_index = w;
      s.feature = {0.1 * c, 0.2 * w, 0.3, 0.4, 0.5, 0.6};
    }
  sym[2][3].erasure = true;

  SECTION("single scope: 4 features") {
    const auto fb = eq::build_features(sym, 1, eq::Scope::single);
    CHECK(fb.x.cols() == 4);
    CHECK(fb.x.rows() == 6);
    CHECK(fb.x(2, 0) == Approx(0.1));
    CHECK(fb.layout.size() == 4);
  }
  SECTION("multi scope: 16 features; erased symbols contribute zeros") {
    const auto fb = eq::build_features(sym, 0, eq::Scope::multi);
    CHECK(fb.x.cols() == 16);
    // channel 2, window 3 was erased
    CHECK(fb.x(3, 2 * 4 + 0) == 0.0);
    CHECK(fb.x(3, 2 * 4 + 3) == 0.0);
  }
  SECTION("neighbors scope: 48 features, boundary rows zero-padded and flagged") {
    const auto fb = eq::build_features(sym, 0, eq::Scope::neighbors);
    CHECK(fb.x.cols() == 48);
    CHECK(fb.padded[0]);
    CHECK(fb.padded[5]);
    CHECK_FALSE(fb.padded[2]);
    for (int k = 0; k < 16; ++k) CHECK(fb.x(0, k) == 0.0);  // missing w-1 block
  }
  SECTION("nn scope appends the received b of the target channel") {
    const auto fb = eq::build_features(sym, 3, eq::Scope::single, true);
    CHECK(fb.x.cols() == 6);
    CHECK(fb.x(1, 4) == Approx(0.5));
    CHECK(fb.x(1, 5) == Approx(0.6));
  }
}

TEST_CASE("nn training") {
  SECTION("jacobian matches finite differences on a small net") {
    RandomStream rs(9, "test.nn.jac");
    const int n = 12, fin = 3;
    Eigen::MatrixXd x(n, fin), t(n, 2);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < fin; ++k) x(i, k) = rs.normal();
      t(i, 0) = rs.normal();
      t(i, 1) = rs.normal();
    }
    eq::NnTrainOptions opt;
    opt.hidden = 5;
    opt.max_iters = 1;  // just initialize + one step; we probe the jacobian directly
    auto m = eq::nn_train(x, t, 123, opt);
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    Eigen::MatrixXd xstd = (x.rowwise() - m.in_mean.transpose()).array().rowwise() /
                           m.in_std.transpose().array();
    eq::detail::nn_residual_jacobian(m, xstd, t, r, &jac);
    Eigen::VectorXd theta = eq::detail::nn_get_params(m);
    const double h = 1e-6;
    for (Eigen::Index p = 0; p < theta.size(); p += 7) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp(p) += h;
      tm(p) -= h;
      eq::NnModel mp = m, mm = m;
      eq::detail::nn_set_params(mp, tp);
      eq::detail::nn_set_params(mm, tm);
      Eigen::VectorXd rp, rm;
      eq::detail::nn_residual_jacobian(mp, xstd, t, rp, nullptr);
      eq::detail::nn_residual_jacobian(mm, xstd, t, rm, nullptr);
      const Eigen::VectorXd fd = (rp - rm) / (2.0 * h);
      const double num = (jac.col(p) - fd).norm();
      const double den = std::max(1e-12, fd.norm());
      CHECK(num / den < 1e-5);
    }
  }
  SECTION("linear target: nn comes close to the linear fit") {
    RandomStream rs(10, "test.nn.linear");
    const int n = 1200;
    Eigen::MatrixXd x(n, 4), t(n, 2);
    const Eigen::Vector4d w{0.7, -0.2, 0.5, 1.0};
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < 4; ++k) x(i, k) = rs.normal();
      Eigen::Vector4d xi = x.row(i);
      t(i, 0) = w.dot(xi);
      t(i, 1) = -0.5 * w.dot(xi);
    }
    eq::NnTrainOptions opt;
    opt.hidden = 10;
    opt.max_iters = 120;
    opt.patience = 20;
    const auto m = eq::nn_train(x, t, 99, opt);
    // compare RMS against the exact linear predictor on fresh data
    double nn_sse = 0.0, lin_sse = 0.0;
    Eigen::MatrixXd xt(200, 4), yt;
    Eigen::MatrixXd tt(200, 2);
    for (int i = 0; i < 200; ++i) {
      for (int k = 0; k < 4; ++k) xt(i, k) = rs.normal();
      Eigen::Vector4d xi = xt.row(i);
      tt(i, 0) = w.dot(xi);
      tt(i, 1) = -0.5 * w.dot(xi);
    }
    yt = eq::nn_predict(m, xt);
    for (int i = 0; i < 200; ++i) {
      nn_sse += std::pow(yt(i, 0) - tt(i, 0), 2) + std::pow(yt(i, 1) - tt(i, 1), 2);
      lin_sse += 0.0;  // the exact linear model has zero error here
    }
    const double target_var = tt.squaredNorm();
    CHECK(nn_sse / target_var < 0.01);  // within 10% RMS of the (perfect) linear fit
  }
  SECTION("nonlinear target a linear model cannot fit") {
    RandomStream rs(11, "test.nn.xor");
    const int n = 2000;
    Eigen::MatrixXd x(n, 2), t(n, 2);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rs.normal();
      x(i, 1) = rs.normal();
      t(i, 0) = (x(i, 0) * x(i, 1) > 0) ? 1.0 : -1.0;  // XOR of the signs
      t(i, 1) = 0.0;
    }
    eq::NnTrainOptions opt;
    opt.hidden = 12;
    opt.max_iters = 150;
    opt.patience = 25;
    const auto m = eq::nn_train(x, t, 77, opt);
    const Eigen::MatrixXd y = eq::nn_predict(m, x);
    double nn_sse = 0.0, lin_sse = 0.0;
    // best linear fit of this target is ~zero (uncorrelated with x): its SSE ~ n
    for (int i = 0; i < n; ++i) {
      nn_sse += std::pow(y(i, 0) - t(i, 0), 2);
      lin_sse += 1.0;
    }
    CHECK(nn_sse < 0.01 * lin_sse);  // RMS < 0.1x the linear model's
  }
  SECTION("training is deterministic given the seed") {
    RandomStream rs(12, "test.nn.det");
    Eigen::MatrixXd x(300, 3), t(300, 2);
    for (int i = 0; i < 300; ++i) {
      for (int k = 0; k < 3; ++k) x(i, k) = rs.normal();
      t(i, 0) = std::sin(x(i, 0));
      t(i, 1) = x(i, 1) * 0.2;
    }
    eq::NnTrainOptions opt;
    opt.hidden = 6;
    opt.max_iters = 40;
    const auto m1 = eq::nn_train(x, t, 4242, opt);
    const auto m2 = eq::nn_train(x, t, 4242, opt);
    CHECK((eq::detail::nn_get_params(m1) - eq::detail::nn_get_params(m2)).norm() == 0.0);
    CHECK(m1.final_train_loss == m2.final_train_loss);
  }
  SECTION("zero-weight model applies the identity correction") {
    eq::NnModel m;
    m.w1 = Eigen::MatrixXd::Zero(4, 2);
    m.b1 = Eigen::VectorXd::Zero(4);
    m.w2 = Eigen::MatrixXd::Zero(2, 4);
    m.b2 = Eigen::VectorXd::Zero(2);
    m.in_mean = Eigen::VectorXd::Zero(2);
    m.in_std = Eigen::VectorXd::Ones(2);
    const cplx b{0.6, -0.8};
    const cplx out = eq::nn_apply(m, Eigen::Vector2d{0.4, -0.2}, b);
    CHECK(std::abs(out - b) < 1e-12);
  }
}

TEST_CASE("model save/load round trip") {
  namespace fs = std::filesystem;
  RandomStream rs(13, "test.io");
  SECTION("mmse") {
    Eigen::MatrixXd x(200, 4);
    Eigen::VectorXd ta(200), tp(200);
    for (int i = 0; i < 200; ++i) {
      for (int k = 0; k < 4; ++k) x(i, k) = rs.normal();
      ta(i) = x(i, 0) - x(i, 2);
      tp(i) = 0.5 * x(i, 1);
    }
    const auto m = eq::mmse_fit(x, ta, tp, eq::Scope::single, {"a", "b", "c", "d"});
    const std::string path = (fs::temp_directory_path() / "nftsim_mmse.txt").string();
    eq::save_mmse(m, path);
    const auto m2 = eq::load_mmse(path);
    CHECK((m.c - m2.c).norm() < 1e-15);
    CHECK((m.d - m2.d).norm() < 1e-15);
    CHECK(m2.feature_layout == m.feature_layout);
    Eigen::VectorXd f = x.row(7);
    CHECK(std::abs(eq::mmse_apply(m, f, {0.5, 0.5}) - eq::mmse_apply(m2, f, {0.5, 0.5})) < 1e-15);
    fs::remove(path);
  }
  SECTION("nn") {
    Eigen::MatrixXd x(100, 3), t(100, 2);
    for (int i = 0; i < 100; ++i) {
      for (int k = 0; k < 3; ++k) x(i, k) = rs.normal();
      t(i, 0) = x(i, 0);
      t(i, 1) = x(i, 1);
    }
    eq::NnTrainOptions opt;
    opt.hidden = 4;
    opt.max_iters = 10;
    const auto m = eq::nn_train(x, t, 5, opt, {"f0", "f1", "f2"});
    const std::string path = (fs::temp_directory_path() / "nftsim_nn.txt").string();
    eq::save_nn(m, path);
    const auto m2 = eq::load_nn(path);
    const Eigen::MatrixXd y1 = eq::nn_predict(m, x), y2 = eq::nn_predict(m2, x);
    CHECK((y1 - y2).norm() < 1e-12);
    fs::remove(path);
  }
}
