#include <gtest/gtest.h>

#include <random>

#include "csd/levenberg_marquardt.hpp"

using namespace csd;

TEST(LevenbergMarquardt, Rosenbrock) {
  const ResidualFn fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r(0) = 10.0 * (x(1) - x(0) * x(0));
    r(1) = 1.0 - x(0);
  };
  LmOptions opt;
  opt.max_iterations = 1000;
  const auto res = levenberg_marquardt(fn, Eigen::Vector2d(-1.2, 1.0), 2, opt);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.params(0), 1.0, 1e-6);
  EXPECT_NEAR(res.params(1), 1.0, 1e-6);
  EXPECT_LT(res.rss, 1e-12);
}

TEST(LevenbergMarquardt, LinearLeastSquaresMatchesQr) {
  std::mt19937_64 g(8);
  std::normal_distribution<double> n;
  const int m = 40;
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const double t = i / 10.0;
    a(i, 0) = 1.0;
    a(i, 1) = t;
    a(i, 2) = t * t;
    b(i) = 0.5 - 1.5 * t + 0.25 * t * t + 0.1 * n(g);
  }
  const Eigen::VectorXd oracle = a.colPivHouseholderQr().solve(b);
  const ResidualFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) { r = a * x - b; };
  const auto res = levenberg_marquardt(fn, Eigen::Vector3d::Zero(), m);
  EXPECT_TRUE(res.converged);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(res.params(k), oracle(k), 1e-7);
  EXPECT_NEAR(res.rss, (a * oracle - b).squaredNorm(), 1e-10);
}

TEST(LevenbergMarquardt, RssNeverIncreases) {
  // Start far away on an exponential; the final rss must not exceed the start.
  const ResidualFn fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    for (int i = 0; i < 20; ++i) r(i) = x(0) * std::exp(-x(1) * i * 0.1) - 2.0 * std::exp(-0.7 * i * 0.1);
  };
  const Eigen::Vector2d x0(10.0, 5.0);
  Eigen::VectorXd r0(20);
  fn(x0, r0);
  const auto res = levenberg_marquardt(fn, x0, 20);
  EXPECT_LE(res.rss, r0.squaredNorm());
  EXPECT_NEAR(res.params(1), 0.7, 1e-6);
}
