#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "csd/eigen3x3.hpp"

using namespace csd;

namespace {

Matrix3 random_symmetric(std::mt19937_64& g, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix3 a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) a[i][j] = a[j][i] = n(g);
  }
  return a;
}

double frobenius(const Matrix3& a) {
  double s = 0;
  for (const auto& row : a) {
    for (double v : row) s += v * v;
  }
  return std::sqrt(s);
}

}  // namespace

TEST(EigenSymmetric, DiagonalInputSorted) {
  const auto e = eigen_symmetric({{{3, 0, 0}, {0, -1, 0}, {0, 0, 2}}});
  EXPECT_EQ(e.values[0], -1);
  EXPECT_EQ(e.values[1], 2);
  EXPECT_EQ(e.values[2], 3);
}

TEST(EigenSymmetric, AgreesWithEigenLibrary) {
  std::mt19937_64 g(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const double scale = std::pow(10.0, (trial % 7) - 2);
    const Matrix3 a = random_symmetric(g, scale);
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m(i, j) = a[i][j];
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> oracle(m);
    const auto e = eigen_symmetric(a);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(e.values[k], oracle.eigenvalues()[k], 1e-12 * frobenius(a));
    }
  }
}

TEST(EigenSymmetric, ResidualAndOrthonormality) {
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix3 a = random_symmetric(g, 1000.0);
    const auto e = eigen_symmetric(a);
    const double norm = frobenius(a);
    for (int k = 0; k < 3; ++k) {
      double res = 0;
      for (int i = 0; i < 3; ++i) {
        double hv = 0;
        for (int j = 0; j < 3; ++j) hv += a[i][j] * e.vectors[j][k];
        const double d = hv - e.values[k] * e.vectors[i][k];
        res += d * d;
      }
      EXPECT_LE(std::sqrt(res), 1e-10 * norm);
      for (int l = 0; l < 3; ++l) {
        double dot = 0;
        for (int i = 0; i < 3; ++i) dot += e.vectors[i][k] * e.vectors[i][l];
        EXPECT_NEAR(dot, k == l ? 1.0 : 0.0, 1e-12);
      }
    }
    EXPECT_NEAR(e.values[0] + e.values[1] + e.values[2], a[0][0] + a[1][1] + a[2][2], 1e-11 * norm);
  }
}

TEST(EigenSymmetric, DegenerateSpectrum) {
  const auto e = eigen_symmetric({{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}});
  EXPECT_EQ(e.sweeps, 0);
  for (double v : e.values) EXPECT_EQ(v, 2.0);
  const auto f = eigen_symmetric({{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}});
  EXPECT_NEAR(f.values[0], 0.0, 1e-14);
  EXPECT_NEAR(f.values[1], 0.0, 1e-14);
  EXPECT_NEAR(f.values[2], 3.0, 1e-14);
}
