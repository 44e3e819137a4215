#include "csd/eigen3x3.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace csd {

SymmetricEigen3 eigen_symmetric(const Matrix3& input) {
  Matrix3 a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) a[i][j] = a[j][i] = input[i][j];
  }
  Matrix3 v{};
  for (int i = 0; i < 3; ++i) v[i][i] = 1.0;

  double frob = 0.0;
  for (const auto& row : a) {
    for (double x : row) frob += x * x;
  }

  SymmetricEigen3 out;
  constexpr int kMaxSweeps = 50;
  constexpr std::array<std::pair<int, int>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (out.sweeps = 0; out.sweeps < kMaxSweeps; ++out.sweeps) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off <= 1e-36 * frob || off == 0.0) break;
    for (const auto& [p, q] : kPairs) {
      const double apq = a[p][q];
      if (apq == 0.0) continue;
      // Zero a[p][q] with the rotation whose tangent t solves t^2 + 2 theta t - 1 = 0.
      const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
      const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
      const double c = 1.0 / std::hypot(t, 1.0);
      const double s = t * c;

      for (int k = 0; k < 3; ++k) {
        const double akp = a[k][p];
        const double akq = a[k][q];
        a[k][p] = c * akp - s * akq;
        a[k][q] = s * akp + c * akq;
      }
      for (int k = 0; k < 3; ++k) {
        const double apk = a[p][k];
        const double aqk = a[q][k];
        a[p][k] = c * apk - s * aqk;
        a[q][k] = s * apk + c * aqk;
      }
      a[p][q] = a[q][p] = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double vkp = v[k][p];
        const double vkq = v[k][q];
        v[k][p] = c * vkp - s * vkq;
        v[k][q] = s * vkp + c * vkq;
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] < a[y][y]; });
  for (int k = 0; k < 3; ++k) {
    out.values[k] = a[order[k]][order[k]];
    for (int i = 0; i < 3; ++i) out.vectors[i][k] = v[i][order[k]];
  }
  return out;
}

}  // namespace csd
