#pragma once

#include <array>

namespace csd {

using Matrix3 = std::array<std::array<double, 3>, 3>;

struct SymmetricEigen3 {
  std::array<double, 3> values{};  // ascending
  Matrix3 vectors{};               // vectors[i][k]: component i of eigenvector k
  int sweeps = 0;
};

// Cyclic Jacobi diagonalization of a real symmetric 3x3 matrix. Only the upper
// triangle is read.
SymmetricEigen3 eigen_symmetric(const Matrix3& a);

}  // namespace csd
