#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace gdix {

// Charts are 2- or 3-dimensional. Fixed maximum sizes keep every small
// vector and matrix on the stack.
inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// Jacobi pairs (j, j') stacked: at most 2(n-1) = 4 rows.
using PairMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

// Rank-3 array indexed (i, j, k), used for Christoffel symbols Γ^i_{jk}
// and for derivative stacks ∂_k g_{ij}.
struct Tensor3 {
  int n = 0;
  std::array<double, 27> a{};

  Tensor3() = default;
  explicit Tensor3(int dim) : n(dim) {}

  double& operator()(int i, int j, int k) { return a[(i * 3 + j) * 3 + k]; }
  double operator()(int i, int j, int k) const { return a[(i * 3 + j) * 3 + k]; }
};

// Rank-4 array indexed (i, j, k, l).
struct Tensor4 {
  int n = 0;
  std::array<double, 81> a{};

  Tensor4() = default;
  explicit Tensor4(int dim) : n(dim) {}

  double& operator()(int i, int j, int k, int l) { return a[((i * 3 + j) * 3 + k) * 3 + l]; }
  double operator()(int i, int j, int k, int l) const {
    return a[((i * 3 + j) * 3 + k) * 3 + l];
  }
};

// Axis-aligned box in chart coordinates.
struct Box {
  Vec lo;
  Vec hi;

  bool contains(const Vec& x) const {
    for (int i = 0; i < x.size(); ++i) {
      if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    }
    return true;
  }
};

}  // namespace gdix
