#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "balltraj/autograd/graph.hpp"

namespace balltraj::tu {

inline std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Row i of the result is row perm[i] of m, applied inside every block of
// `block` rows starting at `offset` (rows outside [offset, offset+len) of a
// block stay in place).
template <typename S>
Matrix<S> permute_block_rows(const Matrix<S>& m, Eigen::Index block, Eigen::Index offset,
                             const std::vector<int>& perm) {
  Matrix<S> out = m;
  const Eigen::Index len = static_cast<Eigen::Index>(perm.size());
  for (Eigen::Index b = 0; b * block < m.rows(); ++b) {
    for (Eigen::Index i = 0; i < len; ++i) out.row(b * block + offset + i) = m.row(b * block + offset + perm[static_cast<std::size_t>(i)]);
  }
  return out;
}

template <typename S>
Matrix<S> random_matrix_t(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix<S> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(n(rng));
  return m;
}

}  // namespace balltraj::tu
