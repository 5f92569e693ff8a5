#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <tuple>
#include <vector>

#include "rira/csr.hpp"
#include "rira/prng.hpp"

namespace rira {

/// Non-normal test matrix with spectrum exactly {1, 2, ..., n}: diagonal
/// 1..n plus a fixed seeded pattern of strictly upper entries (about 5
/// per row, uniform in [-1, 1]), so the matrix stays upper triangular.
inline CsrMatrix gen_toy_spectrum(Index n, std::uint64_t seed = 0x5EED) {
  if (n < 2) throw InvalidDimension("gen_toy_spectrum: n >= 2 required");
  std::vector<std::tuple<Index, Index, double>> entries;
  entries.reserve(static_cast<std::size_t>(6 * n));
  constexpr std::uint64_t kStreamToy = 0x746f79ULL;
  for (Index i = 0; i < n; ++i) {
    entries.emplace_back(i, i, static_cast<double>(i + 1));
    detail::CounterRng rng(seed, kStreamToy, static_cast<std::uint64_t>(i));
    const Index avail = n - 1 - i;
    const Index count = std::min<Index>(5, avail);
    // Floyd sampling of distinct columns in (i, n).
    std::vector<Index> picked;
    for (Index t = avail - count; t < avail; ++t) {
      const auto r = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(t) + 1));
      bool seen = false;
      for (Index p : picked) seen = seen || (p == r);
      picked.push_back(seen ? t : r);
    }
    for (Index offset : picked)
      entries.emplace_back(i, i + 1 + offset, rng.next_symmetric());
  }
  return CsrMatrix::from_triplets(n, std::move(entries));
}

/// Numerically singular dense test matrix on an equispaced grid:
/// W(i,j) = sin(10 (mu_j + x_i)) / (cos(100 (mu_j - x_i)) + 1.1) with
/// x_i, mu_j equispaced in [0, 1] inclusive.
inline Eigen::MatrixXd gen_singular_grid(Index n, Index k) {
  if (n < 2 || k < 2) throw InvalidDimension("gen_singular_grid: n, k >= 2 required");
  Eigen::MatrixXd w(n, k);
  for (Index j = 0; j < k; ++j) {
    const double mu = static_cast<double>(j) / static_cast<double>(k - 1);
    for (Index i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n - 1);
      w(i, j) = std::sin(10.0 * (mu + x)) / (std::cos(100.0 * (mu - x)) + 1.1);
    }
  }
  return w;
}

}  // namespace rira
