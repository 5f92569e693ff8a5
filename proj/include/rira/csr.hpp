#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <tuple>
#include <vector>

#include "rira/errors.hpp"

namespace rira {

using Index = Eigen::Index;

/// Square sparse real matrix in compressed-sparse-row form. Immutable in
/// spirit: build once via from_triplets (or the readers/generators), then
/// share freely. Within each row the column indices are strictly
/// increasing.
struct CsrMatrix {
  Index n = 0;
  std::vector<Index> row_ptr;  // n + 1 offsets
  std::vector<Index> col_idx;
  std::vector<double> vals;

  Index nnz() const { return static_cast<Index>(col_idx.size()); }

  /// Builds CSR from (row, col, value) triplets: duplicates are summed,
  /// columns sorted within rows.
  static CsrMatrix from_triplets(Index n, std::vector<std::tuple<Index, Index, double>> entries) {
    for (const auto& [i, j, v] : entries) {
      (void)v;
      if (i < 0 || i >= n || j < 0 || j >= n)
        throw InvalidDimension("csr: triplet index out of range");
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    CsrMatrix m;
    m.n = n;
    m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t s = 0; s < entries.size();) {
      const auto [i, j, v0] = entries[s];
      double v = v0;
      std::size_t t = s + 1;
      while (t < entries.size() && std::get<0>(entries[t]) == i && std::get<1>(entries[t]) == j) {
        v += std::get<2>(entries[t]);
        ++t;
      }
      m.col_idx.push_back(j);
      m.vals.push_back(v);
      ++m.row_ptr[static_cast<std::size_t>(i) + 1];
      s = t;
    }
    for (std::size_t i = 1; i < m.row_ptr.size(); ++i) m.row_ptr[i] += m.row_ptr[i - 1];
    return m;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
        d(i, col_idx[static_cast<std::size_t>(p)]) = vals[static_cast<std::size_t>(p)];
    return d;
  }
};

/// y = A x with a fixed per-row accumulation order (reentrant,
/// deterministic).
inline Eigen::VectorXd spmv(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != a.n) throw InvalidDimension("spmv: length mismatch");
  Eigen::VectorXd y(a.n);
  for (Index i = 0; i < a.n; ++i) {
    double acc = 0.0;
    for (Index p = a.row_ptr[static_cast<std::size_t>(i)]; p < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      acc += a.vals[static_cast<std::size_t>(p)] * x[a.col_idx[static_cast<std::size_t>(p)]];
    y[i] = acc;
  }
  return y;
}

}  // namespace rira
