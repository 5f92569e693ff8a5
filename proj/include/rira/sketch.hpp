#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "rira/errors.hpp"
#include "rira/prng.hpp"

namespace rira {

using Index = Eigen::Index;

/// Supported oblivious subspace embeddings. Identity is a test mode
/// (d == n, the exact embedding); the other three are the standard
/// random constructions.
enum class SketchKind { Gaussian, Srht, SparseSign, Identity };

/**
 * @brief A random embedding Omega in R^{d x n}, applied as a linear map.
 *
 * The operator is fully determined by (kind, n, d, seed, zeta): building
 * it twice with the same parameters yields bit-identical applications.
 * Application uses a fixed summation order, so results do not depend on
 * the internal representation. Instances are immutable after
 * construction and safe to share across threads.
 *
 * Scalings follow the usual conventions: Gaussian entries are
 * N(0,1)/sqrt(d); SRHT is sqrt(nn/d) * P * (H/sqrt(nn)) * D with nn the
 * padded power of two; sparse sign columns carry exactly zeta entries of
 * magnitude 1/sqrt(zeta).
 */
class SketchOperator {
 public:
  /// Byte budget below which a Gaussian operator is stored as a dense
  /// matrix; larger operators regenerate columns on the fly from the
  /// counter-based generator (same arithmetic either way).
  static constexpr std::size_t kDefaultDenseBudget = std::size_t{1} << 27;

  SketchOperator(SketchKind kind, Index n, Index d, std::uint64_t seed = 0,
                 int zeta = 8, std::size_t dense_budget = kDefaultDenseBudget)
      : kind_(kind), n_(n), d_(d), seed_(seed), zeta_(zeta) {
    if (n <= 0 || d <= 0) throw InvalidDimension("sketch: dimensions must be positive");
    if (kind == SketchKind::Identity) {
      if (d != n) throw InvalidDimension("sketch: identity mode requires d == n");
      return;
    }
    if (d >= n) throw InvalidDimension("sketch: d must be < n");
    switch (kind) {
      case SketchKind::Gaussian: {
        const std::size_t bytes = static_cast<std::size_t>(d) * static_cast<std::size_t>(n) * sizeof(double);
        if (bytes <= dense_budget) {
          gauss_ = Eigen::MatrixXd(d, n);
          for (Index j = 0; j < n; ++j) gauss_.col(j) = gaussian_column(j);
        }
        break;
      }
      case SketchKind::Srht: {
        padded_ = Index{1};
        while (padded_ < n) padded_ <<= 1;
        signs_.resize(static_cast<std::size_t>(n));
        detail::CounterRng sign_rng(seed_, kStreamSrhtSigns, 0);
        for (auto& s : signs_) s = (sign_rng.next_u64() & 1u) ? std::int8_t{1} : std::int8_t{-1};
        rows_.resize(static_cast<std::size_t>(d));
        std::vector<Index> pool(static_cast<std::size_t>(padded_));
        for (Index i = 0; i < padded_; ++i) pool[static_cast<std::size_t>(i)] = i;
        detail::CounterRng row_rng(seed_, kStreamSrhtRows, 0);
        for (Index i = 0; i < d; ++i) {
          const auto pick = i + static_cast<Index>(row_rng.next_below(static_cast<std::uint64_t>(padded_ - i)));
          std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick)]);
          rows_[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
        }
        break;
      }
      case SketchKind::SparseSign: {
        if (zeta < 1 || zeta > d) throw InvalidParameter("sketch: zeta must satisfy 1 <= zeta <= d");
        sparse_rows_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(zeta));
        sparse_signs_.resize(sparse_rows_.size());
        std::vector<Index> picked;
        picked.reserve(static_cast<std::size_t>(zeta));
        for (Index j = 0; j < n; ++j) {
          detail::CounterRng rng(seed_, kStreamSparse, static_cast<std::uint64_t>(j));
          picked.clear();
          // Floyd sampling: zeta distinct rows of [0, d).
          for (Index i = d - zeta; i < d; ++i) {
            const auto r = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
            bool seen = false;
            for (Index p : picked) seen = seen || (p == r);
            picked.push_back(seen ? i : r);
          }
          for (int t = 0; t < zeta; ++t) {
            const auto slot = static_cast<std::size_t>(j) * static_cast<std::size_t>(zeta) + static_cast<std::size_t>(t);
            sparse_rows_[slot] = picked[static_cast<std::size_t>(t)];
            sparse_signs_[slot] = (rng.next_u64() & 1u) ? std::int8_t{1} : std::int8_t{-1};
          }
        }
        break;
      }
      case SketchKind::Identity:
        break;
    }
  }

  SketchKind kind() const { return kind_; }
  Index rows() const { return d_; }
  Index cols() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  int zeta() const { return zeta_; }

  /// SRHT introspection (diagnostics and cross-checks against an
  /// explicitly materialized transform).
  Index padded_length() const { return padded_; }
  const std::vector<Index>& srht_sampled_rows() const { return rows_; }
  const std::vector<std::int8_t>& srht_sign_diagonal() const { return signs_; }

  /// y = Omega x.
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != n_) throw InvalidDimension("sketch: input length != n");
    switch (kind_) {
      case SketchKind::Identity:
        return x;
      case SketchKind::Gaussian: {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(d_);
        if (gauss_.size() > 0) {
          for (Index j = 0; j < n_; ++j) y += x[j] * gauss_.col(j);
        } else {
          for (Index j = 0; j < n_; ++j) y += x[j] * gaussian_column(j);
        }
        return y;
      }
      case SketchKind::Srht: {
        Eigen::VectorXd buf = Eigen::VectorXd::Zero(padded_);
        for (Index i = 0; i < n_; ++i)
          buf[i] = static_cast<double>(signs_[static_cast<std::size_t>(i)]) * x[i];
        // Unnormalized fast Walsh-Hadamard transform.
        for (Index len = 1; len < padded_; len <<= 1) {
          for (Index i = 0; i < padded_; i += (len << 1)) {
            for (Index j = i; j < i + len; ++j) {
              const double a = buf[j];
              const double b = buf[j + len];
              buf[j] = a + b;
              buf[j + len] = a - b;
            }
          }
        }
        const double scale = 1.0 / std::sqrt(static_cast<double>(d_));
        Eigen::VectorXd y(d_);
        for (Index i = 0; i < d_; ++i) y[i] = scale * buf[rows_[static_cast<std::size_t>(i)]];
        return y;
      }
      case SketchKind::SparseSign: {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(d_);
        const double scale = 1.0 / std::sqrt(static_cast<double>(zeta_));
        for (Index j = 0; j < n_; ++j) {
          const double v = scale * x[j];
          const auto base = static_cast<std::size_t>(j) * static_cast<std::size_t>(zeta_);
          for (int t = 0; t < zeta_; ++t)
            y[sparse_rows_[base + static_cast<std::size_t>(t)]] +=
                static_cast<double>(sparse_signs_[base + static_cast<std::size_t>(t)]) * v;
        }
        return y;
      }
    }
    return Eigen::VectorXd();
  }

  /// Column-wise application to a tall matrix. A materialized Gaussian
  /// takes the blocked product; the result may differ from per-vector
  /// application only by floating-point reassociation.
  Eigen::MatrixXd apply_cols(const Eigen::Ref<const Eigen::MatrixXd>& m) const {
    if (m.rows() != n_) throw InvalidDimension("sketch: input rows != n");
    if (kind_ == SketchKind::Identity) return m;
    if (kind_ == SketchKind::Gaussian && gauss_.size() > 0) return gauss_ * m;
    Eigen::MatrixXd out(d_, m.cols());
    for (Index j = 0; j < m.cols(); ++j) out.col(j) = apply(m.col(j));
    return out;
  }

  Eigen::VectorXd operator*(const Eigen::Ref<const Eigen::VectorXd>& x) const { return apply(x); }

 private:
  static constexpr std::uint64_t kStreamGaussian = 0x6761757373ULL;
  static constexpr std::uint64_t kStreamSrhtSigns = 0x7372687431ULL;
  static constexpr std::uint64_t kStreamSrhtRows = 0x7372687432ULL;
  static constexpr std::uint64_t kStreamSparse = 0x737061727365ULL;

  Eigen::VectorXd gaussian_column(Index j) const {
    detail::CounterRng rng(seed_, kStreamGaussian, static_cast<std::uint64_t>(j));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_));
    Eigen::VectorXd col(d_);
    for (Index i = 0; i < d_; ++i) col[i] = scale * rng.next_normal();
    return col;
  }

  SketchKind kind_;
  Index n_;
  Index d_;
  std::uint64_t seed_;
  int zeta_;

  Eigen::MatrixXd gauss_;            // Gaussian, when under budget
  Index padded_ = 0;                 // SRHT padded length
  std::vector<std::int8_t> signs_;   // SRHT diagonal
  std::vector<Index> rows_;          // SRHT sampled rows
  std::vector<Index> sparse_rows_;   // SparseSign, zeta per column
  std::vector<std::int8_t> sparse_signs_;
};

/// Factory matching the operator constructor; zeta is only meaningful
/// for SparseSign.
inline SketchOperator make_sketch(SketchKind kind, Index n, Index d,
                                  std::uint64_t seed = 0, int zeta = 8) {
  return SketchOperator(kind, n, d, seed, zeta);
}

/**
 * @brief Smallest eps such that (1-eps)|x|^2 <= |Omega x|^2 <= (1+eps)|x|^2
 *        holds for every x in span(V).
 *
 * Computed from the extreme singular values of (Omega V) R^-1 where
 * V = Q R is an exact orthonormal factorization. Throws on
 * rank-deficient V. The returned value may exceed 1 for a failed
 * embedding; the caller interprets.
 */
inline double measure_embedding(const SketchOperator& op,
                                const Eigen::Ref<const Eigen::MatrixXd>& v) {
  const Index n = v.rows();
  const Index k = v.cols();
  if (n != op.cols()) throw InvalidDimension("measure_embedding: V rows != n");
  if (k < 1 || k > n) throw InvalidDimension("measure_embedding: need 1 <= k <= n");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const double dmax = r.diagonal().cwiseAbs().maxCoeff();
  const double dmin = r.diagonal().cwiseAbs().minCoeff();
  if (dmin <= static_cast<double>(n) * std::numeric_limits<double>::epsilon() * dmax)
    throw InvalidParameter("measure_embedding: rank-deficient basis");

  Eigen::MatrixXd sketched = op.apply_cols(v);  // d x k
  Eigen::MatrixXd xt = r.transpose().triangularView<Eigen::Lower>().solve(sketched.transpose());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(xt);
  const double smax = svd.singularValues()(0);
  // With k > d the sketched basis cannot be full rank.
  const double smin = (k > op.rows()) ? 0.0 : svd.singularValues()(std::min(k, op.rows()) - 1);
  return std::max({smax * smax - 1.0, 1.0 - smin * smin, 0.0});
}

}  // namespace rira
