#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "rira/errors.hpp"
#include "rira/sketch.hpp"

namespace rira {

/// Column-by-column sketch-orthonormalization variants.
///
///  - Rgs    solves the small least-squares against the sketched basis
///           through an incrementally updated QR of S, then re-sketches
///           the projected column.
///  - Rcgs   takes S as orthonormal (coefficients S^T z), one pass.
///  - Rcgs2  adds a second projection pass on the residual, updating
///           both the n-space column and its sketch.
///  - Rcgs2w the weak variant: first pass updates the sketch only, the
///           n-space column is formed once in the second pass.
enum class OrthoMethod { Rgs, Rcgs, Rcgs2, Rcgs2w };

struct PushResult {
  /// Column of R for the new vector: j projection coefficients followed
  /// by the sketched norm used for normalization.
  Eigen::VectorXd coeffs;
  /// Set when the sketched residual vanished to tolerance (the input is
  /// numerically inside the current span); no column was appended.
  bool breakdown = false;
};

/**
 * @brief Incremental sketch-orthonormal QR state.
 *
 * Holds Q (n x j, Omega-orthonormal), S = Omega Q (d x j) and the
 * accumulated upper triangular R. Columns are appended one at a time via
 * push(). Single writer; completed columns may be read concurrently.
 */
class OrthoState {
 public:
  OrthoState(const SketchOperator& op, OrthoMethod method, Index capacity)
      : op_(&op), method_(method) {
    if (capacity < 1) throw InvalidDimension("ortho: capacity must be positive");
    if (capacity > op.rows())
      throw SketchCapacityError("ortho: capacity exceeds sketch dimension d");
    q_.resize(op.cols(), capacity);
    s_.resize(op.rows(), capacity);
    r_.setZero(capacity, capacity);
    if (method == OrthoMethod::Rgs) {
      ls_q_.resize(op.rows(), capacity);
      ls_r_.setZero(capacity, capacity);
    }
  }

  Index size() const { return j_; }
  Index capacity() const { return q_.cols(); }
  OrthoMethod method() const { return method_; }
  const SketchOperator& op() const { return *op_; }

  /// Omega-orthonormal columns built so far (n x j).
  Eigen::Ref<const Eigen::MatrixXd> basis() const { return q_.leftCols(j_); }
  /// Sketched basis S = Omega Q (d x j).
  Eigen::Ref<const Eigen::MatrixXd> sketched() const { return s_.leftCols(j_); }
  /// Accumulated R factor (j x j upper triangular).
  Eigen::MatrixXd r_factor() const { return r_.topLeftCorner(j_, j_); }

  /// Largest sketched input norm seen; breakdown is declared at
  /// 1e-14 times this scale (an exact zero never occurs in floating
  /// point).
  double breakdown_scale() const { return scale_; }

  void ensure_capacity(Index capacity) {
    if (capacity <= q_.cols()) return;
    if (capacity > op_->rows())
      throw SketchCapacityError("ortho: capacity exceeds sketch dimension d");
    q_.conservativeResize(Eigen::NoChange, capacity);
    s_.conservativeResize(Eigen::NoChange, capacity);
    Eigen::MatrixXd r_old = r_;
    r_.setZero(capacity, capacity);
    r_.topLeftCorner(r_old.rows(), r_old.cols()) = r_old;
    if (method_ == OrthoMethod::Rgs) {
      ls_q_.conservativeResize(Eigen::NoChange, capacity);
      Eigen::MatrixXd lr_old = ls_r_;
      ls_r_.setZero(capacity, capacity);
      ls_r_.topLeftCorner(lr_old.rows(), lr_old.cols()) = lr_old;
    }
  }

  /// Appends the sketch-orthonormalized input as column j+1, returning
  /// the new column of R. Throws SketchCapacityError once the embedding
  /// is full (j + 1 > d).
  PushResult push(const Eigen::Ref<const Eigen::VectorXd>& w) {
    if (w.size() != op_->cols()) throw InvalidDimension("ortho: input length != n");
    if (j_ >= op_->rows())
      throw SketchCapacityError("ortho: embedding cannot hold more than d columns");
    if (j_ >= q_.cols()) ensure_capacity(std::min(op_->rows(), 2 * j_ + 1));

    const Index j = j_;
    Eigen::VectorXd z = op_->apply(w);
    scale_ = std::max(scale_, z.norm());

    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(j + 1);
    Eigen::VectorXd q_new;
    Eigen::VectorXd s_new;

    switch (method_) {
      case OrthoMethod::Rgs: {
        Eigen::VectorXd c = solve_ls(z);
        q_new = w - q_.leftCols(j) * c;
        s_new = op_->apply(q_new);
        coeffs.head(j) = c;
        break;
      }
      case OrthoMethod::Rcgs: {
        Eigen::VectorXd c = s_.leftCols(j).transpose() * z;
        q_new = w - q_.leftCols(j) * c;
        s_new = op_->apply(q_new);
        coeffs.head(j) = c;
        break;
      }
      case OrthoMethod::Rcgs2: {
        Eigen::VectorXd c1 = s_.leftCols(j).transpose() * z;
        q_new = w - q_.leftCols(j) * c1;
        s_new = op_->apply(q_new);
        Eigen::VectorXd c2 = s_.leftCols(j).transpose() * s_new;
        q_new -= q_.leftCols(j) * c2;
        s_new -= s_.leftCols(j) * c2;
        coeffs.head(j) = c1 + c2;
        break;
      }
      case OrthoMethod::Rcgs2w: {
        Eigen::VectorXd c1 = s_.leftCols(j).transpose() * z;
        s_new = z - s_.leftCols(j) * c1;
        Eigen::VectorXd c2 = s_.leftCols(j).transpose() * s_new;
        s_new -= s_.leftCols(j) * c2;
        Eigen::VectorXd c = c1 + c2;
        q_new = w - q_.leftCols(j) * c;
        coeffs.head(j) = c;
        break;
      }
    }

    const double snorm = s_new.norm();
    coeffs[j] = snorm;
    if (snorm <= 1e-14 * scale_) return {coeffs, true};

    q_.col(j) = q_new / snorm;
    s_.col(j) = s_new / snorm;
    r_.col(j).head(j + 1) = coeffs;
    if (method_ == OrthoMethod::Rgs) append_ls_column(s_.col(j));
    ++j_;
    return {coeffs, false};
  }

  /// Replaces all columns with an externally produced Omega-orthonormal
  /// set (restart support). S0 must equal Omega Q0 to rounding.
  void reset_columns(const Eigen::Ref<const Eigen::MatrixXd>& q0,
                     const Eigen::Ref<const Eigen::MatrixXd>& s0) {
    if (q0.rows() != op_->cols() || s0.rows() != op_->rows() || q0.cols() != s0.cols())
      throw InvalidDimension("ortho: reset dimensions inconsistent");
    if (q0.cols() > q_.cols()) ensure_capacity(q0.cols());
    j_ = q0.cols();
    q_.leftCols(j_) = q0;
    s_.leftCols(j_) = s0;
    r_.setZero();
    r_.topLeftCorner(j_, j_).setIdentity();
    scale_ = 1.0;
    if (method_ == OrthoMethod::Rgs) {
      ls_r_.setZero();
      for (Index c = 0; c < j_; ++c) append_ls_column_at(s_.col(c), c);
    }
  }

 private:
  // Least-squares solve min |S y - z| through the maintained QR of S.
  Eigen::VectorXd solve_ls(const Eigen::Ref<const Eigen::VectorXd>& z) const {
    const Index j = j_;
    if (j == 0) return Eigen::VectorXd();
    Eigen::VectorXd rhs = ls_q_.leftCols(j).transpose() * z;
    return ls_r_.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(rhs);
  }

  void append_ls_column(const Eigen::Ref<const Eigen::VectorXd>& u) { append_ls_column_at(u, j_); }

  // Extends the QR of S by one column (classical Gram-Schmidt with one
  // reorthogonalization on the small d x j factor).
  void append_ls_column_at(const Eigen::Ref<const Eigen::VectorXd>& u, Index j) {
    Eigen::VectorXd t1 = ls_q_.leftCols(j).transpose() * u;
    Eigen::VectorXd res = u - ls_q_.leftCols(j) * t1;
    Eigen::VectorXd t2 = ls_q_.leftCols(j).transpose() * res;
    res -= ls_q_.leftCols(j) * t2;
    double rho = res.norm();
    if (rho < std::numeric_limits<double>::min()) rho = std::numeric_limits<double>::min();
    ls_r_.col(j).head(j) = t1 + t2;
    ls_r_(j, j) = rho;
    ls_q_.col(j) = res / rho;
  }

  const SketchOperator* op_;
  OrthoMethod method_;
  Index j_ = 0;
  double scale_ = 0.0;
  Eigen::MatrixXd q_;     // n x capacity
  Eigen::MatrixXd s_;     // d x capacity
  Eigen::MatrixXd r_;     // capacity x capacity, upper
  Eigen::MatrixXd ls_q_;  // QR of S for the Rgs least-squares
  Eigen::MatrixXd ls_r_;
};

struct SketchQrResult {
  Eigen::MatrixXd q;  // n x done
  Eigen::MatrixXd r;  // done x done upper triangular
  Eigen::MatrixXd s;  // d x done
  /// Index of the column (0-based, in W) whose sketched residual
  /// vanished; absent when all columns completed.
  std::optional<Index> breakdown_col;
};

/// Factors W = Q R with Q Omega-orthonormal, returning S = Omega Q as
/// well. On breakdown the completed leading columns are returned along
/// with the offending column index.
inline SketchQrResult sketch_orthonormalize(const Eigen::Ref<const Eigen::MatrixXd>& w,
                                            const SketchOperator& op, OrthoMethod method) {
  const Index k = w.cols();
  if (k > op.rows()) throw SketchCapacityError("sketch_orthonormalize: k > d");
  OrthoState state(op, method, std::max<Index>(k, 1));
  SketchQrResult out;
  for (Index j = 0; j < k; ++j) {
    PushResult res = state.push(w.col(j));
    if (res.breakdown) {
      out.breakdown_col = j;
      break;
    }
  }
  out.q = state.basis();
  out.s = state.sketched();
  out.r = state.r_factor();
  return out;
}

struct ConditionTraceRow {
  Index column;     // 1-based prefix size
  double kappa_q;   // condition number of Q(:, 1:column)
  double dev_sts;   // | I - S^T S | in the 2-norm
};

/// Runs sketch_orthonormalize on W recording per-prefix conditioning:
/// kappa from a dense SVD of the prefix of Q, the orthogonality
/// deviation from the spectrum of S^T S. `stride` subsamples the
/// recorded prefixes (the final prefix is always recorded); metrics at
/// skipped columns are simply not computed, which keeps large traces
/// affordable.
inline std::vector<ConditionTraceRow> condition_trace(const Eigen::Ref<const Eigen::MatrixXd>& w,
                                                      const SketchOperator& op, OrthoMethod method,
                                                      Index stride = 1) {
  const Index k = w.cols();
  if (k > op.rows()) throw SketchCapacityError("condition_trace: k > d");
  if (stride < 1) throw InvalidParameter("condition_trace: stride >= 1");
  OrthoState state(op, method, std::max<Index>(k, 1));
  std::vector<ConditionTraceRow> rows;
  for (Index j = 0; j < k; ++j) {
    PushResult res = state.push(w.col(j));
    if (res.breakdown) break;
    const Index built = state.size();
    if (built % stride != 0 && built != k) continue;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(state.basis());
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(built - 1);
    Eigen::MatrixXd gram = state.sketched().transpose() * state.sketched();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double dev = (eig.eigenvalues().array() - 1.0).abs().maxCoeff();
    rows.push_back({built, smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity(), dev});
  }
  return rows;
}

inline void write_condition_trace_csv(std::ostream& out, const std::vector<ConditionTraceRow>& rows) {
  out << "column_index,kappa_Q,dev_StS\n";
  out.precision(12);
  for (const auto& r : rows) out << r.column << "," << r.kappa_q << "," << r.dev_sts << "\n";
}

}  // namespace rira
