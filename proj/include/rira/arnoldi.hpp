#pragma once

#include <Eigen/Dense>

#include "rira/csr.hpp"
#include "rira/errors.hpp"
#include "rira/ortho.hpp"
#include "rira/sketch.hpp"

namespace rira {

/**
 * @brief A randomized Arnoldi factorization A V = V H + beta v_next e_k^T.
 *
 * V is Omega-orthonormal with S = Omega V maintained alongside; H is
 * upper Hessenberg with positive subdiagonal while unreduced. beta is
 * the (k+1, k) entry; v_next is the next basis vector (Omega-unit), so
 * the residual is r = beta * v_next. After a happy breakdown beta == 0
 * and v_next is absent.
 *
 * The factorization references (does not own) the operator A and the
 * sketch; both must outlive it. Single writer; extension appends
 * columns without touching existing ones.
 */
class ArnoldiFactorization {
 public:
  ArnoldiFactorization(const SketchOperator& op, OrthoMethod method, Index capacity)
      : state_(op, method, capacity) {
    h_.setZero(capacity, capacity);
  }

  Index size() const { return k_; }
  bool breakdown() const { return breakdown_; }
  long matvec_count() const { return matvecs_; }
  const SketchOperator& op() const { return state_.op(); }
  OrthoMethod method() const { return state_.method(); }

  /// Basis V (n x k).
  Eigen::Ref<const Eigen::MatrixXd> v() const { return state_.basis().leftCols(k_); }
  /// Sketched basis S = Omega V (d x k).
  Eigen::Ref<const Eigen::MatrixXd> s() const { return state_.sketched().leftCols(k_); }
  /// Hessenberg factor (k x k).
  Eigen::Ref<const Eigen::MatrixXd> h() const { return h_.topLeftCorner(k_, k_); }
  double beta() const { return beta_; }
  Eigen::Ref<const Eigen::VectorXd> v_next() const { return state_.basis().col(k_); }
  Eigen::Ref<const Eigen::VectorXd> s_next() const { return state_.sketched().col(k_); }

  /// Count of steps whose basis vector had a Euclidean norm outside the
  /// heuristic band implied by a 1/2-embedding; nonzero values suggest
  /// the sketch stopped embedding the Krylov subspace.
  int embedding_warnings() const { return embedding_warnings_; }

  // Internals for the build/extend/restart drivers.
  OrthoState& state() { return state_; }
  Eigen::MatrixXd& h_storage() { return h_; }
  void set_size(Index k) { k_ = k; }
  void set_beta(double beta) { beta_ = beta; }
  void set_breakdown(bool b) { breakdown_ = b; }
  void add_matvecs(long c) { matvecs_ += c; }
  void add_embedding_warning() { ++embedding_warnings_; }

 private:
  OrthoState state_;      // holds k columns of V plus v_next
  Eigen::MatrixXd h_;     // capacity x capacity; (k+1, k) block in use
  Index k_ = 0;
  double beta_ = 0.0;
  bool breakdown_ = false;
  long matvecs_ = 0;
  int embedding_warnings_ = 0;
};

namespace detail {

// Runs Arnoldi steps until the factorization holds `target` columns.
inline void arnoldi_steps(const CsrMatrix& a, ArnoldiFactorization& fact, Index target) {
  OrthoState& st = fact.state();
  Eigen::MatrixXd& h = fact.h_storage();
  while (fact.size() < target) {
    const Index j = fact.size() + 1;  // columns currently held by st
    Eigen::VectorXd w = spmv(a, st.basis().col(j - 1));
    fact.add_matvecs(1);
    PushResult res = st.push(w);
    h.col(j - 1).head(j) = res.coeffs.head(j);
    h(j, j - 1) = res.coeffs[j];
    if (res.breakdown) {
      // Invariant subspace found: A V_j = V_j H_j exactly.
      fact.set_size(j);
      fact.set_beta(0.0);
      fact.set_breakdown(true);
      return;
    }
    // With an honest embedding the Omega-unit vector has Euclidean norm
    // near 1; a wild ratio flags embedding failure (warning only).
    const double true_norm = st.basis().col(j).norm();
    if (true_norm < 0.40 || true_norm > 2.9) fact.add_embedding_warning();
    fact.set_size(j);
    fact.set_beta(res.coeffs[j]);
  }
}

}  // namespace detail

/**
 * @brief Builds a k-step randomized Arnoldi factorization from v1.
 *
 * v1 is normalized internally to |Omega v1| = 1. Requires k + 1 <= d.
 * On a happy breakdown the factorization is returned at the reduced size
 * with the breakdown flag set. `capacity` preallocates for later
 * extension (defaults to k + 1).
 */
inline ArnoldiFactorization arnoldi_build(const CsrMatrix& a,
                                          const Eigen::Ref<const Eigen::VectorXd>& v1, Index k,
                                          const SketchOperator& op,
                                          OrthoMethod method = OrthoMethod::Rgs,
                                          Index capacity = -1) {
  if (a.n != op.cols()) throw InvalidDimension("arnoldi_build: matrix size != sketch columns");
  if (v1.size() != a.n) throw InvalidDimension("arnoldi_build: start vector length");
  if (k < 1) throw InvalidParameter("arnoldi_build: k >= 1 required");
  if (k + 1 > op.rows()) throw SketchCapacityError("arnoldi_build: k + 1 > d");
  if (v1.norm() == 0.0) throw InvalidParameter("arnoldi_build: zero start vector");
  if (capacity < 0) capacity = k + 1;

  ArnoldiFactorization fact(op, method, capacity);
  PushResult first = fact.state().push(v1);
  if (first.breakdown) throw InvalidParameter("arnoldi_build: start vector sketches to zero");
  detail::arnoldi_steps(a, fact, k);
  return fact;
}

/**
 * @brief Extends a factorization by p steps (to size k + p). The first k
 * columns of V and the leading k x k block of H are untouched. A
 * breakdown mid-extension returns the partial factorization with the
 * flag set.
 */
inline void arnoldi_extend(const CsrMatrix& a, ArnoldiFactorization& fact, Index p) {
  if (p < 0) throw InvalidParameter("arnoldi_extend: p >= 0");
  if (p == 0) return;
  if (fact.breakdown()) throw InvalidParameter("arnoldi_extend: factorization is in breakdown");
  if (fact.size() + p + 1 > fact.op().rows())
    throw SketchCapacityError("arnoldi_extend: k + p + 1 > d");
  const Index target = fact.size() + p;
  fact.state().ensure_capacity(target + 1);
  if (fact.h_storage().rows() < target + 1) {
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(target + 1, target + 1);
    grown.topLeftCorner(fact.h_storage().rows(), fact.h_storage().cols()) = fact.h_storage();
    fact.h_storage() = grown;
  }
  detail::arnoldi_steps(a, fact, target);
}

/// Relative Frobenius residual of the Arnoldi relation,
/// |A V - V H - beta v_next e_k^T|_F / |A V|_F.
inline double residual_check(const ArnoldiFactorization& fact, const CsrMatrix& a) {
  const Index k = fact.size();
  if (k == 0) return 0.0;
  Eigen::MatrixXd av(a.n, k);
  for (Index j = 0; j < k; ++j) av.col(j) = spmv(a, fact.v().col(j));
  Eigen::MatrixXd resid = av - fact.v() * fact.h();
  if (!fact.breakdown()) resid.col(k - 1) -= fact.beta() * fact.v_next();
  return resid.norm() / av.norm();
}

}  // namespace rira
