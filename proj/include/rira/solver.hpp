#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "rira/arnoldi.hpp"
#include "rira/csr.hpp"
#include "rira/errors.hpp"
#include "rira/hessenberg.hpp"
#include "rira/ortho.hpp"
#include "rira/prng.hpp"
#include "rira/sketch.hpp"

namespace rira {

/// Solver configuration. `nev` eigenpairs from the `which` end of the
/// spectrum are computed in a Krylov subspace of dimension `ncv`, plus
/// `extra` supplementary pairs that are tracked but (by default) not
/// required to converge. The sketch dimension defaults to 4 * ncv.
struct RiraConfig {
  Index nev = 6;
  Index ncv = 0;
  SpectrumTarget which = SpectrumTarget::LargestModulus;
  double tol = 1e-10;
  Index max_outer = 100;

  SketchKind sketch_kind = SketchKind::SparseSign;
  Index sketch_dim = 0;  // 0: use 4 * ncv (ignored for Identity)
  std::uint64_t seed = 0;
  int zeta = 8;
  OrthoMethod ortho = OrthoMethod::Rgs;

  Index extra = 4;
  /// Use the scale-free criterion sres / |theta| instead of sres.
  bool relative_criterion = false;
  /// Require the supplementary pairs to converge as well.
  bool converge_on_all = false;
  /// Record restart-legitimacy metrics in the report (costs extra
  /// matvecs per restart) and re-sketch the restart residual if the
  /// implicitly assembled sketch drifts.
  bool check_invariants = false;
  /// Store the Ritz vectors x = V y in the report pairs.
  bool materialize_ritz_vectors = false;

  Eigen::VectorXd v1;  // optional start vector; empty draws a seeded one
};

/// A Ritz approximation (theta, x = V y) with its sketched residual
/// |Omega(A x - theta x)| = beta |e_k^T y|. x is only stored when
/// requested.
struct RitzPair {
  Complex theta;
  Eigen::VectorXcd y;
  double sres = 0.0;
  Eigen::VectorXcd x;
};

struct IterationRecord {
  Index iter = 0;
  std::vector<Complex> wanted;
  double max_sres = 0.0;
  double min_sres = 0.0;
  std::vector<Complex> shifts;
  long matvecs = 0;
  double seconds = 0.0;
};

enum class SolveStatus { Converged, MaxIter, Breakdown };

struct RiraReport {
  SolveStatus status = SolveStatus::MaxIter;
  /// The requested pairs, criterion-ordered best first.
  std::vector<RitzPair> pairs;
  std::vector<IterationRecord> trace;
  Index outer_iterations = 0;
  long matvecs = 0;

  /// Embedding distortion measured on the final basis and the implied
  /// factor bounding true residuals: |Ax - theta x| / |x| <=
  /// residual_guarantee * sres for every reported pair.
  double epsilon_hat = std::numeric_limits<double>::quiet_NaN();
  double residual_guarantee = std::numeric_limits<double>::quiet_NaN();

  /// Worst restart-legitimacy metrics over the run (only populated with
  /// check_invariants): |S^T S - I|, |S^T (Omega r)|, and the relative
  /// Arnoldi relation residual right after each restart.
  double max_basis_orth_dev = std::numeric_limits<double>::quiet_NaN();
  double max_residual_orth_dev = std::numeric_limits<double>::quiet_NaN();
  double max_relation_residual = std::numeric_limits<double>::quiet_NaN();
  int implicit_sketch_corrections = 0;

  /// True residuals |Ax - theta x| / |x| per pair, filled by
  /// verify_true_residuals.
  std::vector<double> true_residuals;

  bool converged() const { return status != SolveStatus::MaxIter; }
};

/// Sketched residuals beta * |e_k^T y| for eigenpairs (theta, y) of H;
/// equals |Omega(A x - theta x)| for the Ritz vector x = V y.
inline std::vector<double> sketched_residuals(
    const ArnoldiFactorization& fact,
    const std::vector<std::pair<Complex, Eigen::VectorXcd>>& pairs) {
  const Index k = fact.size();
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [theta, y] : pairs) {
    (void)theta;
    if (y.size() != k) throw InvalidDimension("sketched_residuals: y length != k");
    out.push_back(fact.beta() * std::abs(y[k - 1]));
  }
  return out;
}

/// x = V y for a complex eigenvector y of H.
inline Eigen::VectorXcd ritz_vector(const ArnoldiFactorization& fact,
                                    const Eigen::Ref<const Eigen::VectorXcd>& y) {
  Eigen::VectorXcd x(fact.v().rows());
  x.real() = fact.v() * y.real();
  x.imag() = fact.v() * y.imag();
  return x;
}

struct RestartInfo {
  bool breakdown = false;
  /// The implicitly assembled sketch of the restart residual drifted and
  /// was replaced by a direct re-sketch.
  bool resketched = false;
};

/**
 * @brief Implicit restart: shifted QR sweeps on H, basis update
 * V+ = V Q(:, 1:k_eff), truncation, and the residual update
 *   r+ = H+(k_eff+1, k_eff) V Q(:, k_eff+1) + Q(m, k_eff) r_m.
 *
 * The sketched basis is updated in sketch space as S Q and the sketch of
 * r+ is assembled from sketched quantities without touching Omega
 * (implicit sketching). Column signs are normalized so H+ keeps a
 * nonnegative subdiagonal. A vanishing new residual flags breakdown
 * (invariant subspace; success).
 */
inline RestartInfo restart(ArnoldiFactorization& fact, const ShiftPlan& plan,
                           bool verify_sketch = false) {
  RestartInfo info;
  if (plan.shifts.empty()) return info;
  const Index m = fact.size();
  const Index ke = plan.k_effective;
  if (fact.breakdown()) throw InvalidParameter("restart: factorization is in breakdown");
  if (ke + static_cast<Index>(plan.shifts.size()) != m)
    throw InvalidParameter("restart: plan size does not match the factorization");

  QrSweepResult sw = shifted_qr_sweeps(fact.h(), plan.shifts);

  Eigen::MatrixXd vq = fact.v() * sw.q.leftCols(ke + 1);
  Eigen::MatrixXd squp = fact.s() * sw.q.leftCols(ke + 1);

  const double bhat = sw.h(ke, ke - 1);
  const double eta = sw.q(m - 1, ke - 1);
  Eigen::VectorXd r_new = bhat * vq.col(ke) + (eta * fact.beta()) * fact.v_next();
  Eigen::VectorXd sr_new = bhat * squp.col(ke) + (eta * fact.beta()) * fact.s_next();

  if (verify_sketch) {
    Eigen::VectorXd direct = fact.op().apply(r_new);
    const double dn = direct.norm();
    if (dn > 0.0 && std::abs(sr_new.norm() - dn) / dn > 1e-6) {
      sr_new = direct;
      info.resketched = true;
    }
  }

  // Flip column signs so the truncated Hessenberg keeps a nonnegative
  // subdiagonal (fixes the factorization's sign freedom).
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(ke);
  for (Index i = 1; i < ke; ++i)
    signs[i] = (sw.h(i, i - 1) >= 0.0) ? signs[i - 1] : -signs[i - 1];
  Eigen::MatrixXd hk = sw.h.topLeftCorner(ke, ke);
  for (Index i = 0; i < ke; ++i)
    for (Index j = 0; j < ke; ++j) hk(i, j) *= signs[i] * signs[j];
  for (Index j = 0; j < ke; ++j) {
    vq.col(j) *= signs[j];
    squp.col(j) *= signs[j];
  }
  r_new *= signs[ke - 1];
  sr_new *= signs[ke - 1];

  const double beta_new = sr_new.norm();
  Eigen::MatrixXd& h = fact.h_storage();
  h.setZero();
  h.topLeftCorner(ke, ke) = hk;

  const double scale = std::max(fact.state().breakdown_scale(), 1e-300);
  if (beta_new <= 1e-14 * scale) {
    fact.state().reset_columns(vq.leftCols(ke), squp.leftCols(ke));
    fact.set_size(ke);
    fact.set_beta(0.0);
    fact.set_breakdown(true);
    info.breakdown = true;
    return info;
  }

  Eigen::MatrixXd q0(vq.rows(), ke + 1);
  q0.leftCols(ke) = vq.leftCols(ke);
  q0.col(ke) = r_new / beta_new;
  Eigen::MatrixXd s0(squp.rows(), ke + 1);
  s0.leftCols(ke) = squp.leftCols(ke);
  s0.col(ke) = sr_new / beta_new;
  fact.state().reset_columns(q0, s0);
  h(ke, ke - 1) = beta_new;
  fact.set_size(ke);
  fact.set_beta(beta_new);
  return info;
}

/// Computes |A x - theta x| / |x| directly for every reported pair
/// (requires materialized Ritz vectors) and stores the values in the
/// report.
inline void verify_true_residuals(const CsrMatrix& a, RiraReport& report) {
  report.true_residuals.clear();
  for (const auto& pair : report.pairs) {
    if (pair.x.size() == 0)
      throw InvalidParameter("verify_true_residuals: Ritz vectors were not materialized");
    Eigen::VectorXcd ax(pair.x.size());
    ax.real() = spmv(a, pair.x.real());
    ax.imag() = spmv(a, pair.x.imag());
    report.true_residuals.push_back((ax - pair.theta * pair.x).norm() / pair.x.norm());
  }
}

namespace detail {

inline Eigen::VectorXd default_start_vector(Index n, std::uint64_t seed) {
  CounterRng rng(seed, 0x763153ULL, 0);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.next_normal();
  return v;
}

// Criterion-ordered indices of eigenvalues (best first).
inline std::vector<std::size_t> criterion_order(const std::vector<Complex>& eigs,
                                                SpectrumTarget which) {
  std::vector<std::size_t> order(eigs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key = [which](const Complex& z) {
    switch (which) {
      case SpectrumTarget::LargestModulus: return -std::abs(z);
      case SpectrumTarget::SmallestModulus: return std::abs(z);
      case SpectrumTarget::LargestReal: return -z.real();
      case SpectrumTarget::SmallestReal: return z.real();
    }
    return 0.0;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ka = key(eigs[a]);
    const double kb = key(eigs[b]);
    if (ka != kb) return ka < kb;
    if (eigs[a].imag() != eigs[b].imag()) return eigs[a].imag() < eigs[b].imag();
    return eigs[a].real() < eigs[b].real();
  });
  return order;
}

}  // namespace detail

/**
 * @brief Outer loop: build a (nev + extra)-step randomized Arnoldi
 * factorization, then repeatedly extend to ncv, take exact shifts from
 * the unwanted end of the Hessenberg spectrum, and restart, until every
 * tested pair has sketched residual at most tol.
 *
 * A happy breakdown at any point means an exact invariant subspace was
 * found; the exact pairs are extracted and the report is flagged
 * Breakdown (a success). Hitting max_outer returns MaxIter with the
 * best pairs and the full per-iteration trace.
 */
inline RiraReport rira_solve(const CsrMatrix& a, const RiraConfig& cfg) {
  const Index n = a.n;
  if (cfg.nev < 1) throw InvalidParameter("rira_solve: nev >= 1 required");
  if (cfg.ncv <= cfg.nev) throw InvalidParameter("rira_solve: ncv > nev required");
  if (n <= cfg.ncv) throw InvalidParameter("rira_solve: n > ncv required");
  if (!(cfg.tol > 0.0)) throw InvalidParameter("rira_solve: tol > 0 required");
  if (cfg.extra < 0) throw InvalidParameter("rira_solve: extra >= 0 required");
  if (cfg.nev + cfg.extra > cfg.ncv - 2)
    throw InvalidParameter("rira_solve: nev + extra must stay <= ncv - 2");

  const Index d = (cfg.sketch_kind == SketchKind::Identity)
                      ? n
                      : (cfg.sketch_dim > 0 ? cfg.sketch_dim : 4 * cfg.ncv);
  if (cfg.ncv + 1 > d) throw InvalidParameter("rira_solve: sketch dimension must exceed ncv");
  SketchOperator op(cfg.sketch_kind, n, d, cfg.seed, cfg.zeta);

  Eigen::VectorXd v1 =
      cfg.v1.size() > 0 ? cfg.v1 : detail::default_start_vector(n, cfg.seed);

  RiraReport rep;
  // Requested wanted-set size; the conjugate-pair rule may enlarge the
  // split by one within a single restart, never cumulatively.
  const Index k_base = cfg.nev + cfg.extra;
  ArnoldiFactorization fact = arnoldi_build(a, v1, k_base, op, cfg.ortho, cfg.ncv + 1);

  std::vector<std::pair<Complex, Eigen::VectorXcd>> wanted_pairs;
  std::vector<double> wanted_sres;

  for (Index iter = 1; iter <= cfg.max_outer && !fact.breakdown(); ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    arnoldi_extend(a, fact, cfg.ncv - fact.size());
    if (fact.breakdown()) {
      IterationRecord rec;
      rec.iter = iter;
      rec.wanted = hessenberg_eigs(fact.h());
      rec.matvecs = fact.matvec_count();
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rep.trace.push_back(rec);
      break;
    }

    std::vector<Complex> eigs = hessenberg_eigs(fact.h());
    ShiftPlan plan = select_shifts(eigs, k_base, cfg.which);
    if (plan.k_effective > cfg.ncv - 2)
      throw InvalidParameter("rira_solve: wanted set grew past ncv - 2 (conjugate pair rule)");

    wanted_pairs.clear();
    for (const Complex& theta : plan.wanted)
      wanted_pairs.emplace_back(theta, hessenberg_eigvec(fact.h(), theta));
    wanted_sres = sketched_residuals(fact, wanted_pairs);

    IterationRecord rec;
    rec.iter = iter;
    rec.wanted = plan.wanted;
    rec.shifts = plan.shifts;
    rec.max_sres = *std::max_element(wanted_sres.begin(), wanted_sres.end());
    rec.min_sres = *std::min_element(wanted_sres.begin(), wanted_sres.end());
    rec.matvecs = fact.matvec_count();
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.trace.push_back(rec);

    const std::size_t ntest = cfg.converge_on_all
                                  ? wanted_pairs.size()
                                  : std::min<std::size_t>(wanted_pairs.size(),
                                                          static_cast<std::size_t>(cfg.nev));
    bool all_converged = true;
    for (std::size_t i = 0; i < ntest && all_converged; ++i) {
      const double value = cfg.relative_criterion
                               ? wanted_sres[i] / std::max(std::abs(wanted_pairs[i].first),
                                                           std::numeric_limits<double>::min())
                               : wanted_sres[i];
      all_converged = value <= cfg.tol;
    }
    if (all_converged) {
      rep.status = SolveStatus::Converged;
      break;
    }
    if (iter == cfg.max_outer) break;

    RestartInfo ri = restart(fact, plan, cfg.check_invariants);
    if (ri.resketched) ++rep.implicit_sketch_corrections;

    if (cfg.check_invariants && !fact.breakdown()) {
      Eigen::MatrixXd gram = fact.s().transpose() * fact.s();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(gram, Eigen::EigenvaluesOnly);
      const double dev = (eg.eigenvalues().array() - 1.0).abs().maxCoeff();
      const double ro = (fact.s().transpose() * (fact.beta() * fact.s_next())).norm();
      const double rel = residual_check(fact, a);
      auto bump = [](double& slot, double v) { slot = std::isnan(slot) ? v : std::max(slot, v); };
      bump(rep.max_basis_orth_dev, dev);
      bump(rep.max_residual_orth_dev, ro);
      bump(rep.max_relation_residual, rel);
    }
  }

  // Final pair extraction.
  if (fact.breakdown()) {
    rep.status = SolveStatus::Breakdown;
    std::vector<Complex> eigs = hessenberg_eigs(fact.h());
    const auto order = detail::criterion_order(eigs, cfg.which);
    wanted_pairs.clear();
    wanted_sres.clear();
    const std::size_t kw = std::min<std::size_t>(order.size(), static_cast<std::size_t>(k_base));
    for (std::size_t i = 0; i < kw; ++i) {
      const Complex theta = eigs[order[i]];
      wanted_pairs.emplace_back(theta, hessenberg_eigvec(fact.h(), theta));
      wanted_sres.push_back(0.0);
    }
  }

  const std::size_t nreport =
      std::min<std::size_t>(wanted_pairs.size(), static_cast<std::size_t>(cfg.nev));
  for (std::size_t i = 0; i < nreport; ++i) {
    RitzPair pair;
    pair.theta = wanted_pairs[i].first;
    pair.y = wanted_pairs[i].second;
    pair.sres = wanted_sres[i];
    if (cfg.materialize_ritz_vectors) pair.x = ritz_vector(fact, pair.y);
    rep.pairs.push_back(std::move(pair));
  }

  rep.outer_iterations = static_cast<Index>(rep.trace.size());
  rep.matvecs = fact.matvec_count();

  try {
    Eigen::MatrixXd basis(n, fact.size() + (fact.breakdown() ? 0 : 1));
    basis.leftCols(fact.size()) = fact.v();
    if (!fact.breakdown()) basis.col(fact.size()) = fact.v_next();
    rep.epsilon_hat = measure_embedding(op, basis);
    rep.residual_guarantee = rep.epsilon_hat < 1.0
                                 ? std::sqrt((1.0 + rep.epsilon_hat) / (1.0 - rep.epsilon_hat))
                                 : std::numeric_limits<double>::infinity();
  } catch (const InvalidParameter&) {
    // Rank-deficient final basis: leave the guarantee unset.
  }
  return rep;
}

}  // namespace rira
