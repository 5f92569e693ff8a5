#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "rira/errors.hpp"

namespace rira {

using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Part of the spectrum to keep: largest/smallest modulus, largest/
/// smallest real part.
enum class SpectrumTarget { LargestModulus, SmallestModulus, LargestReal, SmallestReal };

/// Exact-shift split of a Hessenberg spectrum: the k_effective wanted
/// values (criterion-ordered, best first) and the remaining values to be
/// used as shifts. Conjugate pairs never straddle the two sides;
/// k_effective exceeds the requested k by one when keeping a pair
/// together requires it.
struct ShiftPlan {
  std::vector<Complex> wanted;
  std::vector<Complex> shifts;
  Index k_effective = 0;
};

namespace detail {

inline double subdiag_threshold(const Eigen::MatrixXd& h, Index i) {
  return std::numeric_limits<double>::epsilon() *
         (std::abs(h(i - 1, i - 1)) + std::abs(h(i, i)));
}

inline void zero_small_subdiagonals(Eigen::MatrixXd& h) {
  for (Index i = 1; i < h.rows(); ++i)
    if (std::abs(h(i, i - 1)) <= subdiag_threshold(h, i)) h(i, i - 1) = 0.0;
}

inline void enforce_hessenberg(Eigen::MatrixXd& h) {
  for (Index i = 2; i < h.rows(); ++i)
    for (Index j = 0; j + 1 < i; ++j) h(i, j) = 0.0;
}

// Householder reflector P = I - beta v v^T with P x = alpha e1 for a
// 3-vector x; v[0] is kept unnormalized.
inline bool house3(double x, double y, double z, double v[3], double& beta) {
  const double nrm = std::sqrt(x * x + y * y + z * z);
  if (nrm == 0.0) return false;
  const double alpha = (x >= 0.0) ? -nrm : nrm;
  v[0] = x - alpha;
  v[1] = y;
  v[2] = z;
  const double vsq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  if (vsq == 0.0) return false;
  beta = 2.0 / vsq;
  return true;
}

inline void house3_left(Eigen::MatrixXd& a, Index r, Index c0, const double v[3], double beta) {
  for (Index j = c0; j < a.cols(); ++j) {
    const double dot = v[0] * a(r, j) + v[1] * a(r + 1, j) + v[2] * a(r + 2, j);
    const double f = beta * dot;
    a(r, j) -= f * v[0];
    a(r + 1, j) -= f * v[1];
    a(r + 2, j) -= f * v[2];
  }
}

inline void house3_right(Eigen::MatrixXd& a, Index c, Index r1, const double v[3], double beta) {
  for (Index i = 0; i <= r1; ++i) {
    const double dot = v[0] * a(i, c) + v[1] * a(i, c + 1) + v[2] * a(i, c + 2);
    const double f = beta * dot;
    a(i, c) -= f * v[0];
    a(i, c + 1) -= f * v[1];
    a(i, c + 2) -= f * v[2];
  }
}

// Givens rotation zeroing y against x, applied as a similarity on rows/
// columns (r, r+1).
inline bool givens(double x, double y, double& c, double& s) {
  const double nrm = std::hypot(x, y);
  if (nrm == 0.0) return false;
  c = x / nrm;
  s = y / nrm;
  return true;
}

inline void givens_left(Eigen::MatrixXd& a, Index r, Index c0, double c, double s) {
  for (Index j = c0; j < a.cols(); ++j) {
    const double u = a(r, j);
    const double w = a(r + 1, j);
    a(r, j) = c * u + s * w;
    a(r + 1, j) = -s * u + c * w;
  }
}

inline void givens_right(Eigen::MatrixXd& a, Index col, Index r1, double c, double s) {
  for (Index i = 0; i <= r1; ++i) {
    const double u = a(i, col);
    const double w = a(i, col + 1);
    a(i, col) = c * u + s * w;
    a(i, col + 1) = -s * u + c * w;
  }
}

// Implicit double-shift (Francis) step on the unreduced block [lo, hi]
// of the full matrix h, with shift polynomial lambda^2 - s lambda + t.
// Rotations act on the full rows/columns so coupling blocks stay
// consistent; q, when given, accumulates the similarity.
inline void francis_step(Eigen::MatrixXd& h, Index lo, Index hi, double s, double t,
                         Eigen::MatrixXd* q) {
  const Index m = h.rows();
  if (hi - lo + 1 == 2) {
    const double x = h(lo, lo) * h(lo, lo) + h(lo, lo + 1) * h(lo + 1, lo) - s * h(lo, lo) + t;
    const double y = h(lo + 1, lo) * (h(lo, lo) + h(lo + 1, lo + 1) - s);
    double c, sn;
    if (!givens(x, y, c, sn)) return;
    givens_left(h, lo, lo > 0 ? lo - 1 : 0, c, sn);
    givens_right(h, lo, std::min(lo + 2, hi), c, sn);
    if (q) givens_right(*q, lo, m - 1, c, sn);
    return;
  }

  double x = h(lo, lo) * h(lo, lo) + h(lo, lo + 1) * h(lo + 1, lo) - s * h(lo, lo) + t;
  double y = h(lo + 1, lo) * (h(lo, lo) + h(lo + 1, lo + 1) - s);
  double z = h(lo + 1, lo) * h(lo + 2, lo + 1);

  for (Index k = lo; k <= hi - 2; ++k) {
    double v[3];
    double beta;
    if (house3(x, y, z, v, beta)) {
      house3_left(h, k, k > 0 ? k - 1 : 0, v, beta);
      house3_right(h, k, std::min(k + 3, hi), v, beta);
      if (q) house3_right(*q, k, m - 1, v, beta);
    }
    x = h(k + 1, k);
    y = h(k + 2, k);
    z = (k + 3 <= hi) ? h(k + 3, k) : 0.0;
  }

  // Trailing bulge entry h(hi, hi-2).
  double c, sn;
  if (givens(x, y, c, sn)) {
    givens_left(h, hi - 1, hi - 2, c, sn);
    givens_right(h, hi - 1, hi, c, sn);
    if (q) givens_right(*q, hi - 1, m - 1, c, sn);
  }
}

// Implicit single-shift step on the unreduced block [lo, hi].
inline void single_shift_step(Eigen::MatrixXd& h, Index lo, Index hi, double mu,
                              Eigen::MatrixXd* q) {
  const Index m = h.rows();
  double x = h(lo, lo) - mu;
  double y = h(lo + 1, lo);
  for (Index k = lo; k <= hi - 1; ++k) {
    if (k > lo) {
      x = h(k, k - 1);
      y = h(k + 1, k - 1);
    }
    double c, sn;
    if (!givens(x, y, c, sn)) continue;
    givens_left(h, k, k > 0 ? k - 1 : 0, c, sn);
    givens_right(h, k, std::min(k + 2, hi), c, sn);
    if (q) givens_right(*q, k, m - 1, c, sn);
  }
}

// Eigenvalues of the 2x2 block [[a, b], [c, d]], exactly conjugate when
// complex.
inline std::pair<Complex, Complex> eig2x2(double a, double b, double c, double d) {
  const double mean = 0.5 * (a + d);
  const double det = a * d - b * c;
  const double disc = mean * mean - det;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double l1 = mean + std::copysign(sq, mean);
    const double l2 = (l1 != 0.0) ? det / l1 : mean - std::copysign(sq, mean);
    return {Complex(l1, 0.0), Complex(l2, 0.0)};
  }
  const double im = std::sqrt(-disc);
  return {Complex(mean, im), Complex(mean, -im)};
}

// Maximal unreduced diagonal blocks [lo, hi] of a Hessenberg matrix.
inline std::vector<std::pair<Index, Index>> unreduced_blocks(const Eigen::MatrixXd& h) {
  std::vector<std::pair<Index, Index>> blocks;
  const Index m = h.rows();
  Index lo = 0;
  for (Index i = 1; i <= m; ++i) {
    if (i == m || h(i, i - 1) == 0.0) {
      blocks.emplace_back(lo, i - 1);
      lo = i;
    }
  }
  return blocks;
}

}  // namespace detail

/**
 * @brief Eigenvalues of a real upper Hessenberg matrix.
 *
 * Internal Francis double-shift QR iteration with deflation on
 * negligible subdiagonals; complex eigenvalues come out in exact
 * conjugate pairs. Throws IterationLimitError after 30*m sweeps.
 */
inline std::vector<Complex> hessenberg_eigs(Eigen::MatrixXd h) {
  const Index m = h.rows();
  if (m < 1 || h.cols() != m) throw InvalidDimension("hessenberg_eigs: square m >= 1 required");
  detail::enforce_hessenberg(h);

  std::vector<Complex> eigs(static_cast<std::size_t>(m));
  Index hi = m - 1;
  Index sweeps = 0;
  Index stagnant = 0;
  const Index max_sweeps = 30 * m;

  while (hi >= 0) {
    if (hi == 0) {
      eigs[0] = Complex(h(0, 0), 0.0);
      break;
    }
    // Deflate within the active window.
    for (Index i = hi; i >= 1; --i)
      if (std::abs(h(i, i - 1)) <= detail::subdiag_threshold(h, i)) h(i, i - 1) = 0.0;

    Index lo = hi;
    while (lo > 0 && h(lo, lo - 1) != 0.0) --lo;

    if (lo == hi) {
      eigs[static_cast<std::size_t>(hi)] = Complex(h(hi, hi), 0.0);
      --hi;
      stagnant = 0;
      continue;
    }
    if (lo == hi - 1) {
      auto [l1, l2] = detail::eig2x2(h(lo, lo), h(lo, hi), h(hi, lo), h(hi, hi));
      eigs[static_cast<std::size_t>(lo)] = l1;
      eigs[static_cast<std::size_t>(hi)] = l2;
      hi -= 2;
      stagnant = 0;
      continue;
    }

    if (++sweeps > max_sweeps)
      throw IterationLimitError("hessenberg_eigs: no convergence after 30*m sweeps");
    double s, t;
    if (++stagnant % 11 == 0) {
      // Exceptional shift to break potential cycling.
      const double w = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1));
      s = 2.0 * w;
      t = w * w;
    } else {
      s = h(hi - 1, hi - 1) + h(hi, hi);
      t = h(hi - 1, hi - 1) * h(hi, hi) - h(hi - 1, hi) * h(hi, hi - 1);
    }
    detail::francis_step(h, lo, hi, s, t, nullptr);
  }
  return eigs;
}

/**
 * @brief Unit eigenvector of a Hessenberg matrix for a known eigenvalue.
 *
 * Two shifted inverse-iteration steps from a fixed start; a singular
 * solve is retried with theta perturbed by 1e-12 |H|. The phase is
 * normalized so the largest entry is real positive.
 */
inline Eigen::VectorXcd hessenberg_eigvec(const Eigen::Ref<const Eigen::MatrixXd>& h,
                                          Complex theta) {
  const Index m = h.rows();
  if (m < 1 || h.cols() != m) throw InvalidDimension("hessenberg_eigvec: square m >= 1 required");
  if (m == 1) return Eigen::VectorXcd::Ones(1);

  const double scale = h.norm();
  const double pivot_floor = 1e-307;

  // Hessenberg LU solve of (H - shift I) z = b with adjacent-row
  // pivoting; returns false on a pivot too small to trust.
  auto solve = [&](Complex shift, const Eigen::VectorXcd& b, Eigen::VectorXcd& z,
                   bool allow_floor) -> bool {
    Eigen::MatrixXcd a = h.cast<Complex>();
    a.diagonal().array() -= shift;
    z = b;
    for (Index k = 0; k + 1 < m; ++k) {
      if (std::abs(a(k + 1, k)) > std::abs(a(k, k))) {
        a.row(k).tail(m - k).swap(a.row(k + 1).tail(m - k));
        std::swap(z[k], z[k + 1]);
      }
      Complex pivot = a(k, k);
      if (std::abs(pivot) < pivot_floor) {
        if (!allow_floor) return false;
        pivot = Complex(pivot_floor, 0.0);
        a(k, k) = pivot;
      }
      const Complex f = a(k + 1, k) / pivot;
      a.row(k + 1).tail(m - k) -= f * a.row(k).tail(m - k);
      z[k + 1] -= f * z[k];
    }
    if (std::abs(a(m - 1, m - 1)) < pivot_floor) {
      if (!allow_floor) return false;
      a(m - 1, m - 1) = Complex(pivot_floor, 0.0);
    }
    for (Index i = m - 1; i >= 0; --i) {
      Complex acc = z[i];
      for (Index j = i + 1; j < m; ++j) acc -= a(i, j) * z[j];
      z[i] = acc / a(i, i);
      if (i == 0) break;
    }
    return true;
  };

  Eigen::VectorXcd y = Eigen::VectorXcd::Constant(m, Complex(1.0 / std::sqrt(double(m)), 0.0));
  Complex shift = theta;
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXcd z;
    if (!solve(shift, y, z, false)) {
      shift = theta + Complex(1e-12 * scale, 0.0);
      if (!solve(shift, y, z, true)) z = y;
    }
    const double nrm = z.norm();
    if (nrm > 0.0) y = z / nrm;
  }

  Index imax = 0;
  y.cwiseAbs().maxCoeff(&imax);
  const Complex lead = y[imax];
  if (std::abs(lead) > 0.0) y *= std::conj(lead) / std::abs(lead);
  y.normalize();
  return y;
}

/**
 * @brief Exact-shift selection: sorts the spectrum by the target
 * criterion, keeps the best k as wanted, the rest as shifts. A conjugate
 * pair straddling the cut is kept together on the wanted side
 * (k_effective = k + 1). Ties on the sort key break by ascending
 * imaginary then ascending real part.
 */
inline ShiftPlan select_shifts(const std::vector<Complex>& eigs, Index k, SpectrumTarget which) {
  const Index m = static_cast<Index>(eigs.size());
  if (k < 1 || k >= m) throw InvalidParameter("select_shifts: need 1 <= k < m");

  auto key = [which](const Complex& z) -> double {
    switch (which) {
      case SpectrumTarget::LargestModulus: return -std::abs(z);
      case SpectrumTarget::SmallestModulus: return std::abs(z);
      case SpectrumTarget::LargestReal: return -z.real();
      case SpectrumTarget::SmallestReal: return z.real();
    }
    return 0.0;
  };

  std::vector<Index> order(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ka = key(eigs[static_cast<std::size_t>(a)]);
    const double kb = key(eigs[static_cast<std::size_t>(b)]);
    if (ka != kb) return ka < kb;
    const Complex& za = eigs[static_cast<std::size_t>(a)];
    const Complex& zb = eigs[static_cast<std::size_t>(b)];
    if (za.imag() != zb.imag()) return za.imag() < zb.imag();
    return za.real() < zb.real();
  });

  Index k_eff = k;
  const Complex& cut = eigs[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])];
  const Complex& next = eigs[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
  const double tol = 1e-12 * (1.0 + std::abs(cut));
  if (cut.imag() != 0.0 && std::abs(next.real() - cut.real()) <= tol &&
      std::abs(next.imag() + cut.imag()) <= tol)
    k_eff = k + 1;

  ShiftPlan plan;
  plan.k_effective = k_eff;
  for (Index i = 0; i < k_eff; ++i)
    plan.wanted.push_back(eigs[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  for (Index i = k_eff; i < m; ++i)
    plan.shifts.push_back(eigs[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  return plan;
}

struct QrSweepResult {
  Eigen::MatrixXd h;  // similar Hessenberg matrix Q^T H Q
  Eigen::MatrixXd q;  // accumulated orthogonal update
};

/**
 * @brief Deterministic shifted QR sweeps on a Hessenberg matrix.
 *
 * Each real shift is one implicit single step; each conjugate pair is
 * one implicit double (Francis) step, so arithmetic stays real. Shifts
 * are applied blockwise between deflation points, with negligible
 * subdiagonals zeroed before each sweep and everything below the first
 * subdiagonal zeroed after it. The shift list must be conjugate-closed.
 */
inline QrSweepResult shifted_qr_sweeps(const Eigen::Ref<const Eigen::MatrixXd>& h_in,
                                       const std::vector<Complex>& shifts) {
  const Index m = h_in.rows();
  if (m < 1 || h_in.cols() != m) throw InvalidDimension("shifted_qr_sweeps: square input required");
  QrSweepResult out{h_in, Eigen::MatrixXd::Identity(m, m)};
  detail::enforce_hessenberg(out.h);

  std::vector<bool> done(shifts.size(), false);
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    if (done[i]) continue;
    const Complex mu = shifts[i];
    const bool is_real = std::abs(mu.imag()) <= 1e-12 * (1.0 + std::abs(mu));
    if (!is_real) {
      bool paired = false;
      for (std::size_t j = i + 1; j < shifts.size() && !paired; ++j) {
        if (done[j]) continue;
        const double tol = 1e-10 * (1.0 + std::abs(mu));
        if (std::abs(shifts[j].real() - mu.real()) <= tol &&
            std::abs(shifts[j].imag() + mu.imag()) <= tol) {
          done[j] = true;
          paired = true;
        }
      }
      if (!paired) throw InvalidParameter("shifted_qr_sweeps: shifts not conjugate-closed");
    }
    done[i] = true;

    detail::zero_small_subdiagonals(out.h);
    for (const auto& [lo, hi] : detail::unreduced_blocks(out.h)) {
      if (hi == lo) continue;
      if (is_real)
        detail::single_shift_step(out.h, lo, hi, mu.real(), &out.q);
      else
        detail::francis_step(out.h, lo, hi, 2.0 * mu.real(), std::norm(mu), &out.q);
    }
    detail::enforce_hessenberg(out.h);
  }
  return out;
}

}  // namespace rira
