#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "rira/arnoldi.hpp"
#include "rira/generators.hpp"
#include "rira/hessenberg.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using rira::ArnoldiFactorization;
using rira::Complex;
using rira::CsrMatrix;
using rira::Index;
using rira::OrthoMethod;
using rira::SketchKind;
using rira::SketchOperator;
using testutil::random_vector;

namespace {

CsrMatrix identity_matrix(Index n) {
  std::vector<std::tuple<Index, Index, double>> trip;
  for (Index i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
  return CsrMatrix::from_triplets(n, trip);
}

CsrMatrix diag_matrix(Index n) {
  std::vector<std::tuple<Index, Index, double>> trip;
  for (Index i = 0; i < n; ++i) trip.emplace_back(i, i, double(i + 1));
  return CsrMatrix::from_triplets(n, trip);
}

CsrMatrix random_sparse(Index n, std::uint64_t seed, int per_row = 6) {
  rira::detail::CounterRng rng(seed, 0x735062ULL, 0);
  std::vector<std::tuple<Index, Index, double>> trip;
  for (Index i = 0; i < n; ++i) {
    trip.emplace_back(i, i, rng.next_symmetric() * 2.0);
    for (int e = 0; e < per_row; ++e)
      trip.emplace_back(i, static_cast<Index>(rng.next_below(n)), rng.next_symmetric());
  }
  return CsrMatrix::from_triplets(n, trip);
}

}  // namespace

TEST_CASE("identity matrix breaks down at the first step") {
  const Index n = 64;
  CsrMatrix eye = identity_matrix(n);
  SketchOperator op(SketchKind::Gaussian, n, 16, 3);
  ArnoldiFactorization fact = rira::arnoldi_build(eye, random_vector(n, 1), 5, op);
  CHECK(fact.breakdown());
  CHECK(fact.size() == 1);
  CHECK(fact.beta() == 0.0);
  CHECK(fact.h()(0, 0) == Catch::Approx(1.0).margin(1e-13));
}

TEST_CASE("identity-mode build matches the classical oracle") {
  const Index n = 100, k = 10;
  CsrMatrix a = diag_matrix(n);
  SketchOperator op(SketchKind::Identity, n, n);
  Eigen::VectorXd v1 = Eigen::VectorXd::Ones(n);
  ArnoldiFactorization fact = rira::arnoldi_build(a, v1, k, op, OrthoMethod::Rcgs2);
  auto oracle = rira::oracle::dense_arnoldi(a, v1, k);
  REQUIRE_FALSE(fact.breakdown());
  REQUIRE_FALSE(oracle.breakdown);
  CHECK((fact.h() - oracle.h).norm() <= 1e-12 * oracle.h.norm());
  CHECK((fact.v() - oracle.v).norm() <= 1e-12);
  CHECK(std::abs(fact.beta() - oracle.beta) <= 1e-12 * oracle.h.norm());
}

TEST_CASE("toy spectrum factorization approximates the extreme eigenvalues") {
  const Index n = 800, k = 50, d = 200;
  CsrMatrix a = rira::gen_toy_spectrum(n);
  SketchOperator op(SketchKind::Gaussian, n, d, 6);
  ArnoldiFactorization fact = rira::arnoldi_build(a, random_vector(n, 9), k, op);
  REQUIRE_FALSE(fact.breakdown());

  CHECK(rira::residual_check(fact, a) <= 1e-10);
  Eigen::MatrixXd gram = fact.s().transpose() * fact.s();
  CHECK((gram - Eigen::MatrixXd::Identity(k, k)).norm() <= 1e-10);
  CHECK((fact.s().transpose() * fact.s_next()).norm() <= 1e-10);
  CHECK(fact.embedding_warnings() == 0);

  double top = 0.0;
  for (const Complex& theta : rira::hessenberg_eigs(fact.h())) top = std::max(top, std::abs(theta));
  CHECK(top >= 780.0);
  CHECK(top <= 800.5);
}

TEST_CASE("extension by zero steps is the identity") {
  CsrMatrix a = random_sparse(120, 2);
  SketchOperator op(SketchKind::SparseSign, 120, 40, 5);
  ArnoldiFactorization fact = rira::arnoldi_build(a, random_vector(120, 3), 8, op);
  Eigen::MatrixXd v_before = fact.v();
  rira::arnoldi_extend(a, fact, 0);
  CHECK(fact.size() == 8);
  CHECK((fact.v() - v_before).norm() == 0.0);
}

TEST_CASE("build then extend equals the longer build") {
  const Index n = 200;
  CsrMatrix a = random_sparse(n, 4);
  SketchOperator op(SketchKind::Gaussian, n, 64, 7);
  Eigen::VectorXd v1 = random_vector(n, 5);

  ArnoldiFactorization grown = rira::arnoldi_build(a, v1, 10, op);
  rira::arnoldi_extend(a, grown, 5);
  ArnoldiFactorization direct = rira::arnoldi_build(a, v1, 15, op);

  REQUIRE(grown.size() == 15);
  CHECK((grown.v() - direct.v()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((grown.h() - direct.h()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(grown.beta() - direct.beta()) <= 1e-10);
}

TEST_CASE("extension past the sketch capacity is rejected") {
  const Index n = 100, d = 12;
  CsrMatrix a = random_sparse(n, 6);
  SketchOperator op(SketchKind::Gaussian, n, d, 8);
  ArnoldiFactorization fact = rira::arnoldi_build(a, random_vector(n, 6), 8, op);
  CHECK_THROWS_AS(rira::arnoldi_extend(a, fact, 4), rira::SketchCapacityError);
  CHECK_THROWS_AS(rira::arnoldi_build(a, random_vector(n, 6), d, op), rira::SketchCapacityError);
}

TEST_CASE("relation residual detects corruption") {
  const Index n = 500, k = 30;
  CsrMatrix a = random_sparse(n, 8);
  SketchOperator op(SketchKind::SparseSign, n, 128, 9);
  ArnoldiFactorization fact = rira::arnoldi_build(a, random_vector(n, 7), k, op);
  REQUIRE_FALSE(fact.breakdown());
  CHECK(rira::residual_check(fact, a) <= 1e-10);

  fact.h_storage().setZero();
  fact.set_beta(0.0);
  fact.set_breakdown(true);  // drop the residual term as well
  CHECK(rira::residual_check(fact, a) >= 0.5);
}

TEST_CASE("identical inputs give bit-identical factorizations") {
  const Index n = 150, k = 12;
  CsrMatrix a = random_sparse(n, 10);
  SketchOperator op(SketchKind::Srht, n, 48, 11);
  Eigen::VectorXd v1 = random_vector(n, 8);
  ArnoldiFactorization f1 = rira::arnoldi_build(a, v1, k, op);
  ArnoldiFactorization f2 = rira::arnoldi_build(a, v1, k, op);
  CHECK((f1.v() - f2.v()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f1.h() - f2.h()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f1.beta() == f2.beta());
}

TEST_CASE("stable methods agree columnwise from the same start") {
  const Index n = 300, k = 10;
  CsrMatrix a = random_sparse(n, 12);
  SketchOperator op(SketchKind::Gaussian, n, 80, 13);
  Eigen::VectorXd v1 = random_vector(n, 9);
  ArnoldiFactorization rgs = rira::arnoldi_build(a, v1, k, op, OrthoMethod::Rgs);
  ArnoldiFactorization rcgs2 = rira::arnoldi_build(a, v1, k, op, OrthoMethod::Rcgs2);
  CHECK((rgs.v() - rcgs2.v()).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((rgs.h() - rcgs2.h()).cwiseAbs().maxCoeff() <= 1e-8 * rcgs2.h().norm());
}

TEST_CASE("the residual is the characteristic polynomial direction") {
  const Index n = 300, kmax = 8;
  CsrMatrix a = random_sparse(n, 14);
  SketchOperator op(SketchKind::Gaussian, n, 64, 15);
  Eigen::VectorXd v1 = random_vector(n, 10);
  ArnoldiFactorization fact = rira::arnoldi_build(a, v1, kmax, op);
  REQUIRE_FALSE(fact.breakdown());
  Eigen::VectorXd v1n = fact.v().col(0);  // Omega-normalized start

  for (Index j = 2; j <= kmax; ++j) {
    // r_j = beta_j * v_{j+1} from the factorization prefix.
    Eigen::VectorXd r_j = (j < kmax) ? Eigen::VectorXd(fact.h()(j, j - 1) * fact.v().col(j))
                                     : Eigen::VectorXd(fact.beta() * fact.v_next());
    auto roots_j = rira::hessenberg_eigs(fact.h().topLeftCorner(j, j));
    auto roots_jm1 = rira::hessenberg_eigs(fact.h().topLeftCorner(j - 1, j - 1));
    Eigen::VectorXd pj = rira::oracle::poly_apply(a, roots_j, v1n);
    Eigen::VectorXd pjm1 = rira::oracle::poly_apply(a, roots_jm1, v1n);
    Eigen::VectorXd expected = pj / op.apply(pjm1).norm();
    CHECK((r_j - expected).norm() <= 1e-6 * expected.norm());
  }
}

TEST_CASE("the characteristic polynomial minimizes the sketched norm") {
  const Index n = 120, k = 5;
  CsrMatrix a = random_sparse(n, 16);
  SketchOperator op(SketchKind::Gaussian, n, 48, 17);
  Eigen::VectorXd v1 = random_vector(n, 11);
  ArnoldiFactorization fact = rira::arnoldi_build(a, v1, k, op);
  Eigen::VectorXd v1n = fact.v().col(0);

  auto roots = rira::hessenberg_eigs(fact.h());
  const double best = op.apply(rira::oracle::poly_apply(a, roots, v1n)).norm();

  rira::detail::CounterRng rng(19, 0x706f6cULL, 0);
  for (int trial = 0; trial < 100; ++trial) {
    // Random monic polynomial of degree k via conjugate-closed roots.
    std::vector<Complex> q;
    Index left = k;
    while (left > 0) {
      if (left >= 2 && rng.next_uniform() < 0.4) {
        const double re = 3.0 * rng.next_symmetric();
        const double im = 3.0 * rng.next_uniform() + 0.1;
        q.emplace_back(re, im);
        q.emplace_back(re, -im);
        left -= 2;
      } else {
        q.emplace_back(3.0 * rng.next_symmetric(), 0.0);
        left -= 1;
      }
    }
    const double other = op.apply(rira::oracle::poly_apply(a, q, v1n)).norm();
    CHECK(best <= other + 1e-8);
  }
}
