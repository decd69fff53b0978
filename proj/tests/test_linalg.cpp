#include <catch2/catch_amalgamated.hpp>

#include "dfop/linalg.hpp"
#include "dfop/rng.hpp"
#include "oracles.hpp"

using dfop::Rng;
using dfop::SymMatrix;
using dfop::Vec;

TEST_CASE("downdate with zero x rescales by 1/alpha") {
  const SymMatrix p = SymMatrix::identity(2);
  const Vec x{0.0, 0.0};
  const SymMatrix out = dfop::outer_rank1_downdate(p, x, 0.5, 0.5);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(1, 1) == 2.0);
  CHECK(out(0, 1) == 0.0);
}

TEST_CASE("downdate 1-d hand value") {
  // alpha = beta = 1, P = [1], x = [1]: (1*1 + 1*1)^-1 = 1/2.
  SymMatrix p(1);
  p(0, 0) = 1.0;
  const SymMatrix out = dfop::outer_rank1_downdate(p, Vec{1.0}, 1.0, 1.0);
  CHECK_THAT(out(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("downdate matches explicit inversion on random SPD inputs") {
  Rng rng(2024);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.next_u64() % 8);
    const SymMatrix p = testref::random_spd(rng, d);
    const Vec x = testref::random_vec(rng, d, rng.uniform(0.0, 10.0 / std::sqrt(double(d))));
    const double alpha = rng.uniform(0.3, 1.0);
    const double beta = rng.uniform(0.0, 2.0);

    const SymMatrix got = dfop::outer_rank1_downdate(p, x, alpha, beta);
    const Eigen::MatrixXd want = testref::downdate_by_inversion(p, x, alpha, beta);
    const double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
    REQUIRE((testref::to_eigen(got) - want).cwiseAbs().maxCoeff() <= 1e-9 * scale);

    // Defining property, checked without any inversion of the result:
    // got * (alpha P^{-1} + beta x x^T) = I.
    const Eigen::MatrixXd m =
        alpha * testref::to_eigen(p).inverse() +
        beta * testref::to_eigen(x) * testref::to_eigen(x).transpose();
    const Eigen::MatrixXd prod = testref::to_eigen(got) * m;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    REQUIRE((prod - eye).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("downdate output stays numerically symmetric over long chains") {
  Rng rng(7);
  SymMatrix p = SymMatrix::identity(5, 1e3);
  for (int step = 0; step < 20000; ++step) {
    const Vec x = testref::random_vec(rng, 5);
    p = dfop::outer_rank1_downdate(p, x, 0.99, 0.01);
    REQUIRE(p.max_asymmetry() <= 1e-12);
  }
}

TEST_CASE("downdate rejects bad parameters") {
  const SymMatrix p = SymMatrix::identity(2);
  CHECK_THROWS_AS(dfop::outer_rank1_downdate(p, Vec{1.0, 0.0}, 0.0, 1.0),
                  dfop::ParameterError);
  CHECK_THROWS_AS(dfop::outer_rank1_downdate(p, Vec{1.0, 0.0}, -0.5, 1.0),
                  dfop::ParameterError);
  CHECK_THROWS_AS(dfop::outer_rank1_downdate(p, Vec{1.0, 0.0}, 1.0, -1e-9),
                  dfop::ParameterError);
  CHECK_THROWS_AS(dfop::outer_rank1_downdate(p, Vec{1.0}, 1.0, 1.0),
                  dfop::ParameterError);
}

TEST_CASE("solve_spd on easy diagonal systems") {
  SymMatrix a(2);
  a(0, 0) = 2.0;
  a(1, 1) = 8.0;
  const Vec x = dfop::solve_spd(a, Vec{2.0, 8.0});
  CHECK_THAT(x[0], Catch::Matchers::WithinAbs(1.0, 1e-14));
  CHECK_THAT(x[1], Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("solve_spd agrees with the reference solver and has small residual") {
  Rng rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.next_u64() % 10);
    const SymMatrix a = testref::random_spd(rng, d);
    const Vec b = testref::random_vec(rng, d, 3.0);
    const Vec x = dfop::solve_spd(a, b);

    const Eigen::VectorXd ref = testref::to_eigen(a).ldlt().solve(testref::to_eigen(b));
    REQUIRE((testref::to_eigen(x) - ref).cwiseAbs().maxCoeff() <=
            1e-8 * std::max(1.0, ref.cwiseAbs().maxCoeff()));

    const Eigen::VectorXd resid =
        testref::to_eigen(a) * testref::to_eigen(x) - testref::to_eigen(b);
    REQUIRE(resid.norm() <= 1e-8 * std::max(1.0, testref::to_eigen(b).norm()));
  }
}

TEST_CASE("solve_spd reports the failing pivot on indefinite input") {
  SymMatrix a(3);
  a(0, 0) = 1.0;
  a(1, 1) = -1.0;
  a(2, 2) = 1.0;
  try {
    dfop::solve_spd(a, Vec{1.0, 1.0, 1.0});
    FAIL("expected SingularMatrixError");
  } catch (const dfop::SingularMatrixError& e) {
    CHECK(e.pivot() == 1);
  }
}

TEST_CASE("solve_spd rejects the all-zero matrix at pivot 0") {
  const SymMatrix a(2);
  try {
    dfop::solve_spd(a, Vec{1.0, 1.0});
    FAIL("expected SingularMatrixError");
  } catch (const dfop::SingularMatrixError& e) {
    CHECK(e.pivot() == 0);
  }
}

TEST_CASE("spectral norm of simple matrices") {
  CHECK_THAT(dfop::spectral_norm(SymMatrix::identity(3)),
             Catch::Matchers::WithinAbs(1.0, 1e-12));
  SymMatrix a(2);
  a(0, 0) = 3.0;
  a(1, 1) = -5.0;  // largest magnitude eigenvalue is negative
  CHECK_THAT(dfop::spectral_norm(a), Catch::Matchers::WithinAbs(5.0, 1e-12));
  CHECK(dfop::spectral_norm(SymMatrix(4)) == 0.0);
}

TEST_CASE("eigenvalues agree with the reference eigensolver") {
  Rng rng(512);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.next_u64() % 9);
    Eigen::MatrixXd g(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal();
      }
    }
    const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
    const SymMatrix a = testref::from_eigen(sym);

    Vec got = dfop::symmetric_eigenvalues(a);
    std::sort(got.begin(), got.end());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd want = es.eigenvalues();  // ascending

    const double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < d; ++i) {
      REQUIRE(std::abs(got[i] - want(static_cast<Eigen::Index>(i))) <= 1e-9 * scale);
    }
    REQUIRE(std::abs(dfop::spectral_norm(a) - want.cwiseAbs().maxCoeff()) <=
            1e-9 * scale);
    REQUIRE(std::abs(dfop::min_eigenvalue(a) - want(0)) <= 1e-9 * scale);
  }
}

TEST_CASE("dot and norm2 basics") {
  CHECK(dfop::dot(Vec{1.0, 2.0}, Vec{3.0, -1.0}) == 1.0);
  CHECK(dfop::norm2(Vec{3.0, 4.0}) == 5.0);
  CHECK_THROWS_AS(dfop::dot(Vec{1.0}, Vec{1.0, 2.0}), dfop::ParameterError);
}
