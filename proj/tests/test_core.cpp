#include <doctest.h>

#include <cmath>

#include "core.hpp"
#include "rng.hpp"

using namespace spikedim;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_symmetric(int k, std::uint64_t seed) {
    Rng r(seed);
    MatrixXd m(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = r.normal();
    return 0.5 * (m + m.transpose());
}

} // namespace

TEST_CASE("DataMatrix validates its inputs") {
    MatrixXd ok(2, 3);
    ok << 1, 2, 3, 4, 5, 6;
    CHECK_NOTHROW(DataMatrix(ok));
    CHECK_THROWS_AS(DataMatrix(MatrixXd::Zero(0, 3)), DataError);
    CHECK_THROWS_AS(DataMatrix(MatrixXd::Zero(2, 1)), DataError);
    CHECK_THROWS_AS(DataMatrix(ok, 0.0), ConfigError);
    CHECK_THROWS_AS(DataMatrix(ok, -1.0), ConfigError);
    MatrixXd bad = ok;
    bad(1, 2) = std::nan("");
    CHECK_THROWS_AS(DataMatrix{bad}, DataError);
    bad(1, 2) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(DataMatrix{bad}, DataError);
}

TEST_CASE("CovarianceMatrix symmetrizes mild asymmetry and rejects gross") {
    MatrixXd m(2, 2);
    m << 2.0, 1.0 + 1e-12, 1.0, 2.0;
    CovarianceMatrix c(m);
    CHECK(c.values(0, 1) == c.values(1, 0));
    CHECK(c.values(0, 1) == doctest::Approx(1.0).epsilon(1e-10));

    MatrixXd gross(2, 2);
    gross << 2.0, 1.0, -1.0, 2.0;
    CHECK_THROWS_AS(CovarianceMatrix{gross}, DataError);
    CHECK_THROWS_AS(CovarianceMatrix{MatrixXd::Zero(2, 3)}, DataError);
}

TEST_CASE("sample covariance: tiny case by hand") {
    // Two channels, two samples: row means are (1.5, 0); centered rows are
    // (-0.5, 0.5) and (0, 0), so the covariance is [[0.25, 0], [0, 0]].
    MatrixXd y(2, 2);
    y << 1, 2, 0, 0;
    const CovarianceMatrix c = sample_covariance(DataMatrix(y));
    CHECK(c.values(0, 0) == doctest::Approx(0.25));
    CHECK(c.values(0, 1) == doctest::Approx(0.0));
    CHECK(c.values(1, 1) == doctest::Approx(0.0));

    // Uncentered: E[y y'] with divisor T.
    const CovarianceMatrix u = sample_covariance(DataMatrix(y), false);
    CHECK(u.values(0, 0) == doctest::Approx(2.5));  // (1 + 4) / 2
}

TEST_CASE("sample covariance of constant data is zero") {
    const CovarianceMatrix c =
        sample_covariance(DataMatrix(MatrixXd::Constant(3, 50, 7.0)));
    CHECK(c.values.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("sample covariance converges to the population covariance") {
    // Independent channels with variances 4, 1, 1.
    Rng r(3);
    const int T = 200000;
    MatrixXd y(3, T);
    for (int t = 0; t < T; ++t) {
        y(0, t) = 2.0 * r.normal();
        y(1, t) = r.normal();
        y(2, t) = r.normal();
    }
    const CovarianceMatrix c = sample_covariance(DataMatrix(y));
    CHECK(c.values(0, 0) == doctest::Approx(4.0).epsilon(0.05));
    CHECK(c.values(1, 1) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(c.values(2, 2) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(c.values(0, 1)) < 0.05);
    CHECK(std::abs(c.values(1, 2)) < 0.05);
}

TEST_CASE("eigen decomposition: diagonal and identity cases") {
    MatrixXd d = VectorXd{{1.0, 3.0, 2.0}}.asDiagonal();
    const EigenDecomposition e = eigen_decompose(CovarianceMatrix(d));
    CHECK(e.eigenvalues(0) == doctest::Approx(3.0));
    CHECK(e.eigenvalues(1) == doctest::Approx(2.0));
    CHECK(e.eigenvalues(2) == doctest::Approx(1.0));
    // Eigenvector of the top eigenvalue is e_2 up to sign; the convention
    // makes the dominant component nonnegative.
    CHECK(e.eigenvectors(1, 0) == doctest::Approx(1.0));

    const EigenDecomposition id =
        eigen_decompose(CovarianceMatrix(MatrixXd::Identity(4, 4)));
    for (int i = 0; i < 4; ++i) CHECK(id.eigenvalues(i) == doctest::Approx(1.0));
}

TEST_CASE("eigen decomposition reconstructs the matrix") {
    const MatrixXd m = random_symmetric(50, 17);
    const EigenDecomposition e = eigen_decompose(CovarianceMatrix(m));
    const MatrixXd back = e.eigenvectors * e.eigenvalues.asDiagonal() *
                          e.eigenvectors.transpose();
    CHECK((back - 0.5 * (m + m.transpose())).cwiseAbs().maxCoeff() < 1e-8);
    // Descending order.
    for (int i = 1; i < 50; ++i) CHECK(e.eigenvalues(i - 1) >= e.eigenvalues(i));
    // Orthonormal columns.
    const MatrixXd gram = e.eigenvectors.transpose() * e.eigenvectors;
    CHECK((gram - MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff() < 1e-10);
    // eigenvalues_descending agrees with the full decomposition.
    const VectorXd only = eigenvalues_descending(CovarianceMatrix(m));
    CHECK((only - e.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("eigenvalues are invariant under symmetric permutation") {
    const MatrixXd m = random_symmetric(8, 23);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(8);
    p.setIdentity();
    std::swap(p.indices()(0), p.indices()(5));
    std::swap(p.indices()(2), p.indices()(7));
    const MatrixXd permuted = p.transpose() * m * p;
    const VectorXd a = eigenvalues_descending(CovarianceMatrix(m));
    const VectorXd b = eigenvalues_descending(CovarianceMatrix(permuted));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("covariance rank is bounded by the signal rank") {
    // Three channels driven by a single source: rank one after centering.
    Rng r(9);
    MatrixXd y(3, 500);
    for (int t = 0; t < 500; ++t) {
        const double s = r.normal();
        y(0, t) = s;
        y(1, t) = 2.0 * s;
        y(2, t) = -s;
    }
    const VectorXd eigs =
        eigenvalues_descending(sample_covariance(DataMatrix(y)));
    CHECK(eigs(0) > 1.0);
    CHECK(std::abs(eigs(1)) < 1e-12);
    CHECK(std::abs(eigs(2)) < 1e-12);
}

TEST_CASE("spectral norm is the largest absolute eigenvalue") {
    MatrixXd d = VectorXd{{-5.0, 3.0, 1.0}}.asDiagonal();
    CHECK(spectral_norm(d) == doctest::Approx(5.0));
    CHECK(spectral_norm(MatrixXd::Zero(3, 3)) == doctest::Approx(0.0));
}

TEST_CASE("covariance normalization rescales to the requested norm") {
    MatrixXd d = VectorXd{{10.0, 5.0}}.asDiagonal();
    const CovarianceMatrix c(d);
    const CovarianceMatrix one = normalize_covariance(c, NormMode::One);
    CHECK(one.values(0, 0) == doctest::Approx(1.0));
    CHECK(one.values(1, 1) == doctest::Approx(0.5));
    const CovarianceMatrix k = normalize_covariance(c, NormMode::K);
    CHECK(k.values(0, 0) == doctest::Approx(2.0));
    const CovarianceMatrix k2 = normalize_covariance(c, NormMode::KSquared);
    CHECK(k2.values(0, 0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(
        normalize_covariance(CovarianceMatrix(MatrixXd::Zero(2, 2)),
                             NormMode::One),
        DataError);
    // Idempotent once the norm is already phi(K).
    const CovarianceMatrix again = normalize_covariance(k, NormMode::K);
    CHECK((again.values - k.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("data normalization gives the covariance spectral norm K") {
    Rng r(31);
    MatrixXd y(4, 300);
    for (int i = 0; i < 4; ++i)
        for (int t = 0; t < 300; ++t) y(i, t) = (i + 1.0) * r.normal();
    const DataMatrix data(y);
    const CovarianceMatrix cov = sample_covariance(data);
    const DataMatrix scaled = normalize_data(data, cov);
    const CovarianceMatrix after = sample_covariance(scaled);
    CHECK(spectral_norm(after.values) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(scaled.sample_period_ms == data.sample_period_ms);
}
