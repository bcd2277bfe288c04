#include <doctest.h>

#include <cmath>

#include "noise.hpp"
#include "rng.hpp"

using namespace spikedim;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd white_noise(int k, long t, double sd, std::uint64_t seed) {
    Rng r(seed);
    MatrixXd m(k, t);
    for (long j = 0; j < t; ++j)
        for (int i = 0; i < k; ++i) m(i, j) = sd * r.normal();
    return m;
}

} // namespace

TEST_CASE("noise method names round-trip") {
    for (NoiseMethod m : {NoiseMethod::FFT, NoiseMethod::Residual,
                          NoiseMethod::Threshold, NoiseMethod::Brute})
        CHECK(noise_method_from_string(noise_method_to_string(m)) == m);
    CHECK_THROWS_AS((void)noise_method_from_string("psd"), ConfigError);
    CHECK_THROWS_AS((void)noise_method_from_string("none"), ConfigError);
}

TEST_CASE("fft method reads a white noise floor") {
    const DataMatrix data(white_noise(3, 4096, 2.0, 1));
    const NoiseEstimate est = estimate_noise_fft(data);
    REQUIRE(est.channel_variances.size() == 3);
    for (int i = 0; i < 3; ++i)
        CHECK(est.channel_variances[i] == doctest::Approx(4.0).epsilon(0.10));
    // Diagonal covariance mirrors the variance vector.
    CHECK(est.covariance.values(0, 0) == est.channel_variances[0]);
    CHECK(est.covariance.values(0, 1) == 0.0);
    CHECK(est.warnings.empty());
}

TEST_CASE("fft method ignores narrowband signal below the band") {
    // 10 Hz sine at a 1 ms sample period: 40 exact cycles in 4000 samples,
    // far below the analysed top quarter of the spectrum.
    const long T = 4000;
    MatrixXd m(2, T);
    Rng r(2);
    for (long t = 0; t < T; ++t) {
        m(0, t) = 8.0 * std::sin(2.0 * M_PI * 10.0 * (t / 1000.0));
        m(1, t) = m(0, t) + 1.5 * r.normal();
    }
    const NoiseEstimate est = estimate_noise_fft(DataMatrix(m));
    // The pure sinusoid channel has no top-band power: floored and flagged.
    CHECK(est.channel_variances[0] <= 1e-10 * est.channel_variances[1]);
    REQUIRE_FALSE(est.warnings.empty());
    // The noisy channel reads the noise variance, not the signal variance.
    CHECK(est.channel_variances[1] == doctest::Approx(2.25).epsilon(0.15));
}

TEST_CASE("fft method validates band fraction and length") {
    const DataMatrix data(white_noise(2, 64, 1.0, 3));
    CHECK_THROWS_AS((void)estimate_noise_fft(data, 0.0), ConfigError);
    CHECK_THROWS_AS((void)estimate_noise_fft(data, 0.6), ConfigError);
    const DataMatrix tiny(white_noise(2, 8, 1.0, 3));
    CHECK_THROWS_AS((void)estimate_noise_fft(tiny), DataError);
}

TEST_CASE("residual method with order zero is the plain variance") {
    const DataMatrix data(white_noise(2, 500, 1.3, 4));
    const NoiseEstimate est = estimate_noise_residual(data, 0);
    for (int i = 0; i < 2; ++i) {
        const VectorXd x = data.values.row(i).transpose();
        const double centered_var =
            (x.array() - x.mean()).square().sum() / 500.0;
        CHECK(est.channel_variances[i] == doctest::Approx(centered_var));
    }
}

TEST_CASE("residual method strips predictable structure") {
    // AR(1) channel: raw variance sigma^2 / (1 - a^2) is five times the
    // innovation variance; the AR(5) fit must recover the innovation level.
    const long T = 4000;
    const double a = 0.9, sd = 1.5;
    Rng r(5);
    MatrixXd m(2, T);
    double x = 0.0;
    for (long t = 0; t < T; ++t) {
        x = a * x + sd * r.normal();
        m(0, t) = x;
        m(1, t) = sd * r.normal();
    }
    const NoiseEstimate est = estimate_noise_residual(DataMatrix(m), 5);
    CHECK(est.channel_variances[0] == doctest::Approx(sd * sd).epsilon(0.15));
    CHECK(est.channel_variances[1] == doctest::Approx(sd * sd).epsilon(0.15));
    const double raw_var = (m.row(0).array() - m.row(0).mean()).square().mean();
    CHECK(est.channel_variances[0] < 0.5 * raw_var);
    // Inverse variances reported for diagnostics.
    CHECK(est.inverse_variances[0] ==
          doctest::Approx(1.0 / est.channel_variances[0]));
}

TEST_CASE("residual method needs enough samples for the fit") {
    const DataMatrix data(white_noise(2, 50, 1.0, 6));
    CHECK_THROWS_AS((void)estimate_noise_residual(data, 5), DataError);
    CHECK_THROWS_AS((void)estimate_noise_residual(data, -1), ConfigError);
    CHECK_NOTHROW((void)estimate_noise_residual(data, 4));
}

TEST_CASE("threshold method zeroes independent off-diagonals") {
    const DataMatrix data(white_noise(10, 2000, 1.0, 7));
    const NoiseEstimate est = estimate_noise_threshold(data, 3.0, 0);
    const MatrixXd& S = est.covariance.values;
    for (int i = 0; i < 10; ++i) {
        CHECK(S(i, i) == doctest::Approx(1.0).epsilon(0.15));
        for (int j = 0; j < i; ++j) CHECK(S(i, j) == 0.0);
    }
}

TEST_CASE("threshold method keeps strong correlations") {
    const long T = 2000;
    Rng r(8);
    MatrixXd m(4, T);
    for (long t = 0; t < T; ++t) {
        const double shared = r.normal();
        m(0, t) = shared + 0.3 * r.normal();
        m(1, t) = shared + 0.3 * r.normal();
        m(2, t) = r.normal();
        m(3, t) = r.normal();
    }
    // c = 3 puts the cut well above the ~1/sqrt(T) sampling noise of a true
    // zero entry while staying far below the shared-variance correlation.
    const NoiseEstimate est = estimate_noise_threshold(DataMatrix(m), 3.0, 0);
    const MatrixXd& S = est.covariance.values;
    // Channels 0 and 1 share most of their variance: the entry survives.
    CHECK(std::abs(S(0, 1)) > 0.5);
    // Unrelated pairs are cut.
    CHECK(S(2, 3) == 0.0);
    CHECK(S(0, 2) == 0.0);
    // The result must stay positive semidefinite.
    const double mineig =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(S, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .minCoeff();
    CHECK(mineig >= -1e-12);
}

TEST_CASE("threshold output is positive semidefinite on random panels") {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
        const DataMatrix data(white_noise(30, 200, 1.0, seed));
        const NoiseEstimate est = estimate_noise_threshold(data, 0.3, 0);
        const double mineig = Eigen::SelfAdjointEigenSolver<MatrixXd>(
                                  est.covariance.values, Eigen::EigenvaluesOnly)
                                  .eigenvalues()
                                  .minCoeff();
        CHECK(mineig >= -1e-10);
        // Diagonal preserved exactly even if shrinking was needed.
        for (int i = 0; i < 30; ++i)
            CHECK(est.covariance.values(i, i) ==
                  doctest::Approx(est.channel_variances[i]));
    }
}

TEST_CASE("noise estimates scale with the data variance") {
    const MatrixXd base = white_noise(3, 2048, 1.0, 9);
    const double c = 50.0;
    for (NoiseMethod method : {NoiseMethod::FFT, NoiseMethod::Residual,
                               NoiseMethod::Threshold}) {
        CAPTURE(noise_method_to_string(method));
        const NoiseEstimate small =
            estimate_noise(DataMatrix(base), method, NoiseParams{});
        const NoiseEstimate large =
            estimate_noise(DataMatrix(base * c), method, NoiseParams{});
        for (int i = 0; i < 3; ++i)
            CHECK(large.channel_variances[i] ==
                  doctest::Approx(c * c * small.channel_variances[i]));
    }
}

TEST_CASE("brute method is the identity ablation") {
    const NoiseEstimate est = noise_brute(5);
    CHECK(est.covariance.values == MatrixXd::Identity(5, 5));
    CHECK(est.channel_variances == VectorXd::Ones(5));
}

TEST_CASE("single-channel data works in every per-channel method") {
    const DataMatrix one(white_noise(1, 1024, 3.0, 10));
    CHECK(estimate_noise_fft(one).channel_variances[0] ==
          doctest::Approx(9.0).epsilon(0.15));
    CHECK(estimate_noise_residual(one, 5).channel_variances[0] ==
          doctest::Approx(9.0).epsilon(0.15));
    CHECK(estimate_noise_threshold(one, 1.0, 5).channel_variances[0] ==
          doctest::Approx(9.0).epsilon(0.15));
}

TEST_CASE("baseline interval restricts the estimation segment") {
    // Quiet first 500 ms, loud afterwards: a baseline over the quiet part
    // must read only the quiet variance.
    const long T = 2000;
    Rng r(11);
    MatrixXd m(1, T);
    for (long t = 0; t < T; ++t)
        m(0, t) = (t < 500 ? 1.0 : 20.0) * r.normal();
    NoiseParams params;
    params.baseline_ms = {{0.0, 499.0}};
    const NoiseEstimate quiet =
        estimate_noise(DataMatrix(m), NoiseMethod::Residual, params);
    CHECK(quiet.channel_variances[0] == doctest::Approx(1.0).epsilon(0.2));
    const NoiseEstimate whole = estimate_noise(
        DataMatrix(m), NoiseMethod::Residual, NoiseParams{});
    CHECK(whole.channel_variances[0] > 100.0);

    params.baseline_ms = {{0.0, 0.5}};
    CHECK_THROWS_AS(
        (void)estimate_noise(DataMatrix(m), NoiseMethod::Residual, params),
        ConfigError);
}
