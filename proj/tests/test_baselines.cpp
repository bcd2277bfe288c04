#include <doctest.h>

#include <cmath>
#include <vector>

#include "baselines.hpp"
#include "errors.hpp"

using namespace spikedim;
using Eigen::VectorXd;

namespace {

VectorXd one_spike(int k, double value) {
    VectorXd v = VectorXd::Ones(k);
    v[0] = value;
    return v;
}

// Straight-line reimplementation of the information criteria, no suffix
// sums, used as an oracle against the production code.
double info_value(const VectorXd& eigs, long T, int N, bool aic) {
    const int K = static_cast<int>(eigs.size());
    const int m = K - N;
    double logsum = 0.0, sum = 0.0;
    for (int j = N; j < K; ++j) {
        logsum += std::log(std::max(eigs[j], 1e-300));
        sum += std::max(eigs[j], 1e-300);
    }
    const double ratio = logsum / m - std::log(sum / m);
    const double loglik = -(aic ? 2.0 : 1.0) * m * static_cast<double>(T) * ratio;
    const double penalty =
        aic ? 2.0 * N * (2.0 * K - N)
            : 0.5 * N * (2.0 * K - N) * std::log(static_cast<double>(T));
    return loglik + penalty;
}

} // namespace

TEST_CASE("equal eigenvalues mean zero sources for AIC and MDL") {
    const VectorXd flat = VectorXd::Constant(20, 3.5);
    CHECK(aic_count(flat, 500).argmin_or_count == 0);
    CHECK(mdl_count(flat, 500).argmin_or_count == 0);
    // Likelihood term vanishes for every N, so ties resolve to smallest N.
    const CriterionCurve c = aic_count(flat, 500);
    CHECK(c.values[0] == doctest::Approx(0.0));
    CHECK(c.values[1] > 0.0);
}

TEST_CASE("one dominant eigenvalue yields one source") {
    const VectorXd eigs = one_spike(50, 100.0);
    const CriterionCurve aic = aic_count(eigs, 1000);
    const CriterionCurve mdl = mdl_count(eigs, 1000);
    CHECK(aic.argmin_or_count == 1);
    CHECK(mdl.argmin_or_count == 1);
    REQUIRE(aic.values.size() == 50);

    // Every stored value must agree with the direct formula.
    for (int N = 0; N < 50; ++N) {
        const double ref_aic = info_value(eigs, 1000, N, true);
        const double ref_mdl = info_value(eigs, 1000, N, false);
        const double tol_aic = 1e-9 * std::max(1.0, std::abs(ref_aic));
        const double tol_mdl = 1e-9 * std::max(1.0, std::abs(ref_mdl));
        CHECK(std::abs(aic.values[N] - ref_aic) < tol_aic);
        CHECK(std::abs(mdl.values[N] - ref_mdl) < tol_mdl);
    }
}

TEST_CASE("criteria argmins are scale invariant") {
    VectorXd eigs(30);
    for (int i = 0; i < 30; ++i) eigs[i] = (i < 3 ? 50.0 - 10.0 * i : 1.0);
    const int aic_base = aic_count(eigs, 2000).argmin_or_count;
    const int mdl_base = mdl_count(eigs, 2000).argmin_or_count;
    CHECK(aic_base == 3);
    CHECK(mdl_base == 3);
    for (double c : {1e-6, 1e6}) {
        CHECK(aic_count(eigs * c, 2000).argmin_or_count == aic_base);
        CHECK(mdl_count(eigs * c, 2000).argmin_or_count == mdl_base);
    }
}

TEST_CASE("MDL never selects more sources than AIC for large T") {
    // MDL's penalty log(T)/2 exceeds AIC's 2 once T > e^4.
    VectorXd eigs(40);
    for (int i = 0; i < 40; ++i)
        eigs[i] = 1.0 + 20.0 * std::exp(-0.8 * i);
    for (long T : {100L, 1000L, 10000L})
        CHECK(mdl_count(eigs, T).argmin_or_count <=
              aic_count(eigs, T).argmin_or_count);
}

TEST_CASE("nonpositive eigenvalues are clamped and flagged") {
    VectorXd eigs(6);
    eigs << 10.0, 5.0, 1.0, 0.0, 0.0, 0.0;
    const CriterionCurve c = aic_count(eigs, 100);
    CHECK(c.clamped);
    for (double v : c.values) CHECK(std::isfinite(v));
    CHECK_FALSE(aic_count(one_spike(6, 2.0), 100).clamped);
}

TEST_CASE("criteria validate their inputs") {
    VectorXd ascending(3);
    ascending << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS((void)aic_count(ascending, 100), DataError);
    CHECK_THROWS_AS((void)mdl_count(VectorXd::Ones(1), 100), DataError);
    CHECK_THROWS_AS((void)eif_count(one_spike(5, 2.0), 0), DataError);
}

TEST_CASE("indicator function is smallest at zero for a flat spectrum") {
    // With equal eigenvalues the value decays like 1/(K - N): N = 0 wins.
    const CriterionCurve c = eif_count(VectorXd::Constant(12, 2.0), 400);
    CHECK(c.argmin_or_count == 0);
    for (size_t i = 1; i < c.values.size(); ++i)
        CHECK(c.values[i] > c.values[i - 1]);
}

TEST_CASE("indicator function steps past a dominant eigenvalue") {
    // Dropping the huge eigenvalue shrinks the numerator by three orders of
    // magnitude; after that the flat tail pushes the argmin no further.
    const CriterionCurve c = eif_count(one_spike(10, 1e6), 400);
    CHECK(c.argmin_or_count == 1);
    CHECK(c.values[1] ==
          doctest::Approx(3.0 / (std::sqrt(400.0) * 9.0 * 3.0)));
}

TEST_CASE("PCA count walks the cumulative variance fractions") {
    VectorXd eigs(4);
    eigs << 4.0, 3.0, 2.0, 1.0;  // cumulative shares .4, .7, .9, 1
    CHECK(pca_count(eigs, 0.7).argmin_or_count == 2);
    CHECK(pca_count(eigs, 0.71).argmin_or_count == 3);
    CHECK(pca_count(eigs, 0.9).argmin_or_count == 3);
    CHECK(pca_count(eigs, 0.4).argmin_or_count == 1);
    CHECK(pca_count(eigs, 0.05).argmin_or_count == 1);
    CHECK(pca_count(eigs, 1.0).argmin_or_count == 4);
    const CriterionCurve c = pca_count(eigs, 0.7);
    REQUIRE(c.values.size() == 4);
    CHECK(c.values[0] == doctest::Approx(0.4));
    CHECK(c.values[3] == doctest::Approx(1.0));
}

TEST_CASE("PCA count is monotone in the fraction") {
    VectorXd eigs(15);
    for (int i = 0; i < 15; ++i) eigs[i] = std::pow(0.8, i);
    int prev = 0;
    for (double f : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0}) {
        const int n = pca_count(eigs, f).argmin_or_count;
        CHECK(n >= prev);
        prev = n;
    }
    CHECK(prev == 15);
}

TEST_CASE("PCA count clamps negative tails and validates the fraction") {
    VectorXd eigs(3);
    eigs << 4.0, 2.0, -1.0;  // clamped total 6: shares 2/3, 1
    CHECK(pca_count(eigs, 0.5).argmin_or_count == 1);
    CHECK(pca_count(eigs, 0.9).argmin_or_count == 2);
    CHECK_THROWS_AS((void)pca_count(eigs, 0.0), ConfigError);
    CHECK_THROWS_AS((void)pca_count(eigs, 1.1), ConfigError);
    CHECK_THROWS_AS((void)pca_count(VectorXd::Zero(3), 0.5), DataError);
}
