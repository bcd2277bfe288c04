#include "baselines.hpp"

#include <cmath>

#include "errors.hpp"

namespace spikedim {

namespace {

void check_spectrum(const Eigen::VectorXd& eigs) {
    if (eigs.size() < 2)
        throw DataError("criterion needs at least 2 eigenvalues");
    for (Eigen::Index i = 1; i < eigs.size(); ++i)
        if (eigs[i] > eigs[i - 1])
            throw DataError("eigenvalues must be sorted descending");
}

int argmin_of(const std::vector<double>& v) {
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[best]) best = static_cast<int>(i);
    return best;
}

// Shared AIC/MDL skeleton: the log-likelihood term is
// -(K-N) T (mean log tail - log mean tail), accumulated with suffix sums.
CriterionCurve info_criterion(const Eigen::VectorXd& eigs, long T, bool aic) {
    check_spectrum(eigs);
    if (T < 1) throw DataError("criterion needs T >= 1");
    const int K = static_cast<int>(eigs.size());
    CriterionCurve curve;
    curve.criterion = aic ? Criterion::AIC : Criterion::MDL;

    Eigen::VectorXd lam = eigs;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam[i] < 1e-300) {
            lam[i] = 1e-300;
            curve.clamped = true;
        }
    std::vector<double> suffix_sum(K + 1, 0.0), suffix_logsum(K + 1, 0.0);
    for (int i = K - 1; i >= 0; --i) {
        suffix_sum[i] = suffix_sum[i + 1] + lam[i];
        suffix_logsum[i] = suffix_logsum[i + 1] + std::log(lam[i]);
    }
    const double Td = static_cast<double>(T);
    for (int N = 0; N < K; ++N) {
        const int m = K - N;
        const double log_gm = suffix_logsum[N] / m;
        const double log_am = std::log(suffix_sum[N] / m);
        const double loglik = -(aic ? 2.0 : 1.0) * m * Td * (log_gm - log_am);
        const double penalty = aic ? 2.0 * N * (2.0 * K - N)
                                   : 0.5 * N * (2.0 * K - N) * std::log(Td);
        curve.values.push_back(loglik + penalty);
    }
    curve.argmin_or_count = argmin_of(curve.values);
    return curve;
}

}  // namespace

CriterionCurve aic_count(const Eigen::VectorXd& eigs, long T) {
    return info_criterion(eigs, T, true);
}

CriterionCurve mdl_count(const Eigen::VectorXd& eigs, long T) {
    return info_criterion(eigs, T, false);
}

CriterionCurve eif_count(const Eigen::VectorXd& eigs, long T) {
    check_spectrum(eigs);
    if (T < 1) throw DataError("criterion needs T >= 1");
    const int K = static_cast<int>(eigs.size());
    CriterionCurve curve;
    curve.criterion = Criterion::EIF;
    Eigen::VectorXd lam = eigs.cwiseMax(0.0);
    curve.clamped = (lam.array() != eigs.array()).any();
    std::vector<double> suffix_sum(K + 1, 0.0);
    for (int i = K - 1; i >= 0; --i) suffix_sum[i] = suffix_sum[i + 1] + lam[i];
    const double sqrtT = std::sqrt(static_cast<double>(T));
    for (int N = 0; N < K; ++N) {
        const double m = static_cast<double>(K - N);
        curve.values.push_back(std::sqrt(suffix_sum[N]) /
                               (sqrtT * m * std::sqrt(m)));
    }
    curve.argmin_or_count = argmin_of(curve.values);
    return curve;
}

CriterionCurve pca_count(const Eigen::VectorXd& eigs, double fraction) {
    check_spectrum(eigs);
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ConfigError("PCA fraction must be in (0, 1]");
    const int K = static_cast<int>(eigs.size());
    const Eigen::VectorXd lam = eigs.cwiseMax(0.0);
    const double total = lam.sum();
    if (!(total > 0.0)) throw DataError("PCA count: all-zero spectrum");
    CriterionCurve curve;
    curve.criterion = Criterion::PCA;
    double cum = 0.0;
    int count = 0;
    for (int n = 0; n < K; ++n) {
        cum += lam[n];
        curve.values.push_back(cum / total);
        if (count == 0 && cum / total >= fraction) count = n + 1;
    }
    if (count == 0) count = K;  // guards rounding at fraction = 1
    curve.argmin_or_count = count;
    return curve;
}

} // namespace spikedim
