#include "noise.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>

namespace spikedim {

NoiseMethod noise_method_from_string(std::string_view s) {
    if (s == "fft") return NoiseMethod::FFT;
    if (s == "residual") return NoiseMethod::Residual;
    if (s == "threshold") return NoiseMethod::Threshold;
    if (s == "brute") return NoiseMethod::Brute;
    throw ConfigError("unknown noise method '" + std::string(s) +
                      "' (expected fft, residual, threshold, brute or none)");
}

const char* noise_method_to_string(NoiseMethod m) {
    switch (m) {
        case NoiseMethod::FFT: return "fft";
        case NoiseMethod::Residual: return "residual";
        case NoiseMethod::Threshold: return "threshold";
        case NoiseMethod::Brute: return "brute";
    }
    return "?";
}

namespace {

// Zero (or negative, from roundoff) variances make the whitener blow up;
// floor them relative to the largest channel.
void floor_variances(Eigen::VectorXd& v, std::vector<std::string>& warnings,
                     const char* what) {
    const double vmax = v.maxCoeff();
    const double floor = vmax > 0.0 ? 1e-12 * vmax : 1e-300;
    int n_floored = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] < floor) {
            v[i] = floor;
            ++n_floored;
        }
    if (n_floored > 0)
        warnings.push_back(std::string(what) + ": " +
                           std::to_string(n_floored) +
                           " channel variance(s) floored at 1e-12 of the max");
}

DataMatrix apply_baseline(const DataMatrix& data,
                          const std::optional<std::pair<double, double>>& bl) {
    if (!bl) return data;
    const double period = data.sample_period_ms;
    const long T = static_cast<long>(data.samples());
    long lo = static_cast<long>(std::ceil(bl->first / period));
    long hi = static_cast<long>(std::floor(bl->second / period));
    lo = std::max(0L, lo);
    hi = std::min(T - 1, hi);
    if (hi - lo + 1 < 2)
        throw ConfigError("noise baseline interval covers fewer than 2 samples");
    return DataMatrix(data.values.middleCols(lo, hi - lo + 1), period);
}

// Centered AR(p) least-squares residuals for one channel; returns the
// residual vector (length T - p) and its variance estimate SSR / (T - p).
std::pair<Eigen::VectorXd, double> ar_residuals(const Eigen::VectorXd& x_raw,
                                                int p) {
    const long T = x_raw.size();
    Eigen::VectorXd x = x_raw.array() - x_raw.mean();
    if (p == 0) {
        const double var = x.squaredNorm() / static_cast<double>(T);
        return {x, var};
    }
    const long n = T - p;
    Eigen::MatrixXd A(n, p);
    Eigen::VectorXd y(n);
    for (long t = 0; t < n; ++t) {
        y[t] = x[t + p];
        for (int j = 0; j < p; ++j) A(t, j) = x[t + p - 1 - j];
    }
    // ColPivHouseholderQR tolerates the rank-deficient (constant channel) case
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd resid = y - A * coef;
    const double var = resid.squaredNorm() / static_cast<double>(n);
    return {resid, var};
}

}  // namespace

NoiseEstimate estimate_noise_fft(const DataMatrix& data, double band_fraction) {
    if (!(band_fraction > 0.0 && band_fraction <= 0.5))
        throw ConfigError("band fraction must be in (0, 0.5]");
    const long T = static_cast<long>(data.samples());
    if (T < 16) throw DataError("FFT noise estimation needs T >= 16");
    const auto K = data.channels();

    const long nbins = T / 2 + 1;       // r2c output size
    const long nf = nbins - 1;          // positive-frequency bins (DC excluded)
    const long lo = static_cast<long>(std::ceil((1.0 - band_fraction) * nf));
    const long first = 1 + lo;          // first bin of the averaged band
    if (first > nf) throw DataError("band fraction leaves no frequency bins");

    std::vector<double> in(T);
    std::vector<fftw_complex> out(nbins);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(T), in.data(),
                                          out.data(), FFTW_ESTIMATE);
    if (plan == nullptr) throw ModelError("FFTW plan creation failed");

    NoiseEstimate est;
    est.method = NoiseMethod::FFT;
    est.channel_variances.resize(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double mean = data.values.row(k).mean();
        for (long t = 0; t < T; ++t) in[t] = data.values(k, t) - mean;
        fftw_execute(plan);
        double acc = 0.0;
        for (long b = first; b <= nf; ++b)
            acc += (out[b][0] * out[b][0] + out[b][1] * out[b][1]) /
                   static_cast<double>(T);
        est.channel_variances[k] = acc / static_cast<double>(nf - lo);
    }
    fftw_destroy_plan(plan);

    floor_variances(est.channel_variances, est.warnings, "fft");
    est.covariance = CovarianceMatrix(
        Eigen::MatrixXd(est.channel_variances.asDiagonal()));
    est.inverse_variances = est.channel_variances.cwiseInverse();
    return est;
}

NoiseEstimate estimate_noise_residual(const DataMatrix& data, int ar_order) {
    if (ar_order < 0) throw ConfigError("AR order must be >= 0");
    const long T = static_cast<long>(data.samples());
    if (ar_order > 0 && T <= 10L * ar_order)
        throw DataError("AR noise estimation needs T > 10 * order");
    const auto K = data.channels();

    NoiseEstimate est;
    est.method = NoiseMethod::Residual;
    est.channel_variances.resize(K);
    for (Eigen::Index k = 0; k < K; ++k)
        est.channel_variances[k] =
            ar_residuals(data.values.row(k).transpose(), ar_order).second;

    floor_variances(est.channel_variances, est.warnings, "residual");
    est.covariance = CovarianceMatrix(
        Eigen::MatrixXd(est.channel_variances.asDiagonal()));
    est.inverse_variances = est.channel_variances.cwiseInverse();
    return est;
}

NoiseEstimate estimate_noise_threshold(const DataMatrix& data,
                                       double threshold_constant,
                                       int ar_order) {
    if (!(threshold_constant > 0.0))
        throw ConfigError("threshold constant must be positive");
    if (ar_order < 0) throw ConfigError("AR order must be >= 0");
    const long T = static_cast<long>(data.samples());
    if (ar_order > 0 && T <= 10L * ar_order)
        throw DataError("AR noise estimation needs T > 10 * order");
    const auto K = data.channels();

    NoiseEstimate est;
    est.method = NoiseMethod::Threshold;
    if (4L * T < K)
        est.warnings.push_back(
            "threshold estimate with T < K/4 samples; expect large errors");

    const long n = T - ar_order;
    Eigen::MatrixXd resid(K, n);
    for (Eigen::Index k = 0; k < K; ++k)
        resid.row(k) =
            ar_residuals(data.values.row(k).transpose(), ar_order).first;
    resid.colwise() -= resid.rowwise().mean();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(K, K);
    S.selfadjointView<Eigen::Lower>().rankUpdate(resid, 1.0 / static_cast<double>(n));
    S.triangularView<Eigen::StrictlyUpper>() = S.transpose();

    est.channel_variances = S.diagonal();
    floor_variances(est.channel_variances, est.warnings, "threshold");
    S.diagonal() = est.channel_variances;

    const double rate = threshold_constant *
                        std::sqrt(std::log(static_cast<double>(K)) /
                                  static_cast<double>(T));
    for (Eigen::Index i = 0; i < K; ++i)
        for (Eigen::Index j = 0; j < i; ++j) {
            const double cut = rate * std::sqrt(S(i, i) * S(j, j));
            if (std::abs(S(i, j)) <= cut) {
                S(i, j) = 0.0;
                S(j, i) = 0.0;
            }
        }

    // Hard thresholding can leave the matrix indefinite. Shrink the
    // off-diagonal block (keeping the diagonal exact) until PSD; s = 0 is
    // always admissible so the bisection terminates.
    const Eigen::MatrixXd D = S.diagonal().asDiagonal();
    const Eigen::MatrixXd Off = S - D;
    auto min_eig = [&](double s) {
        return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                   D + s * Off, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .minCoeff();
    };
    if (Off.cwiseAbs().maxCoeff() > 0.0 && min_eig(1.0) < 0.0) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (lo + hi);
            (min_eig(mid) >= 0.0 ? lo : hi) = mid;
        }
        S = D + lo * Off;
        est.warnings.push_back(
            "thresholded covariance was indefinite; off-diagonals shrunk by " +
            std::to_string(lo));
    }

    est.covariance = CovarianceMatrix(S);
    est.inverse_variances = est.channel_variances.cwiseInverse();
    return est;
}

NoiseEstimate noise_brute(Eigen::Index K) {
    NoiseEstimate est;
    est.method = NoiseMethod::Brute;
    est.channel_variances = Eigen::VectorXd::Ones(K);
    est.inverse_variances = est.channel_variances;
    est.covariance = CovarianceMatrix(Eigen::MatrixXd::Identity(K, K));
    return est;
}

NoiseEstimate estimate_noise(const DataMatrix& data, NoiseMethod method,
                             const NoiseParams& params) {
    const DataMatrix segment = apply_baseline(data, params.baseline_ms);
    switch (method) {
        case NoiseMethod::FFT:
            return estimate_noise_fft(segment, params.band_fraction);
        case NoiseMethod::Residual:
            return estimate_noise_residual(segment, params.ar_order);
        case NoiseMethod::Threshold:
            return estimate_noise_threshold(segment, params.threshold_constant,
                                            params.ar_order);
        case NoiseMethod::Brute:
            return noise_brute(data.channels());
    }
    throw ConfigError("unhandled noise method");
}

} // namespace spikedim
