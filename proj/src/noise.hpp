#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace spikedim {

enum class NoiseMethod { FFT, Residual, Threshold, Brute };

NoiseMethod noise_method_from_string(std::string_view s);
const char* noise_method_to_string(NoiseMethod m);

struct NoiseEstimate {
    CovarianceMatrix covariance;
    NoiseMethod method;
    Eigen::VectorXd channel_variances;  // the diagonal
    Eigen::VectorXd inverse_variances;  // diagnostics (Residual reports these)
    std::vector<std::string> warnings;
};

struct NoiseParams {
    double band_fraction = 0.25;     // FFT: top fraction of the spectrum
    int ar_order = 5;                // Residual / Threshold
    double threshold_constant = 1.0; // Threshold
    // Optional baseline interval (ms) estimated from instead of the whole
    // recording.
    std::optional<std::pair<double, double>> baseline_ms;
};

// Per-channel periodogram averaged over the top band_fraction of positive
// frequencies (noise-floor reading of a flat spectrum); diagonal estimate.
NoiseEstimate estimate_noise_fft(const DataMatrix& data,
                                 double band_fraction = 0.25);

// Per-channel AR(ar_order) least-squares fit; residual variances on the
// diagonal. ar_order = 0 degenerates to the plain channel variance.
NoiseEstimate estimate_noise_residual(const DataMatrix& data, int ar_order = 5);

// Covariance of the AR residuals with off-diagonals hard-thresholded at
// c * sqrt(log K / T) * sqrt(d_i d_j); diagonal kept. If thresholding leaves
// the matrix indefinite the off-diagonal block is shrunk (diagonal preserved)
// until positive semidefinite.
NoiseEstimate estimate_noise_threshold(const DataMatrix& data,
                                       double threshold_constant = 1.0,
                                       int ar_order = 5);

// The identity-noise ablation.
NoiseEstimate noise_brute(Eigen::Index K);

NoiseEstimate estimate_noise(const DataMatrix& data, NoiseMethod method,
                             const NoiseParams& params);

} // namespace spikedim
