#pragma once

#include <Eigen/Dense>

#include "errors.hpp"

namespace spikedim {

// A channels x time recording. Values are fT for simulated MEG data,
// dimensionless after normalization. The constructor accepts K >= 1 so that
// per-channel utilities (noise estimation) work on single channels; the
// estimation pipeline itself requires K >= 2 and checks at its entry point.
struct DataMatrix {
    Eigen::MatrixXd values;          // K x T
    double sample_period_ms = 1.0;

    DataMatrix() = default;
    DataMatrix(Eigen::MatrixXd v, double period_ms = 1.0);

    Eigen::Index channels() const { return values.rows(); }
    Eigen::Index samples() const { return values.cols(); }
};

// Symmetric K x K matrix; symmetrized on construction, with a PSD check
// (eigenvalues >= -1e-10 * lambda_max) available to callers that need it.
struct CovarianceMatrix {
    Eigen::MatrixXd values;

    CovarianceMatrix() = default;
    explicit CovarianceMatrix(const Eigen::MatrixXd& m);

    Eigen::Index dim() const { return values.rows(); }
};

struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;   // sorted descending
    Eigen::MatrixXd eigenvectors;  // columns aligned to eigenvalues
};

enum class NormMode { One, K, KSquared };

CovarianceMatrix sample_covariance(const DataMatrix& data, bool center = true);

// Deterministic sign convention: the largest-magnitude component of every
// eigenvector is nonnegative.
EigenDecomposition eigen_decompose(const CovarianceMatrix& C);

// Eigenvalues only (descending); used where eigenvectors are never consumed.
Eigen::VectorXd eigenvalues_descending(const CovarianceMatrix& C);

// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
double spectral_norm(const Eigen::MatrixXd& sym);

// phi(K) * C / ||C||_2 with phi(K) in {1, K, K^2}
CovarianceMatrix normalize_covariance(const CovarianceMatrix& C, NormMode mode);

// sqrt(K / ||R||_2) * Y
DataMatrix normalize_data(const DataMatrix& data, const CovarianceMatrix& R);

} // namespace spikedim
