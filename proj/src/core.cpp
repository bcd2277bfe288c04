#include "core.hpp"

#include <cmath>

namespace spikedim {

DataMatrix::DataMatrix(Eigen::MatrixXd v, double period_ms)
    : values(std::move(v)), sample_period_ms(period_ms) {
    if (values.rows() < 1 || values.cols() < 2)
        throw DataError("data matrix needs at least 1 channel and 2 samples");
    if (!values.allFinite())
        throw DataError("data matrix contains non-finite entries");
    if (!(sample_period_ms > 0.0))
        throw ConfigError("sample period must be positive");
}

CovarianceMatrix::CovarianceMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw DataError("covariance matrix must be square");
    if (!m.allFinite())
        throw DataError("covariance matrix contains non-finite entries");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale > 0.0 && asym > 1e-8 * scale)
        throw DataError("matrix is not symmetric within tolerance");
    values = 0.5 * (m + m.transpose());
}

CovarianceMatrix sample_covariance(const DataMatrix& data, bool center) {
    const auto T = data.samples();
    Eigen::MatrixXd Y = data.values;
    if (center) Y.colwise() -= Y.rowwise().mean();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(Y.rows(), Y.rows());
    // 1/T divisor regardless of centering; the gamma_T = K/T constants used
    // downstream assume it.
    C.selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0 / static_cast<double>(T));
    C.triangularView<Eigen::StrictlyUpper>() = C.transpose();
    return CovarianceMatrix(C);
}

EigenDecomposition eigen_decompose(const CovarianceMatrix& C) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(C.values);
    if (solver.info() != Eigen::Success)
        throw ModelError("symmetric eigendecomposition did not converge (dim " +
                         std::to_string(C.dim()) + ", max |entry| " +
                         std::to_string(C.values.cwiseAbs().maxCoeff()) + ")");
    const Eigen::Index K = C.dim();
    EigenDecomposition out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < K; ++j) {
        Eigen::Index imax = 0;
        out.eigenvectors.col(j).cwiseAbs().maxCoeff(&imax);
        if (out.eigenvectors(imax, j) < 0.0) out.eigenvectors.col(j) *= -1.0;
    }
    return out;
}

Eigen::VectorXd eigenvalues_descending(const CovarianceMatrix& C) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(C.values,
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw ModelError("symmetric eigendecomposition did not converge (dim " +
                         std::to_string(C.dim()) + ")");
    return solver.eigenvalues().reverse();
}

double spectral_norm(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym,
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw ModelError("spectral norm eigensolve did not converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

CovarianceMatrix normalize_covariance(const CovarianceMatrix& C, NormMode mode) {
    const double nrm = spectral_norm(C.values);
    if (!(nrm > 0.0)) throw DataError("cannot normalize a zero covariance matrix");
    const double K = static_cast<double>(C.dim());
    double phi = 1.0;
    switch (mode) {
        case NormMode::One: phi = 1.0; break;
        case NormMode::K: phi = K; break;
        case NormMode::KSquared: phi = K * K; break;
    }
    return CovarianceMatrix(C.values * (phi / nrm));
}

DataMatrix normalize_data(const DataMatrix& data, const CovarianceMatrix& R) {
    const double nrm = spectral_norm(R.values);
    if (!(nrm > 0.0)) throw DataError("cannot normalize by a zero covariance matrix");
    const double K = static_cast<double>(data.channels());
    return DataMatrix(data.values * std::sqrt(K / nrm), data.sample_period_ms);
}

} // namespace spikedim
