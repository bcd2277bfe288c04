#include "snr.hpp"

#include <cmath>

#include "rng.hpp"

namespace spikedim {

double snr_functional(const Eigen::MatrixXd& X, const CovarianceMatrix& R,
                      const CovarianceMatrix& R_n) {
    if (X.rows() != R.dim() || R.dim() != R_n.dim())
        throw DataError("snr functional: dimension mismatch");
    const Eigen::MatrixXd num = X.transpose() * R.values * X;
    const Eigen::MatrixXd den = X.transpose() * R_n.values * X;
    const double d = spectral_norm(0.5 * (den + den.transpose()));
    if (d < 1e-300)
        throw DataError("snr functional: transformed noise covariance is zero");
    return spectral_norm(0.5 * (num + num.transpose())) / d;
}

WhiteningOperator whitener_from_noise(const CovarianceMatrix& R_n,
                                      double eig_floor) {
    if (eig_floor < 0.0) throw ConfigError("eigenvalue floor must be >= 0");
    EigenDecomposition ed = eigen_decompose(R_n);
    const double lmax = ed.eigenvalues[0];
    if (!(lmax > 0.0))
        throw DataError("noise covariance has no positive eigenvalue");
    WhiteningOperator W;
    W.noise_eigs = ed.eigenvalues;
    const double floor = eig_floor * lmax;
    for (Eigen::Index i = 0; i < W.noise_eigs.size(); ++i) {
        if (W.noise_eigs[i] < floor) {
            W.noise_eigs[i] = floor;
            W.floor_applied = true;
        }
    }
    if (!(W.noise_eigs.minCoeff() > 0.0))
        throw DataError("noise covariance is singular and the floor is zero");
    W.matrix = ed.eigenvectors *
               W.noise_eigs.cwiseSqrt().cwiseInverse().asDiagonal();
    return W;
}

AdjustedCovariance adjusted_covariance(const CovarianceMatrix& R,
                                       const WhiteningOperator& W) {
    if (R.dim() != W.matrix.rows())
        throw DataError("adjusted covariance: dimension mismatch");
    const Eigen::MatrixXd M = W.matrix.transpose() * R.values * W.matrix;
    AdjustedCovariance out;
    out.matrix = 0.5 * (M + M.transpose());
    out.floor_applied = W.floor_applied;
    return out;
}

MaximizerCheck verify_snr_maximum(const CovarianceMatrix& R,
                               const CovarianceMatrix& R_n) {
    const WhiteningOperator W = whitener_from_noise(R_n, 0.0);
    const AdjustedCovariance adj = adjusted_covariance(R, W);
    MaximizerCheck rep;
    rep.lambda_max = eigenvalues_descending(CovarianceMatrix(adj.matrix))[0];
    rep.value_whitener = snr_functional(W.matrix, R, R_n);
    const EigenDecomposition ed_adj = eigen_decompose(CovarianceMatrix(adj.matrix));
    rep.value_rotated = snr_functional(W.matrix * ed_adj.eigenvectors, R, R_n);
    return rep;
}

namespace {

// QR with the R-diagonal forced positive, so the orthonormalization of
// Phi + omega*E converges to Phi itself as omega -> 0 (no column sign flips).
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& M) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < Q.cols(); ++j)
        if (R(j, j) < 0.0) Q.col(j) *= -1.0;
    return Q;
}

}  // namespace

PerturbationCurve perturbation_curve(const CovarianceMatrix& R,
                                     const CovarianceMatrix& R_n,
                                     const std::vector<double>& omega_list,
                                     std::uint64_t seed) {
    if (omega_list.empty())
        throw ConfigError("perturbation curve needs at least one omega");
    for (double w : omega_list)
        if (w < 0.0 || !std::isfinite(w))
            throw ConfigError("omega values must be finite and >= 0");

    const EigenDecomposition ed = eigen_decompose(R_n);
    if (!(ed.eigenvalues.minCoeff() > 0.0))
        throw DataError("perturbation curve requires positive definite noise");
    const Eigen::MatrixXd Phi = ed.eigenvectors;
    const Eigen::VectorXd inv_sqrt = ed.eigenvalues.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd W_exact = Phi * inv_sqrt.asDiagonal();
    const Eigen::MatrixXd adj_exact = W_exact.transpose() * R.values * W_exact;
    const Eigen::Index K = R.dim();

    // One direction pair serves the whole curve: resampling per omega would
    // fold direction variance into the fitted slope.
    Rng rng(substream(seed, "perturbation", 0));
    Eigen::MatrixXd E(K, K);
    for (Eigen::Index c = 0; c < K; ++c)
        for (Eigen::Index r = 0; r < K; ++r) E(r, c) = rng.normal();
    E *= 1.0 / E.norm();
    Eigen::VectorXd d(K);
    for (Eigen::Index r = 0; r < K; ++r) d[r] = rng.normal();
    d *= 1.0 / d.norm();

    PerturbationCurve curve;
    for (size_t i = 0; i < omega_list.size(); ++i) {
        const double w = omega_list[i];
        curve.omega.push_back(w);
        if (w == 0.0) {
            curve.deviation.push_back(0.0);
            continue;
        }
        const Eigen::MatrixXd Phi_hat = orthonormalize(Phi + w * E);
        const Eigen::VectorXd inv_sqrt_hat = inv_sqrt + w * d;
        const Eigen::MatrixXd W_hat = Phi_hat * inv_sqrt_hat.asDiagonal();
        Eigen::MatrixXd adj_hat = W_hat.transpose() * R.values * W_hat;
        adj_hat = 0.5 * (adj_hat + adj_hat.transpose());
        curve.deviation.push_back(spectral_norm(adj_hat - adj_exact));
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < curve.omega.size(); ++i) {
        if (!(curve.omega[i] > 0.0) || !(curve.deviation[i] > 0.0)) continue;
        const double x = std::log(curve.omega[i]);
        const double y = std::log(curve.deviation[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    curve.loglog_slope =
        n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    return curve;
}

} // namespace spikedim
