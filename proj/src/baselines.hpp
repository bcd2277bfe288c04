#pragma once

#include <vector>

#include <Eigen/Dense>

namespace spikedim {

enum class Criterion { AIC, MDL, EIF, PCA };

struct CriterionCurve {
    Criterion criterion;
    std::vector<double> values;  // per N = 0..K-1 (PCA: cumulative fractions)
    int argmin_or_count = 0;
    bool clamped = false;  // nonpositive eigenvalues were clamped before logs
};

// Wax-Kailath information criteria over candidate source counts N = 0..K-1,
// evaluated in log space (the (K-N)T exponent overflows otherwise).
CriterionCurve aic_count(const Eigen::VectorXd& eigs_descending, long T);
CriterionCurve mdl_count(const Eigen::VectorXd& eigs_descending, long T);

// Empirical indicator function sqrt(sum of trailing eigs) /
// (sqrt(T) * (K-N)^{3/2}).
CriterionCurve eif_count(const Eigen::VectorXd& eigs_descending, long T);

// Smallest N whose cumulative variance fraction reaches `fraction`.
CriterionCurve pca_count(const Eigen::VectorXd& eigs_descending, double fraction);

} // namespace spikedim
