#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace spikedim {

// Population model: eigenvalues (lambda_1 I_{m_1}, ..., lambda_L I_{m_L},
// bulk I_{K-M}) with lambda_1 > ... > lambda_L > bulk.
struct SpikedModelSpec {
    std::vector<std::pair<double, int>> spikes;  // (value, multiplicity)
    double bulk_value = 1.0;
    int K = 0;

    void validate() const;
    int total_multiplicity() const;
};

struct Thresholds {
    double delta = 0.0;          // spike/bulk cut
    double epsilon = 0.0;        // grouping radius
    double epsilon0 = 0.0;       // grid step for the epsilon search
    double epsilon_prime = 0.0;  // exclusion radius inside the estimator sum
};

// Half-open index range [begin, end) into the descending eigenvalue vector.
struct Group {
    int begin = 0;
    int end = 0;
    int size() const { return end - begin; }
};

struct StopRule {
    enum Kind { Fraction, Span } kind = Fraction;
    double p = 0.4;  // epsilon search stops past p * lambda_1 (Fraction mode)
};

struct IDReport {
    int L = 0;
    std::vector<double> estimated_spikes;  // descending
    std::vector<double> group_means;
    std::vector<Group> groups;
    double bulk_estimate = 0.0;
    Thresholds thresholds;
    double gamma_T = 0.0;
    std::vector<double> epsilon_grid;
    std::vector<double> discrepancy_trace;  // one per grid entry
    std::vector<std::string> warnings;
    Eigen::VectorXd sample_eigenvalues;
};

struct IDConfig {
    std::optional<double> epsilon0;       // absolute; default smallest eigenvalue
    std::optional<double> epsilon0_frac;  // alternative: fraction of lambda_1
    std::optional<double> delta;          // override (skips the delta search)
    std::optional<double> epsilon_prime;  // default 1% of lambda_1
    int mc_samples = 100;                 // V in the epsilon search
    Dist dist = Dist::Gaussian;
    StopRule stop;
    std::uint64_t seed = 1;
    bool strict_pure_noise = false;  // surface the model error instead of L=0
    bool center = true;
    bool normalize = false;          // rescale data to sqrt(K/||R||) * Y first
    double eig_floor = 1e-10;        // relative floor inside the whitener
};

// Marchenko-Pastur bulk edges sigma^2 (1 -+ sqrt(gamma))^2.
std::pair<double, double> mp_edges(double gamma, double sigma2);

// Greedy left-to-right grouping of the spiked prefix {k : eigs[k] > delta}:
// each group absorbs every subsequent spiked index within epsilon of its
// leading eigenvalue. Returns consecutive, disjoint groups covering the
// prefix.
std::vector<Group> group_eigenvalues(const Eigen::VectorXd& eigs, double delta,
                                     double epsilon);

// -1 / s where s = (gamma_T - 1)/mean + (1/T) sum over all eigenvalues
// farther than epsilon_prime from the group mean of 1/(eig_j - mean).
double estimate_spike_group(const Eigen::VectorXd& eigs, const Group& group,
                            long T, double epsilon_prime);

double estimate_bulk(const Eigen::VectorXd& eigs, double delta);

// Walk up from the smallest eigenvalue while consecutive gaps stay below
// epsilon0/2; the first eigenvalue whose upward gap breaks the run is delta.
// Throws ModelError("The spiked eigenvalues model cannot be employed") when
// the walk exhausts the spectrum.
double choose_delta(const Eigen::VectorXd& eigs, double epsilon0);

struct EpsilonChoice {
    double epsilon = 0.0;
    std::vector<double> grid;
    std::vector<double> trace;        // Monte-Carlo discrepancy per grid entry
    bool fallback_argmin = false;     // no candidate passed the screen
    std::vector<std::string> warnings;
};

// Scan epsilon = epsilon0, 2*epsilon0, ... until the stop rule, fitting the
// spiked model at each candidate. Selection: the smallest candidate whose
// fitted spikes are positive, strictly descending, above the bulk estimate
// and separated by at least epsilon0; if none qualifies, fall back to the
// minimizer of the Monte-Carlo discrepancy trace (always computed: common
// random numbers, V draws of mean data_mean and the fitted diagonal
// covariance).
// eigvecs is reserved: the fitted covariance is used in its diagonal form.
EpsilonChoice choose_epsilon(const Eigen::VectorXd& data_mean,
                             const Eigen::VectorXd& eigs,
                             const Eigen::MatrixXd& eigvecs, double delta,
                             double epsilon0, double epsilon_prime, long T,
                             int V, Dist dist, const StopRule& stop,
                             std::uint64_t seed);

// Full pipeline: (optional) normalize, whiten when a noise covariance is
// given, eigendecompose, learn delta and epsilon, group, estimate.
IDReport intrinsic_dimensionality(const DataMatrix& data,
                                  const CovarianceMatrix* noise,
                                  const IDConfig& config);

// As above but starting from an already-computed descending spectrum (the
// grouping and estimation stages only; data mean needed for the epsilon
// search).
IDReport intrinsic_dimensionality_from_spectrum(const Eigen::VectorXd& eigs,
                                                const Eigen::VectorXd& data_mean,
                                                long T, const IDConfig& config);

// T columns drawn iid, mean zero, covariance O' V O (V the model's diagonal,
// O identity or a seeded random rotation).
DataMatrix sample_spiked_model(const SpikedModelSpec& spec, long T, Dist dist,
                               std::uint64_t seed,
                               bool random_orthogonal = false);

} // namespace spikedim
