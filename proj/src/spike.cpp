#include "spike.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snr.hpp"

namespace spikedim {

namespace {
constexpr int kMaxGridSteps = 10000;
const char* kModelErrorMsg = "The spiked eigenvalues model cannot be employed";
}  // namespace

void SpikedModelSpec::validate() const {
    if (K < 2) throw ConfigError("spiked model needs K >= 2");
    double prev = std::numeric_limits<double>::infinity();
    int M = 0;
    for (const auto& [value, mult] : spikes) {
        if (!(value > bulk_value))
            throw ConfigError("spike values must exceed the bulk value");
        if (!(value < prev))
            throw ConfigError("spike values must be strictly decreasing");
        if (mult < 1) throw ConfigError("spike multiplicities must be positive");
        prev = value;
        M += mult;
    }
    if (M >= K)
        throw ConfigError("total spike multiplicity must be smaller than K");
    if (!(bulk_value > 0.0)) throw ConfigError("bulk value must be positive");
}

int SpikedModelSpec::total_multiplicity() const {
    int M = 0;
    for (const auto& s : spikes) M += s.second;
    return M;
}

std::pair<double, double> mp_edges(double gamma, double sigma2) {
    if (!(gamma > 0.0)) throw ConfigError("mp_edges requires gamma > 0");
    if (!(sigma2 > 0.0)) throw ConfigError("mp_edges requires sigma2 > 0");
    const double r = std::sqrt(gamma);
    return {sigma2 * (1.0 - r) * (1.0 - r), sigma2 * (1.0 + r) * (1.0 + r)};
}

static void require_descending(const Eigen::VectorXd& eigs) {
    for (Eigen::Index i = 1; i < eigs.size(); ++i)
        if (eigs[i] > eigs[i - 1])
            throw DataError("eigenvalues must be sorted descending");
}

std::vector<Group> group_eigenvalues(const Eigen::VectorXd& eigs, double delta,
                                     double epsilon) {
    require_descending(eigs);
    if (!(epsilon > 0.0)) throw ConfigError("grouping radius must be positive");
    int spiked = 0;
    while (spiked < eigs.size() && eigs[spiked] > delta) ++spiked;
    std::vector<Group> groups;
    int k = 0;
    while (k < spiked) {
        const double lead = eigs[k];
        int end = k + 1;
        while (end < spiked && std::abs(eigs[end] - lead) <= epsilon) ++end;
        groups.push_back({k, end});
        k = end;
    }
    return groups;
}

double estimate_spike_group(const Eigen::VectorXd& eigs, const Group& group,
                            long T, double epsilon_prime) {
    if (group.size() <= 0) throw ConfigError("empty eigenvalue group");
    const auto K = eigs.size();
    const double gamma = static_cast<double>(K) / static_cast<double>(T);
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ConfigError("estimator requires 0 < K/T < 1");
    const double mean =
        eigs.segment(group.begin, group.size()).mean();
    if (!(mean > 0.0)) throw ModelError("group mean eigenvalue is not positive");
    double s = (gamma - 1.0) / mean;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
        const double d = eigs[j] - mean;
        if (std::abs(d) > epsilon_prime) acc += 1.0 / d;
    }
    s += acc / static_cast<double>(T);
    if (s == 0.0 || !std::isfinite(s))
        throw ModelError("spike estimator degenerate (s = 0 or non-finite)");
    return -1.0 / s;
}

double estimate_bulk(const Eigen::VectorXd& eigs, double delta) {
    double sum = 0.0;
    int n = 0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i)
        if (eigs[i] <= delta) {
            sum += eigs[i];
            ++n;
        }
    if (n == 0) throw ModelError("no bulk eigenvalues at or below delta");
    return sum / n;
}

double choose_delta(const Eigen::VectorXd& eigs, double epsilon0) {
    require_descending(eigs);
    const auto K = eigs.size();
    if (K < 2) throw DataError("delta search needs at least 2 eigenvalues");
    // i is 1-based to mirror the usual statement of the walk
    Eigen::Index i = K;
    double delta = eigs[K - 1];
    while (eigs[i - 2] - eigs[i - 1] < epsilon0 / 2.0) {
        --i;
        delta = eigs[i - 1];
        if (i < 2) throw ModelError(kModelErrorMsg);
    }
    return delta;
}

namespace {

struct CandidateFit {
    std::vector<Group> groups;
    std::vector<double> spikes;
    double bulk = 0.0;
    bool usable = false;    // estimation completed without degeneracy
    bool feasible = false;  // passes the model-consistency screen
};

CandidateFit fit_candidate(const Eigen::VectorXd& eigs, double delta,
                           double epsilon, double epsilon0,
                           double epsilon_prime, long T) {
    CandidateFit fit;
    fit.groups = group_eigenvalues(eigs, delta, epsilon);
    if (fit.groups.empty()) return fit;
    try {
        fit.bulk = estimate_bulk(eigs, delta);
        for (const auto& g : fit.groups)
            fit.spikes.push_back(estimate_spike_group(eigs, g, T, epsilon_prime));
    } catch (const Error&) {
        return fit;
    }
    fit.usable = true;
    // Feasibility: the fitted model must satisfy its own assumptions --
    // positive spikes in strictly descending order, all above the bulk level,
    // and adjacent spikes separated by at least epsilon0.
    for (double s : fit.spikes)
        if (!std::isfinite(s) || s <= 0.0 || s <= fit.bulk) return fit;
    for (size_t l = 1; l < fit.spikes.size(); ++l)
        if (fit.spikes[l - 1] - fit.spikes[l] < epsilon0) return fit;
    fit.feasible = true;
    return fit;
}

double discrepancy(const Eigen::VectorXd& data_mean, const Eigen::VectorXd& eigs,
                   const CandidateFit& fit, int V, Dist dist, Rng& rng) {
    // Diagonal model covariance rebuilt from the fit; bulk fills the rest.
    const auto K = eigs.size();
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(K, std::max(fit.bulk, 0.0));
    for (size_t l = 0; l < fit.groups.size(); ++l) {
        const double v = std::max(fit.spikes[l], 0.0);
        for (int i = fit.groups[l].begin; i < fit.groups[l].end; ++i) diag[i] = v;
    }
    const Eigen::VectorXd sd = diag.cwiseSqrt();
    // Common random numbers: Z_i = mean + sqrt(diag) .* xi_i, so the average
    // deviation is sqrt(diag) .* xi_bar and candidates differ only through
    // the fitted covariance.
    Eigen::VectorXd xibar = Eigen::VectorXd::Zero(K);
    for (int i = 0; i < V; ++i)
        for (Eigen::Index k = 0; k < K; ++k) xibar[k] += rng.sample(dist);
    xibar /= static_cast<double>(V);
    const double denom = data_mean.norm();
    if (!(denom > 0.0)) throw ModelError("degenerate zero data mean in epsilon search");
    return (sd.cwiseProduct(xibar)).norm() / denom;
}

}  // namespace

EpsilonChoice choose_epsilon(const Eigen::VectorXd& data_mean,
                             const Eigen::VectorXd& eigs,
                             const Eigen::MatrixXd& /*eigvecs*/,
                             double delta, double epsilon0,
                             double epsilon_prime, long T, int V, Dist dist,
                             const StopRule& stop, std::uint64_t seed) {
    require_descending(eigs);
    if (!(epsilon0 > 0.0)) throw ConfigError("epsilon0 must be positive");
    if (V < 1) throw ConfigError("epsilon search needs at least one sample");
    const auto K = eigs.size();

    EpsilonChoice out;
    if (!(eigs[0] > delta)) {
        out.epsilon = epsilon0;
        out.grid = {epsilon0};
        out.trace = {0.0};
        out.warnings.push_back(
            "no eigenvalue above delta; epsilon defaults to epsilon0");
        return out;
    }
    const double bound = stop.kind == StopRule::Fraction
                             ? stop.p * eigs[0]
                             : eigs[0] - eigs[K - 1];
    std::vector<CandidateFit> fits;
    for (int j = 1; j <= kMaxGridSteps; ++j) {
        const double eps = epsilon0 * j;
        Rng rng(substream(seed, "epsilon-grid", static_cast<std::uint64_t>(j)));
        CandidateFit fit =
            fit_candidate(eigs, delta, eps, epsilon0, epsilon_prime, T);
        double d = std::numeric_limits<double>::infinity();
        if (fit.usable) d = discrepancy(data_mean, eigs, fit, V, dist, rng);
        out.grid.push_back(eps);
        out.trace.push_back(d);
        fits.push_back(std::move(fit));
        if (eps > bound) break;  // the grid includes the first over-bound eps
        if (j == kMaxGridSteps)
            throw ConfigError("epsilon grid exceeded " +
                              std::to_string(kMaxGridSteps) +
                              " steps; epsilon0 is degenerate for this spectrum");
    }
    // Smallest feasible candidate wins; the discrepancy trace is reported
    // either way and decides ties only when nothing is feasible.
    for (size_t j = 0; j < fits.size(); ++j) {
        if (fits[j].feasible) {
            out.epsilon = out.grid[j];
            return out;
        }
    }
    out.fallback_argmin = true;
    out.warnings.push_back(
        "no epsilon candidate produced a self-consistent fit; "
        "falling back to the discrepancy minimizer");
    size_t best = 0;
    for (size_t j = 1; j < out.trace.size(); ++j)
        if (out.trace[j] < out.trace[best]) best = j;
    out.epsilon = out.grid[best];
    return out;
}

static IDReport build_report(const Eigen::VectorXd& eigs,
                             const Eigen::VectorXd& data_mean, long T,
                             const IDConfig& config) {
    IDReport rep;
    rep.sample_eigenvalues = eigs;
    const auto K = eigs.size();
    rep.gamma_T = static_cast<double>(K) / static_cast<double>(T);
    const double lam1 = eigs[0];

    double epsilon0;
    if (config.epsilon0) {
        epsilon0 = *config.epsilon0;
    } else if (config.epsilon0_frac) {
        epsilon0 = *config.epsilon0_frac * lam1;
    } else {
        epsilon0 = eigs[K - 1];  // smallest sample eigenvalue
        if (!(epsilon0 > 1e-12 * std::abs(lam1))) {
            epsilon0 = 1e-3 * std::abs(lam1);
            rep.warnings.push_back(
                "smallest eigenvalue is degenerate; epsilon0 fell back to "
                "0.1% of the largest");
        }
    }
    if (!(epsilon0 > 0.0))
        throw ConfigError("epsilon0 must be positive (degenerate spectrum?)");
    const double epsilon_prime =
        config.epsilon_prime ? *config.epsilon_prime : 0.01 * lam1;

    double delta;
    if (config.delta) {
        delta = *config.delta;
    } else {
        try {
            delta = choose_delta(eigs, epsilon0);
        } catch (const ModelError&) {
            if (config.strict_pure_noise) throw;
            rep.L = 0;
            rep.bulk_estimate = eigs.mean();
            rep.thresholds = {lam1, 0.0, epsilon0, epsilon_prime};
            rep.warnings.push_back(
                "no spiked/bulk gap found; reporting L = 0 (pure noise)");
            return rep;
        }
    }

    EpsilonChoice choice = choose_epsilon(
        data_mean, eigs, Eigen::MatrixXd(), delta, epsilon0, epsilon_prime, T,
        config.mc_samples, config.dist, config.stop, config.seed);
    rep.epsilon_grid = choice.grid;
    rep.discrepancy_trace = choice.trace;
    for (auto& w : choice.warnings) rep.warnings.push_back(w);

    rep.groups = group_eigenvalues(eigs, delta, choice.epsilon);
    rep.L = static_cast<int>(rep.groups.size());
    rep.bulk_estimate = estimate_bulk(eigs, delta);
    for (const auto& g : rep.groups) {
        rep.group_means.push_back(eigs.segment(g.begin, g.size()).mean());
        rep.estimated_spikes.push_back(
            estimate_spike_group(eigs, g, T, epsilon_prime));
    }
    rep.thresholds = {delta, choice.epsilon, epsilon0, epsilon_prime};

    // Assumption checks are advisory: the gap between the smallest estimated
    // spike and the bulk should clear sqrt(K/T), and adjacent spikes should
    // be separated by at least epsilon0.
    if (rep.L > 0) {
        const double gap = rep.estimated_spikes.back() - rep.bulk_estimate;
        if (gap < std::sqrt(rep.gamma_T))
            rep.warnings.push_back(
                "spike/bulk separation below sqrt(K/T); smallest spikes may "
                "be unreliable");
        for (int l = 1; l < rep.L; ++l)
            if (rep.estimated_spikes[l - 1] - rep.estimated_spikes[l] < epsilon0)
                rep.warnings.push_back(
                    "adjacent estimated spikes closer than epsilon0 "
                    "(distinctness assumption violated)");
    }
    return rep;
}

IDReport intrinsic_dimensionality_from_spectrum(const Eigen::VectorXd& eigs,
                                                const Eigen::VectorXd& data_mean,
                                                long T, const IDConfig& config) {
    require_descending(eigs);
    if (eigs.size() < 2) throw DataError("need at least 2 eigenvalues");
    return build_report(eigs, data_mean, T, config);
}

IDReport intrinsic_dimensionality(const DataMatrix& data,
                                  const CovarianceMatrix* noise,
                                  const IDConfig& config) {
    if (data.channels() < 2)
        throw DataError("dimensionality estimation needs at least 2 channels");
    const long T = static_cast<long>(data.samples());
    const auto K = data.channels();
    if (!(static_cast<double>(K) / static_cast<double>(T) < 1.0))
        throw DataError("estimator requires K < T");

    DataMatrix work = data;
    if (config.normalize) {
        const CovarianceMatrix R = sample_covariance(work, config.center);
        work = normalize_data(work, R);
    }

    CovarianceMatrix R = sample_covariance(work, config.center);
    Eigen::VectorXd mean = work.values.rowwise().mean();
    Eigen::VectorXd eigs;
    if (noise != nullptr) {
        if (noise->dim() != K) throw DataError("noise covariance dimension mismatch");
        const WhiteningOperator W = whitener_from_noise(*noise, config.eig_floor);
        const AdjustedCovariance adj = adjusted_covariance(R, W);
        eigs = eigenvalues_descending(CovarianceMatrix(adj.matrix));
        mean = W.matrix.transpose() * mean;
    } else {
        eigs = eigenvalues_descending(R);
    }
    return build_report(eigs, mean, T, config);
}

DataMatrix sample_spiked_model(const SpikedModelSpec& spec, long T, Dist dist,
                               std::uint64_t seed, bool random_orthogonal) {
    spec.validate();
    if (T < 2) throw ConfigError("need at least 2 samples");
    const int K = spec.K;
    Eigen::VectorXd scale = Eigen::VectorXd::Constant(K, std::sqrt(spec.bulk_value));
    int row = 0;
    for (const auto& [value, mult] : spec.spikes)
        for (int m = 0; m < mult; ++m) scale[row++] = std::sqrt(value);

    Rng rng(substream(seed, "spiked-model", 0));
    Eigen::MatrixXd Y(K, T);
    // column-major fill so the draw order is part of the format
    for (long t = 0; t < T; ++t)
        for (int k = 0; k < K; ++k) Y(k, t) = scale[k] * rng.sample(dist);

    if (random_orthogonal) {
        Rng orng(substream(seed, "spiked-model-rotation", 0));
        Eigen::MatrixXd G(K, K);
        for (int j = 0; j < K; ++j)
            for (int i = 0; i < K; ++i) G(i, j) = orng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
        Eigen::MatrixXd Q = qr.householderQ();
        const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int j = 0; j < K; ++j)
            if (R(j, j) < 0.0) Q.col(j) *= -1.0;
        Y = Q.transpose() * Y;
    }
    return DataMatrix(std::move(Y), 1.0);
}

} // namespace spikedim
