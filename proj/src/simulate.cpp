#include "simulate.hpp"

#include <cmath>

#include "rng.hpp"

namespace spikedim {

namespace {
constexpr double kMu0Over4Pi = 1e-7;  // T m / A
constexpr double kPi = 3.14159265358979323846;
}  // namespace

Dipole Dipole::from_spherical(double r_mm, double phi, double theta, double m1,
                              double m2, double s) {
    Dipole d;
    const double st = std::sin(theta), ct = std::cos(theta);
    const double sp = std::sin(phi), cp = std::cos(phi);
    d.position_mm = r_mm * Eigen::Vector3d(st * cp, st * sp, ct);
    const Eigen::Vector3d e_theta(ct * cp, ct * sp, -st);
    const Eigen::Vector3d e_phi(-sp, cp, 0.0);
    const double amplitude = s > 0.0 ? s : 1.0;
    d.moment_nAm = amplitude * (m1 * e_theta + m2 * e_phi);
    d.table_params = {{m1, m2, s}};
    return d;
}

SensorArray place_sensors(int n, double radius_mm, std::uint64_t seed) {
    if (n < 1) throw ConfigError("need at least one sensor");
    if (!(radius_mm > 0.0)) throw ConfigError("sensor radius must be positive");
    Rng rng(substream(seed, "sensors", 0));
    SensorArray arr;
    arr.positions_mm.resize(n, 3);
    arr.orientations.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        // Archimedes: z uniform on [0, R] is uniform on the hemisphere
        const double z = radius_mm * rng.uniform01();
        const double phi = 2.0 * kPi * rng.uniform01();
        const double rho = std::sqrt(std::max(radius_mm * radius_mm - z * z, 0.0));
        arr.positions_mm.row(i) << rho * std::cos(phi), rho * std::sin(phi), z;
        arr.orientations.row(i) = arr.positions_mm.row(i) / radius_mm;
    }
    return arr;
}

Eigen::Vector3d dipole_field(const Dipole& d, const Eigen::Vector3d& pos_mm) {
    const Eigen::Vector3d r = (pos_mm - d.position_mm) * 1e-3;  // m
    const double dist = r.norm();
    if (!(dist > 1e-9))
        throw DataError("sensor coincides with a dipole position");
    const Eigen::Vector3d q = d.moment_nAm * 1e-9;  // A m
    const Eigen::Vector3d b = kMu0Over4Pi * q.cross(r) / (dist * dist * dist);
    return b * 1e15;  // fT
}

double dipole_field_radial(const Dipole& d, const Eigen::Vector3d& pos_mm,
                           const Eigen::Vector3d& orientation) {
    return dipole_field(d, pos_mm).dot(orientation);
}

double time_course(int index, double t_seconds) {
    switch (index) {
        case 1: return std::sin(2.0 * kPi * 10.0 * t_seconds);
        case 2: return std::cos(2.0 * kPi * 15.0 * t_seconds);
        case 3: return std::sin(2.0 * kPi * 20.0 * t_seconds - kPi / 4.0);
        case 4: return std::cos(2.0 * kPi * 30.0 * t_seconds - kPi / 4.0);
        default:
            throw ConfigError("time course index must be in 1..4");
    }
}

std::vector<Dipole> reference_dipoles(std::vector<std::string>* warnings) {
    // Columns per dipole: radius mm, azimuth, inclination, m1, m2, s.
    // Angles are radians.
    static const double tab[4][6] = {
        {0.0, 0.5, 3.0, 1.0, 0.0, 0.0},
        {10.0, 0.1, 0.1, 0.0, 0.5, 0.5},
        {-10.0, -0.5, -0.3, 0.3, 0.4, 0.2},
        {40.0, -0.3, 0.3, 1.0, 0.7, 0.0},
    };
    std::vector<Dipole> out;
    for (const auto& row : tab)
        out.push_back(Dipole::from_spherical(row[0], row[1], row[2], row[3],
                                             row[4], row[5]));
    if (warnings != nullptr) {
        warnings->push_back(
            "reference dipoles: rows 1 and 4 list amplitude s = 0; their "
            "(m1, m2) tangent components are used directly as the moment");
        warnings->push_back(
            "reference dipoles: row 1 sits at the origin, where the radial "
            "field of a point dipole vanishes identically");
    }
    return out;
}

SimulationResult simulate(const SimulationConfig& config) {
    if (config.T < 2) throw ConfigError("simulation needs T >= 2");
    if (config.n_trials < 1) throw ConfigError("need at least one trial");
    if (!(config.snr > 0.0)) throw ConfigError("SNR must be positive");
    if (!(config.sample_period_ms > 0.0))
        throw ConfigError("sample period must be positive");

    SimulationResult res;
    std::vector<Dipole> dipoles = config.dipoles;
    if (dipoles.empty()) dipoles = reference_dipoles(&res.warnings);
    if (dipoles.size() > 4)
        throw ConfigError("only 4 reference time courses are defined");
    for (const auto& d : dipoles)
        if (d.position_mm.norm() >= config.head.radii_mm[0])
            throw ConfigError("dipole lies outside the innermost shell");
    res.n_dipoles = static_cast<int>(dipoles.size());

    const SensorArray sensors =
        place_sensors(config.n_sensors, config.sensor_radius_mm, config.seed);
    const int K = config.n_sensors;
    const long T = config.T;

    Eigen::MatrixXd gain(K, res.n_dipoles);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < res.n_dipoles; ++j)
            gain(k, j) = dipole_field_radial(dipoles[j],
                                             sensors.positions_mm.row(k),
                                             sensors.orientations.row(k));
    Eigen::MatrixXd courses(res.n_dipoles, T);
    for (long t = 0; t < T; ++t) {
        const double sec = static_cast<double>(t) * config.sample_period_ms / 1000.0;
        for (int j = 0; j < res.n_dipoles; ++j)
            courses(j, t) = time_course(j + 1, sec);
    }
    res.clean_signal = gain * courses;

    // Per-channel noise variance tracks the per-channel signal variance.
    Eigen::VectorXd signal_var(K);
    for (int k = 0; k < K; ++k) {
        const double mean = res.clean_signal.row(k).mean();
        signal_var[k] =
            (res.clean_signal.row(k).array() - mean).square().sum() /
            static_cast<double>(T);
    }

    const bool noise_free = std::isinf(config.snr);
    Eigen::VectorXd noise_sd = Eigen::VectorXd::Zero(K);
    if (!noise_free) {
        int silent = 0;
        for (int k = 0; k < K; ++k) {
            if (signal_var[k] > 0.0)
                noise_sd[k] = std::sqrt(signal_var[k] / config.snr);
            else
                ++silent;
        }
        if (silent > 0)
            res.warnings.push_back(
                std::to_string(silent) +
                " channel(s) carry no signal; their noise variance is 0 "
                "(signal variance / SNR with a zero numerator)");
    }

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(K, T);
    for (int trial = 0; trial < config.n_trials; ++trial) {
        Eigen::MatrixXd X = res.clean_signal;
        if (!noise_free) {
            Rng rng(substream(config.seed, "trial",
                              static_cast<std::uint64_t>(trial)));
            for (long t = 0; t < T; ++t)
                for (int k = 0; k < K; ++k)
                    X(k, t) += noise_sd[k] * rng.normal();
        }
        acc += X;
        res.trials.emplace_back(std::move(X), config.sample_period_ms);
    }
    res.averaged = DataMatrix(acc / static_cast<double>(config.n_trials),
                              config.sample_period_ms);
    return res;
}

} // namespace spikedim
