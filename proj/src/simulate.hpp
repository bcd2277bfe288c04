#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace spikedim {

struct Dipole {
    Eigen::Vector3d position_mm = Eigen::Vector3d::Zero();
    Eigen::Vector3d moment_nAm = Eigen::Vector3d::Zero();
    // (m1, m2, s) preserved when the dipole came from the tabulated set
    std::optional<std::array<double, 3>> table_params;

    // theta = inclination from +z, phi = azimuth, both radians; the moment is
    // m1 * e_theta + m2 * e_phi in the local tangent basis, scaled by s when
    // s > 0.
    static Dipole from_spherical(double r_mm, double phi, double theta,
                                 double m1, double m2, double s);
};

struct SensorArray {
    Eigen::MatrixXd positions_mm;   // n x 3, on the sphere
    Eigen::MatrixXd orientations;   // n x 3, unit radial
};

// Three concentric conductivity shells. Physically inert for radial
// magnetometers (spherically symmetric volume currents have no radial field)
// but kept as configuration so geometry stays declared in one place.
struct HeadModel {
    std::array<double, 3> radii_mm{88.0, 92.0, 100.0};
    std::array<double, 3> conductivities{1.0, 1.0 / 80.0, 1.0};
};

struct SimulationConfig {
    std::vector<Dipole> dipoles;           // empty = the 4-dipole reference set
    int n_sensors = 128;
    double sensor_radius_mm = 100.0;
    long T = 1000;
    double sample_period_ms = 1.0;
    double snr = std::numeric_limits<double>::infinity();
    int n_trials = 5;
    std::uint64_t seed = 1;
    HeadModel head;
};

struct SimulationResult {
    DataMatrix averaged;
    std::vector<DataMatrix> trials;
    Eigen::MatrixXd clean_signal;  // K x T, noise-free
    int n_dipoles = 0;
    std::vector<std::string> warnings;
};

// n points uniform on the upper hemisphere (z along the axis is uniform on
// [0, R], azimuth uniform), radial orientations.
SensorArray place_sensors(int n, double radius_mm, std::uint64_t seed);

// Point-dipole field (fT) at a sensor position; positions mm, moment nA*m.
Eigen::Vector3d dipole_field(const Dipole& d, const Eigen::Vector3d& pos_mm);

// Radial component: field projected on the sensor orientation.
double dipole_field_radial(const Dipole& d, const Eigen::Vector3d& pos_mm,
                           const Eigen::Vector3d& orientation);

// Reference waveforms 1..4 (10, 15, 20, 30 Hz; the third and fourth carry a
// -pi/4 phase), t in seconds.
double time_course(int index, double t_seconds);

// The tabulated 4-dipole configuration. Appends importer notes (ambiguous
// zero-amplitude rows, origin placement) to `warnings` when non-null.
std::vector<Dipole> reference_dipoles(std::vector<std::string>* warnings);

SimulationResult simulate(const SimulationConfig& config);

} // namespace spikedim
