#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace ucadoa {

using cxd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Shortest circular distance between two azimuths, degrees, result in [0, 180].
inline double azimuth_distance_deg(double a, double b) {
    double d = std::fmod(std::abs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

// A direction of arrival: azimuth in [0, 360), elevation in [0, 90], degrees.
struct Direction {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
};

// Thrown when the sparse stage finds no active bands (signal indistinguishable
// from the zero solution at the chosen regularization).
class NoSourcesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when an adaptive series fails to meet its tolerance within the term cap.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ucadoa
