#pragma once

#include "ucadoa/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ucadoa {

// Uniform circular array in the x-y plane, sensors at angles 2*pi*n/N.
// radius and wavelength share one (arbitrary) length unit.
struct ArrayConfig {
    int n_sensors = 15;
    double radius = 1.0;
    double wavelength = 1.0;

    double wave_number() const { return 2.0 * kPi / wavelength; }
    double sensor_angle(int n) const { return 2.0 * kPi * n / n_sensors; }
    void validate() const; // n_sensors >= 3, radius > 0, wavelength > 0
};

struct Source {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double power = 1.0; // signal variance
};

struct SourceSet {
    std::vector<Source> sources;

    int count() const { return static_cast<int>(sources.size()); }
    void validate() const; // count >= 1, angles in range, powers > 0
};

// First row of the symmetric circular Toeplitz coupling matrix, c1..cL with
// c1 == 1. L = (N+1)/2 for odd N, N/2 + 1 for even N.
struct CouplingVector {
    VecC coeffs;
    int n_sensors = 0;

    static int dof(int n_sensors);
    static CouplingVector identity(int n_sensors);

    int dof() const { return static_cast<int>(coeffs.size()); }
    void validate_structure() const;  // c1 == 1, length matches dof(n_sensors)
    void validate_magnitudes() const; // 1 >= |c2| >= ... >= |cL|
};

struct CouplingMatrix {
    MatC matrix; // N x N, symmetric circulant
};

// Index into the coupling vector for circulant offset m in [0, N):
// 0 -> c1, min(m, N-m) -> c_{min+1}.
inline int coupling_index(int m, int n) { return m < n - m ? m : n - m; }

struct SnapshotMatrix {
    MatC data; // N x T

    int snapshot_count() const { return static_cast<int>(data.cols()); }
};

// Everything needed to score an estimate of a synthetic trial.
struct GroundTruth {
    SourceSet sources;
    CouplingVector coupling;
    double noise_variance = 0.0;
    std::vector<double> per_source_snr_db;
    int snapshots = 0;
    std::uint64_t seed = 0;

    std::string to_json() const;
};

VecC steering_vector(const ArrayConfig& cfg, double azimuth_deg, double elevation_deg);
MatC steering_matrix(const ArrayConfig& cfg, const SourceSet& set);
CouplingMatrix coupling_matrix(const CouplingVector& c);

// Simulate T snapshots X = C * A * S + E with circular complex Gaussian
// signals and noise. snr_db is relative to the strongest source power
// (relative to unit power if the source set is empty); +infinity means
// noiseless. Deterministic in (inputs, seed).
std::pair<SnapshotMatrix, GroundTruth> synthesize(const ArrayConfig& cfg,
                                                  const SourceSet& set,
                                                  const CouplingVector& c,
                                                  int snapshots,
                                                  double snr_db,
                                                  std::uint64_t seed);

} // namespace ucadoa
