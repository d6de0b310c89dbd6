#include "ucadoa/array.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>

namespace ucadoa {

void ArrayConfig::validate() const {
    if (n_sensors < 3) throw std::invalid_argument("ArrayConfig: n_sensors must be >= 3");
    if (!(radius > 0.0)) throw std::invalid_argument("ArrayConfig: radius must be > 0");
    if (!(wavelength > 0.0)) throw std::invalid_argument("ArrayConfig: wavelength must be > 0");
}

void SourceSet::validate() const {
    if (sources.empty()) throw std::invalid_argument("SourceSet: at least one source required");
    for (const Source& s : sources) {
        if (!(s.azimuth_deg >= 0.0 && s.azimuth_deg < 360.0))
            throw std::invalid_argument("SourceSet: azimuth must be in [0, 360)");
        if (!(s.elevation_deg >= 0.0 && s.elevation_deg <= 90.0))
            throw std::invalid_argument("SourceSet: elevation must be in [0, 90]");
        if (!(s.power > 0.0)) throw std::invalid_argument("SourceSet: power must be > 0");
    }
}

int CouplingVector::dof(int n_sensors) {
    // (N+1)/2 for odd N, N/2 + 1 for even N; both reduce to N/2 + 1 in integer division.
    return n_sensors / 2 + 1;
}

CouplingVector CouplingVector::identity(int n_sensors) {
    CouplingVector c;
    c.n_sensors = n_sensors;
    c.coeffs = VecC::Zero(dof(n_sensors));
    c.coeffs(0) = 1.0;
    return c;
}

void CouplingVector::validate_structure() const {
    if (n_sensors < 3) throw std::invalid_argument("CouplingVector: n_sensors must be >= 3");
    if (coeffs.size() != dof(n_sensors))
        throw std::invalid_argument("CouplingVector: expected " + std::to_string(dof(n_sensors)) +
                                    " coefficients for N = " + std::to_string(n_sensors));
    if (coeffs(0) != cxd(1.0, 0.0))
        throw std::invalid_argument("CouplingVector: first coefficient must be exactly 1");
}

void CouplingVector::validate_magnitudes() const {
    for (int i = 1; i < coeffs.size(); ++i) {
        if (std::abs(coeffs(i)) > std::abs(coeffs(i - 1)))
            throw std::invalid_argument("CouplingVector: |c" + std::to_string(i + 1) +
                                        "| exceeds |c" + std::to_string(i) + "|");
    }
}

VecC steering_vector(const ArrayConfig& cfg, double azimuth_deg, double elevation_deg) {
    cfg.validate();
    if (!(azimuth_deg >= 0.0 && azimuth_deg < 360.0))
        throw std::domain_error("steering_vector: azimuth must be in [0, 360) degrees");
    if (!(elevation_deg >= 0.0 && elevation_deg <= 90.0))
        throw std::domain_error("steering_vector: elevation must be in [0, 90] degrees");
    const double kr = cfg.wave_number() * cfg.radius;
    const double az = deg2rad(azimuth_deg);
    const double sin_el = std::sin(deg2rad(elevation_deg));
    VecC a(cfg.n_sensors);
    for (int n = 0; n < cfg.n_sensors; ++n) {
        const double phase = kr * sin_el * std::cos(az - cfg.sensor_angle(n));
        a(n) = cxd(std::cos(phase), std::sin(phase));
    }
    return a;
}

MatC steering_matrix(const ArrayConfig& cfg, const SourceSet& set) {
    MatC a(cfg.n_sensors, set.count());
    for (int k = 0; k < set.count(); ++k)
        a.col(k) = steering_vector(cfg, set.sources[k].azimuth_deg, set.sources[k].elevation_deg);
    return a;
}

CouplingMatrix coupling_matrix(const CouplingVector& c) {
    c.validate_structure();
    const int n = c.n_sensors;
    CouplingMatrix out;
    out.matrix.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.matrix(i, j) = c.coeffs(coupling_index((j - i + n) % n, n));
    return out;
}

namespace {

// Circular complex Gaussian draws from a fixed Box-Muller transform over
// mt19937_64 bits; std::normal_distribution is not pinned across library
// versions, the benchmark CSVs must be.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : gen_(seed) {}

    cxd complex_normal(double variance) {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-std::log(u1) * variance);
        return cxd(r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2));
    }

private:
    double uniform() { // (0, 1]
        return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    std::mt19937_64 gen_;
};

} // namespace

std::pair<SnapshotMatrix, GroundTruth> synthesize(const ArrayConfig& cfg,
                                                  const SourceSet& set,
                                                  const CouplingVector& c,
                                                  int snapshots,
                                                  double snr_db,
                                                  std::uint64_t seed) {
    cfg.validate();
    if (set.count() > 0) set.validate();
    c.validate_structure();
    c.validate_magnitudes();
    if (c.n_sensors != cfg.n_sensors)
        throw std::invalid_argument("synthesize: coupling vector sized for a different array");
    if (snapshots < 1) throw std::invalid_argument("synthesize: snapshots must be >= 1");
    if (std::isnan(snr_db)) throw std::invalid_argument("synthesize: snr_db must not be NaN");

    const int n = cfg.n_sensors;
    const int k = set.count();

    double max_power = 1.0;
    for (const Source& s : set.sources) max_power = std::max(max_power, s.power);
    const double noise_var =
        std::isinf(snr_db) ? 0.0 : max_power / std::pow(10.0, snr_db / 10.0);

    GaussianSampler rng(seed);

    // Draw order is part of the contract: signal snapshots time-major, then noise.
    MatC s(k, snapshots);
    for (int t = 0; t < snapshots; ++t)
        for (int i = 0; i < k; ++i) s(i, t) = rng.complex_normal(set.sources[i].power);
    MatC e(n, snapshots);
    for (int t = 0; t < snapshots; ++t)
        for (int i = 0; i < n; ++i) e(i, t) = rng.complex_normal(noise_var);

    SnapshotMatrix x;
    if (k > 0) {
        const MatC coupled = coupling_matrix(c).matrix * (steering_matrix(cfg, set) * s);
        x.data = coupled + e;
    } else {
        x.data = e;
    }

    GroundTruth gt;
    gt.sources = set;
    gt.coupling = c;
    gt.noise_variance = noise_var;
    for (const Source& src : set.sources)
        gt.per_source_snr_db.push_back(noise_var == 0.0
                                           ? std::numeric_limits<double>::infinity()
                                           : 10.0 * std::log10(src.power / noise_var));
    gt.snapshots = snapshots;
    gt.seed = seed;
    return {std::move(x), std::move(gt)};
}

std::string GroundTruth::to_json() const {
    nlohmann::json j;
    j["sources"] = nlohmann::json::array();
    for (std::size_t i = 0; i < sources.sources.size(); ++i) {
        const Source& s = sources.sources[i];
        nlohmann::json js = {{"azimuth_deg", s.azimuth_deg},
                             {"elevation_deg", s.elevation_deg},
                             {"power", s.power}};
        if (i < per_source_snr_db.size() && std::isfinite(per_source_snr_db[i]))
            js["snr_db"] = per_source_snr_db[i];
        j["sources"].push_back(js);
    }
    j["coupling"] = nlohmann::json::array();
    for (int i = 0; i < coupling.coeffs.size(); ++i)
        j["coupling"].push_back({coupling.coeffs(i).real(), coupling.coeffs(i).imag()});
    j["n_sensors"] = coupling.n_sensors;
    j["noise_variance"] = noise_variance;
    j["noiseless"] = noise_variance == 0.0;
    j["snapshots"] = snapshots;
    j["seed"] = seed;
    return j.dump(2);
}

} // namespace ucadoa
