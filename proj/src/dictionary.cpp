#include "ucadoa/dictionary.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace ucadoa {

void Band::validate() const {
    if (!(azimuth_lo_deg <= azimuth_hi_deg))
        throw std::invalid_argument("Band: azimuth bounds out of order");
    if (!(elevation_lo_deg <= elevation_hi_deg))
        throw std::invalid_argument("Band: elevation bounds out of order");
    if (azimuth_lo_deg < 0.0 || azimuth_hi_deg > 360.0)
        throw std::invalid_argument("Band: azimuth bounds must lie in [0, 360]");
    if (elevation_lo_deg < 0.0 || elevation_hi_deg > 90.0)
        throw std::invalid_argument("Band: elevation bounds must lie in [0, 90]");
}

bool Band::contains(double azimuth_deg, double elevation_deg) const {
    double az = std::fmod(azimuth_deg, 360.0);
    if (az < 0.0) az += 360.0;
    // Half-open tiles; the domain edges elevation == 90 and azimuth == 360 close.
    const bool az_in = az >= azimuth_lo_deg &&
                       (az < azimuth_hi_deg || (azimuth_hi_deg == 360.0 && az == 360.0));
    const bool el_in = elevation_deg >= elevation_lo_deg &&
                       (elevation_deg < elevation_hi_deg ||
                        (elevation_hi_deg == 90.0 && elevation_deg == 90.0));
    return az_in && el_in;
}

Direction band_center(const Band& band) {
    return {0.5 * (band.azimuth_lo_deg + band.azimuth_hi_deg),
            0.5 * (band.elevation_lo_deg + band.elevation_hi_deg)};
}

BandGrid make_stage0_grid(int azimuth_bands, int elevation_bands) {
    if (azimuth_bands < 1 || elevation_bands < 1)
        throw std::invalid_argument("make_stage0_grid: band counts must be >= 1");
    BandGrid grid;
    grid.stage = 0;
    grid.bands.reserve(static_cast<std::size_t>(azimuth_bands) * elevation_bands);
    for (int a = 0; a < azimuth_bands; ++a) {
        const double az_lo = 360.0 * a / azimuth_bands;
        const double az_hi = 360.0 * (a + 1) / azimuth_bands;
        for (int e = 0; e < elevation_bands; ++e) {
            const double el_lo = 90.0 * e / elevation_bands;
            const double el_hi = 90.0 * (e + 1) / elevation_bands;
            grid.bands.push_back({az_lo, az_hi, el_lo, el_hi});
        }
    }
    return grid;
}

BandGrid refine(const BandGrid& grid, const std::vector<int>& active,
                int azimuth_split, int elevation_split) {
    if (active.empty()) throw std::invalid_argument("refine: active set is empty");
    if (azimuth_split < 1 || elevation_split < 1)
        throw std::invalid_argument("refine: split counts must be >= 1");
    BandGrid out;
    out.stage = grid.stage + 1;
    out.bands.reserve(active.size() * static_cast<std::size_t>(azimuth_split) * elevation_split);
    for (int idx : active) {
        if (idx < 0 || idx >= static_cast<int>(grid.bands.size()))
            throw std::invalid_argument("refine: active index out of range");
        const Band& b = grid.bands[idx];
        // Shared edge arrays so adjacent children meet bit-exactly.
        std::vector<double> az_edges(azimuth_split + 1), el_edges(elevation_split + 1);
        for (int i = 0; i <= azimuth_split; ++i) {
            const double t = static_cast<double>(i) / azimuth_split;
            az_edges[i] = b.azimuth_lo_deg * (1.0 - t) + b.azimuth_hi_deg * t;
        }
        for (int i = 0; i <= elevation_split; ++i) {
            const double t = static_cast<double>(i) / elevation_split;
            el_edges[i] = b.elevation_lo_deg * (1.0 - t) + b.elevation_hi_deg * t;
        }
        for (int a = 0; a < azimuth_split; ++a)
            for (int e = 0; e < elevation_split; ++e)
                out.bands.push_back({az_edges[a], az_edges[a + 1], el_edges[e], el_edges[e + 1]});
    }
    return out;
}

namespace {

// Incremental I_n = integral of sin^n over [lo, hi]:
//   I_n = (sin^{n-1}(lo)cos(lo) - sin^{n-1}(hi)cos(hi)) / n + (n-1)/n * I_{n-2}.
struct SinPowerSeq {
    double s_lo, c_lo, s_hi, c_hi, width;
    double pow_lo = 1.0, pow_hi = 1.0; // sin^{n-1} at the bounds
    double prev2 = 0.0, prev1 = 0.0;
    int n = 0;

    SinPowerSeq(double lo, double hi)
        : s_lo(std::sin(lo)), c_lo(std::cos(lo)), s_hi(std::sin(hi)), c_hi(std::cos(hi)),
          width(hi - lo) {}

    double next() {
        double cur;
        if (n == 0) {
            cur = width;
        } else if (n == 1) {
            cur = c_lo - c_hi;
        } else {
            pow_lo *= s_lo; // sin^{n-1}
            pow_hi *= s_hi;
            cur = (pow_lo * c_lo - pow_hi * c_hi) / n + (n - 1.0) / n * prev2;
        }
        prev2 = prev1;
        prev1 = cur;
        ++n;
        return cur;
    }
};

// I_n = integral of cos^n over [lo, hi]:
//   I_n = (cos^{n-1}(hi)sin(hi) - cos^{n-1}(lo)sin(lo)) / n + (n-1)/n * I_{n-2}.
struct CosPowerSeq {
    double s_lo, c_lo, s_hi, c_hi, width;
    double pow_lo = 1.0, pow_hi = 1.0; // cos^{n-1} at the bounds
    double prev2 = 0.0, prev1 = 0.0;
    int n = 0;

    CosPowerSeq(double lo, double hi)
        : s_lo(std::sin(lo)), c_lo(std::cos(lo)), s_hi(std::sin(hi)), c_hi(std::cos(hi)),
          width(hi - lo) {}

    double next() {
        double cur;
        if (n == 0) {
            cur = width;
        } else if (n == 1) {
            cur = s_hi - s_lo;
        } else {
            pow_lo *= c_lo;
            pow_hi *= c_hi;
            cur = (pow_hi * s_hi - pow_lo * s_lo) / n + (n - 1.0) / n * prev2;
        }
        prev2 = prev1;
        prev1 = cur;
        ++n;
        return cur;
    }
};

} // namespace

double sin_power_integral(int n, double lo, double hi) {
    if (n < 0) throw std::invalid_argument("sin_power_integral: n must be >= 0");
    SinPowerSeq seq(lo, hi);
    double v = 0.0;
    for (int m = 0; m <= n; ++m) v = seq.next();
    return v;
}

double cos_power_integral(int n, double lo, double hi) {
    if (n < 0) throw std::invalid_argument("cos_power_integral: n must be >= 0");
    CosPowerSeq seq(lo, hi);
    double v = 0.0;
    for (int m = 0; m <= n; ++m) v = seq.next();
    return v;
}

cxd integrated_atom_element(const ArrayConfig& cfg, const Band& band, int sensor_index,
                            const AtomSeriesOptions& opts, int* terms_used) {
    cfg.validate();
    band.validate();
    if (sensor_index < 0 || sensor_index >= cfg.n_sensors)
        throw std::invalid_argument("integrated_atom_element: sensor index out of range");
    if (!(opts.rel_tol > 0.0) || opts.max_terms < 1)
        throw std::invalid_argument("integrated_atom_element: bad series options");

    const double kr = cfg.wave_number() * cfg.radius;
    const double gamma = cfg.sensor_angle(sensor_index);
    CosPowerSeq az_seq(deg2rad(band.azimuth_lo_deg) - gamma,
                       deg2rad(band.azimuth_hi_deg) - gamma);
    SinPowerSeq el_seq(deg2rad(band.elevation_lo_deg), deg2rad(band.elevation_hi_deg));
    const double wa = deg2rad(band.azimuth_width());
    const double we = deg2rad(band.elevation_width());

    cxd sum = 0.0;
    cxd coeff = 1.0;        // (j*kr)^n / n!
    double coeff_mag = 1.0; // kr^n / n!
    int used = 0;
    for (int n = 0; n < opts.max_terms; ++n) {
        sum += coeff * (az_seq.next() * el_seq.next());
        used = n + 1;
        coeff *= cxd(0.0, kr) / (n + 1.0);
        coeff_mag *= kr / (n + 1.0);
        // |cos-integral| <= azimuth width, |sin-integral| <= elevation width, so
        // coeff_mag*wa*we bounds every remaining term; past n+1 > kr the bounds
        // shrink geometrically and the first one caps the tail up to a modest factor.
        const double bound = coeff_mag * wa * we;
        if (n + 1.0 > kr && bound <= opts.rel_tol * std::abs(sum)) {
            if (terms_used) *terms_used = used;
            return sum;
        }
    }

    std::ostringstream msg;
    msg << "integrated_atom_element: series not converged after " << opts.max_terms
        << " terms (k0*r = " << kr << ", band az [" << band.azimuth_lo_deg << ", "
        << band.azimuth_hi_deg << "] deg, el [" << band.elevation_lo_deg << ", "
        << band.elevation_hi_deg << "] deg, |partial sum| = " << std::abs(sum)
        << ", term bound = " << coeff_mag * wa * we << ")";
    throw ConvergenceError(msg.str());
}

IntegratedDictionary build_dictionary(const ArrayConfig& cfg, const BandGrid& grid,
                                      bool normalize_columns, const AtomSeriesOptions& opts) {
    cfg.validate();
    if (grid.bands.empty()) throw std::invalid_argument("build_dictionary: empty grid");
    const int n = cfg.n_sensors;
    const int q = static_cast<int>(grid.bands.size());

    IntegratedDictionary dict;
    dict.atoms.resize(n, q);
    dict.bands = grid.bands;
    dict.column_scales.resize(q);
    dict.terms_used.assign(q, 0);
    dict.normalized = normalize_columns;

    for (int col = 0; col < q; ++col) {
        int col_terms = 0;
        for (int i = 0; i < n; ++i) {
            int t = 0;
            dict.atoms(i, col) = integrated_atom_element(cfg, grid.bands[col], i, opts, &t);
            col_terms = std::max(col_terms, t);
        }
        dict.terms_used[col] = col_terms;
        const double scale = dict.atoms.col(col).norm();
        dict.column_scales(col) = scale;
        if (normalize_columns && scale > 0.0) dict.atoms.col(col) /= scale;
    }
    return dict;
}

std::string dictionary_dump_json(const IntegratedDictionary& dict) {
    nlohmann::json j;
    j["n_sensors"] = dict.atoms.rows();
    j["n_bands"] = dict.atoms.cols();
    j["normalized"] = dict.normalized;
    j["columns"] = nlohmann::json::array();
    for (int col = 0; col < dict.atoms.cols(); ++col) {
        const Band& b = dict.bands[col];
        nlohmann::json jc;
        jc["band"] = {{"azimuth_lo_deg", b.azimuth_lo_deg},
                      {"azimuth_hi_deg", b.azimuth_hi_deg},
                      {"elevation_lo_deg", b.elevation_lo_deg},
                      {"elevation_hi_deg", b.elevation_hi_deg}};
        jc["terms_used"] = dict.terms_used[col];
        jc["scale"] = dict.column_scales(col);
        nlohmann::json atom = nlohmann::json::array();
        for (int i = 0; i < dict.atoms.rows(); ++i)
            atom.push_back({dict.atoms(i, col).real(), dict.atoms(i, col).imag()});
        jc["atom"] = atom;
        j["columns"].push_back(jc);
    }
    return j.dump(2);
}

} // namespace ucadoa
