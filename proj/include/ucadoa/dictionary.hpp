#pragma once

#include "ucadoa/array.hpp"
#include "ucadoa/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ucadoa {

// Axis-aligned direction band. Bands tile [0,360) x [0,90] in degrees;
// azimuth bounds may exceed 360 only as the upper edge of a wrapping tile
// created by refinement (lo < hi always holds).
struct Band {
    double azimuth_lo_deg = 0.0;
    double azimuth_hi_deg = 0.0;
    double elevation_lo_deg = 0.0;
    double elevation_hi_deg = 0.0;

    double azimuth_width() const { return azimuth_hi_deg - azimuth_lo_deg; }
    double elevation_width() const { return elevation_hi_deg - elevation_lo_deg; }
    bool contains(double azimuth_deg, double elevation_deg) const;
    void validate() const;
};

// Center of a band, (azimuth, elevation); a zero-width band yields the point itself.
Direction band_center(const Band& band);

struct BandGrid {
    std::vector<Band> bands;
    int stage = 0;
};

// Stage-0 grid: azimuth_bands x elevation_bands uniform tiling of the full
// direction domain, azimuth-major ordering.
BandGrid make_stage0_grid(int azimuth_bands, int elevation_bands);

// Split each band listed in `active` into azimuth_split x elevation_split
// children tiling it exactly; non-active bands are dropped.
BandGrid refine(const BandGrid& grid, const std::vector<int>& active,
                int azimuth_split, int elevation_split);

// Definite integrals of sin^n and cos^n over [lo, hi] (radians), by the
// stable forward recursion in n.
double sin_power_integral(int n, double lo, double hi);
double cos_power_integral(int n, double lo, double hi);

struct AtomSeriesOptions {
    double rel_tol = 1e-12; // tail bound relative to the partial sum
    int max_terms = 80;     // series length cap; exceeding it throws ConvergenceError
};

// One entry of the band-integrated steering atom:
//   integral over the band of exp(j*k0*r*sin(el)*cos(az - gamma_n)) d(az) d(el),
// evaluated as a power series whose term n couples cos^n and sin^n integrals.
// If terms_used is non-null it receives the number of series terms taken.
cxd integrated_atom_element(const ArrayConfig& cfg, const Band& band, int sensor_index,
                            const AtomSeriesOptions& opts = {}, int* terms_used = nullptr);

struct IntegratedDictionary {
    MatC atoms;                  // N x Q; unit-norm columns when normalized
    std::vector<Band> bands;     // Q band descriptors, column order
    VecR column_scales;          // pre-normalization l2 norms
    std::vector<int> terms_used; // per column, max series length over sensors
    bool normalized = true;
};

IntegratedDictionary build_dictionary(const ArrayConfig& cfg, const BandGrid& grid,
                                      bool normalize_columns = true,
                                      const AtomSeriesOptions& opts = {});

// Diagnostic dump: band bounds, series lengths, and raw atom values per column.
std::string dictionary_dump_json(const IntegratedDictionary& dict);

} // namespace ucadoa
