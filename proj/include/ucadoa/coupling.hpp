#pragma once

#include "ucadoa/array.hpp"
#include "ucadoa/types.hpp"

#include <vector>

namespace ucadoa {

// N x L map satisfying F{a} c = C(c) a for every coupling vector c: column l
// collects the steering entries that multiply c_{l+1} in the circulant product.
struct FTransform {
    MatC matrix;
};

FTransform f_transform(const VecC& steering);

// Hermitian PSD L x L matrix U with c^H U c = sum_k ||E_n^H C(c) a_k||^2.
struct CouplingCost {
    MatC matrix;
    int n_sensors = 0;
};

CouplingCost coupling_cost(const std::vector<Direction>& directions, const MatC& noise_basis,
                           const ArrayConfig& cfg);

struct CouplingEstimate {
    CouplingVector coupling;
    VecR eigenvalues;          // of the cost matrix, ascending
    double spectral_gap = 0.0; // lambda_1 - lambda_0
    bool degenerate = false;   // gap below noise floor; estimate unreliable
};

// Minimizer of c^H U c over ||c|| = 1, rescaled so the first entry is exactly
// 1. Throws std::domain_error when that entry vanishes. The degenerate flag
// fires when the two smallest eigenvalues are indistinguishable, i.e. the
// minimizer direction is not unique.
CouplingEstimate estimate_coupling(const CouplingCost& cost);

// Best single-direction subspace fit over all couplings: the smallest
// singular value of E_n^H Q, Q an orthonormal basis of range(F{a}). Zero
// wherever SOME coupling vector sends the coupled steering vector into the
// signal subspace. One source gives the coupling enough modal freedom that
// this nearly holds along its whole azimuth line: at low and middle
// elevations the line valley sits orders of magnitude below off-azimuth
// levels, weakening toward the zenith where fewer phase modes survive. The
// surface therefore locates azimuths but cannot be trusted for elevation;
// elevations are only identifiable jointly, through one coupling shared by
// several directions (see estimate_coupling_refined).
double null_projection_cost(const ArrayConfig& cfg, const MatC& noise_basis, double azimuth_deg,
                            double elevation_deg);

struct DirectionRefineOptions {
    double coarse_el_step_deg = 2.0;    // elevation grid of the joint coarse search
    double azimuth_halfwidth_deg = 3.0; // polish bracket half-widths
    double elevation_halfwidth_deg = 3.0;
    double dedup_az_deg = 0.5; // seeds whose polished azimuths agree this closely merge
    int max_rounds = 8;        // cyclic coordinate-polish rounds
    double tol_deg = 1e-9;
    // Coupling taps assumed while searching directions. Full freedom admits a
    // half-turn ghost: weights alternating in sign across phase modes turn a
    // steering vector into its azimuth-flipped twin up to aliasing, so every
    // constellation has a near-equivalent mirror. A short symmetric tap
    // series cannot alternate that fast, which removes the mirror while
    // still representing physically decaying coupling. Only the search is
    // restricted; the returned estimate uses the full width.
    int coupling_taps = 4;
};

struct RefinedCoupling {
    CouplingEstimate estimate;
    // Refined survivors in seed order. Possibly fewer than the seeds: seeds
    // that polish onto the same azimuth merge, and directions the fitted
    // coupling cannot reconcile with the signal subspace are discarded (the
    // survivors are then refit without them, since a discarded phantom had a
    // vote in the joint fit). A caller wanting k directions should re-seed
    // with extra candidates.
    std::vector<Direction> directions;
};

// Joint direction polish and coupling estimate. Each seed's azimuth is first
// polished on the coupling-free spectrum above and near-duplicates merge.
// The joint objective is then the best single coupling explaining every
// survivor at once (smallest generalized eigenvalue of the summed costs); it
// vanishes exactly at the true angles with noise-free data. Coarse stage:
// one survivor pair gets a 2-D elevation grid search, chosen as the deepest
// pair among the leading survivors, and the rest follow greedily with 1-D
// scans. Polish stage: cyclic golden-section over every azimuth and
// elevation coordinate with shrinking brackets. A single survivor is
// returned with its seed elevation: one source leaves the shared coupling
// enough freedom to explain any elevation, so there is nothing to polish
// against.
RefinedCoupling estimate_coupling_refined(const std::vector<Direction>& seeds,
                                          const MatC& noise_basis, const ArrayConfig& cfg,
                                          const DirectionRefineOptions& opt = {});

} // namespace ucadoa
