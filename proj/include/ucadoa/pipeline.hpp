#pragma once

#include "ucadoa/array.hpp"
#include "ucadoa/dictionary.hpp"
#include "ucadoa/lasso.hpp"
#include "ucadoa/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ucadoa {

struct PipelineConfig {
    // Stage 0 is a full-domain (azimuth x elevation) tiling; each later entry
    // is the per-band split applied to the active set of the previous stage.
    std::vector<std::pair<int, int>> stage_schedule = {{120, 30}, {10, 10}, {3, 3}};
    double alpha = 0.3;          // regularization fraction of each stage's zero boundary
    double rel_threshold = 0.05; // active-band cut relative to the peak magnitude
    double lasso_tol = 1e-6;     // KKT tolerance, relative to the stage's gamma_max
    int lasso_max_sweeps = 10000;
    int k_max = 6; // model-order search cap (further clamped by N and T)
    SolverMode solver_mode = SolverMode::group;
    // Stage 0 starts from an identity coupling guess; once the first estimate
    // lands, re-solving the same full grid re-aims the zoom before any bands
    // are discarded. Strong true coupling needs this second look.
    int stage0_passes = 2;
    // Carry each active band's touching neighbors into the next stage so a
    // source sitting on the edge of a winner band cannot fall out of the zoom.
    bool dilate_active = true;
    // Polish coupling-candidate directions on the coupling-independent
    // subspace cost before the eigensolve, and report the polished directions
    // snapped to final-stage band centers.
    bool refine_directions = true;

    void validate() const;
};

struct StageTrace {
    int stage = 0;
    int pass = 0; // solve/re-estimate pass within the stage (stage 0 may repeat)
    int n_bands = 0;
    double band_azimuth_width = 0.0;
    double band_elevation_width = 0.0;
    double gamma = 0.0;
    double gamma_zero_boundary = 0.0; // 2 * gamma_max of the stage system
    int lasso_sweeps = 0;
    bool lasso_converged = false;
    std::vector<int> active;  // indices into this stage's grid
    std::vector<Band> active_band_geometry;
    int clusters = 0; // connected groups of touching active bands
    std::vector<Direction> refined_directions;
    bool coupling_updated = false;
    double coupling_gap = 0.0;
};

struct EstimationResult {
    std::vector<Direction> doas; // strongest first
    CouplingVector coupling;
    int k = 0;              // model order used
    bool shortfall = false; // final active set had fewer bands than k
    // Some stage hit its sweep cap before certifying optimality. The active
    // set is usually long settled by then (near-duplicate fine-stage atoms
    // make the certificate slow, not the support), so estimates stay usable;
    // the flag is the honest record. Per-stage detail sits in stages[].
    bool lasso_warning = false;
    std::vector<StageTrace> stages;

    std::string to_json() const;
};

// Joint direction and coupling estimation: model order, SVD reduction, then
// per stage a coupling-compensated integrated dictionary, a group LASSO, and
// a coupling re-estimate seeded by the strongest active-band centers (skipped
// when the cost spectrum is degenerate). DOAs are centers of final-stage
// bands, one per strongest active cluster, placed by the refined directions
// when refinement is enabled. Throws NoSourcesError when a stage activates
// nothing. stage0 may pass a prebuilt dictionary for the first schedule entry.
EstimationResult run(const SnapshotMatrix& x, const ArrayConfig& cfg, const PipelineConfig& pcfg,
                     const IntegratedDictionary* stage0 = nullptr);

// Permutation p minimizing total squared angular distance, azimuth circular:
// p[j] = index of the estimate assigned to truth j. Sizes must match.
std::vector<int> match_estimates(const std::vector<Direction>& estimates,
                                 const std::vector<Direction>& truth);

} // namespace ucadoa
