#pragma once

#include "ucadoa/types.hpp"

#include <vector>

namespace ucadoa {

// `shared`: one coefficient vector for the stacked multi-snapshot system
// (identical dictionary blocks down the diagonal, observations concatenated).
// `group`: one coefficient row per band across snapshots, l2 row penalty.
enum class SolverMode { shared, group };

struct StackedSystem {
    MatC dictionary; // (N*B) x Q in shared mode; stores the same stacking in group mode
    VecC observation; // N*B
    int block_rows = 0; // N
    int blocks = 0;     // B (reduced snapshot count)
    SolverMode mode = SolverMode::group;
};

StackedSystem make_stacked_system(const MatC& atoms, const MatC& reduced, SolverMode mode);

struct SparseSolution {
    MatC coefficients; // Q x B in group mode, Q x 1 in shared mode
    double gamma = 0.0;
    SolverMode mode = SolverMode::group;
    int sweeps = 0;
    bool converged = false;
    double kkt_residual = 0.0;
    std::vector<double> objective_trace; // objective after each full sweep

    // Per-band activation magnitude: |coefficient| in shared mode, row l2 norm
    // in group mode.
    VecR band_magnitudes() const;
};

// Smallest regularization whose scan statistic max_i |d_i^H x| it reports;
// the all-zero solution is optimal exactly when gamma >= 2 * gamma_max.
double gamma_max(const MatC& dictionary, const VecC& observation);

// Mode-aware variant: in group mode the statistic is the largest per-band
// block norm max_q ||a_q^H X||_2 over the unstacked system.
double gamma_max(const StackedSystem& sys);

// Minimize ||x - D s||_2^2 + gamma * sum_q penalty(s_q) by cyclic (block)
// coordinate descent with an active-set refinement loop. Stops when the KKT
// residual (see kkt_violation) drops to tol, or after max_sweeps full sweeps.
SparseSolution solve_lasso(const StackedSystem& sys, double gamma, double tol = 1e-8,
                           int max_sweeps = 10000);

double lasso_objective(const StackedSystem& sys, const MatC& coefficients, double gamma);

// Max over coordinates of the stationarity-condition violation:
// zero rows need ||d_q^H r|| <= gamma/2, active rows need
// ||2 d_q^H r - gamma s_q/||s_q|| || = 0.
double kkt_violation(const StackedSystem& sys, const MatC& coefficients, double gamma);

// Indices with band magnitude >= rel_threshold * max magnitude, ascending.
// Empty when the solution is identically zero.
std::vector<int> active_bands(const SparseSolution& sol, double rel_threshold = 0.05);

} // namespace ucadoa
