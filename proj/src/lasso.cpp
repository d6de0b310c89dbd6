#include "ucadoa/lasso.hpp"

#include <algorithm>
#include <cmath>

namespace ucadoa {

namespace {

// Both modes reduce to min ||Y - A S||_F^2 + gamma * sum_q ||S.row(q)||_2:
// shared mode keeps the stacked system as-is (B = 1 coefficient column),
// group mode unstacks the observation into one column per reduced snapshot.
struct WorkSystem {
    MatC a; // m x Q
    MatC y; // m x B
};

WorkSystem unstack(const StackedSystem& sys) {
    WorkSystem w;
    if (sys.mode == SolverMode::shared) {
        w.a = sys.dictionary;
        w.y = sys.observation;
    } else {
        w.a = sys.dictionary.topRows(sys.block_rows);
        w.y = Eigen::Map<const MatC>(sys.observation.data(), sys.block_rows, sys.blocks);
    }
    return w;
}

double penalty_sum(const MatC& s) {
    double p = 0.0;
    for (int q = 0; q < s.rows(); ++q) p += s.row(q).norm();
    return p;
}

double kkt_violation_impl(const WorkSystem& w, const MatC& s, double gamma) {
    const MatC r = w.y - w.a * s;
    const MatC g = w.a.adjoint() * r; // Q x B
    double viol = 0.0;
    for (int q = 0; q < s.rows(); ++q) {
        const double ns = s.row(q).norm();
        if (ns == 0.0) {
            viol = std::max(viol, g.row(q).norm() - 0.5 * gamma);
        } else {
            viol = std::max(viol, (2.0 * g.row(q) - (gamma / ns) * s.row(q)).norm());
        }
    }
    return std::max(viol, 0.0);
}

} // namespace

StackedSystem make_stacked_system(const MatC& atoms, const MatC& reduced, SolverMode mode) {
    if (atoms.rows() < 1 || atoms.cols() < 1)
        throw std::invalid_argument("make_stacked_system: empty dictionary");
    if (reduced.rows() != atoms.rows() || reduced.cols() < 1)
        throw std::invalid_argument("make_stacked_system: observation rows must match the dictionary");
    const int n = static_cast<int>(atoms.rows());
    const int b = static_cast<int>(reduced.cols());

    StackedSystem sys;
    sys.block_rows = n;
    sys.blocks = b;
    sys.mode = mode;
    sys.dictionary.resize(static_cast<Eigen::Index>(n) * b, atoms.cols());
    for (int i = 0; i < b; ++i) sys.dictionary.middleRows(static_cast<Eigen::Index>(i) * n, n) = atoms;
    sys.observation = Eigen::Map<const VecC>(reduced.data(), reduced.size());
    return sys;
}

double gamma_max(const MatC& dictionary, const VecC& observation) {
    if (dictionary.rows() != observation.size())
        throw std::invalid_argument("gamma_max: dimension mismatch");
    return (dictionary.adjoint() * observation).cwiseAbs().maxCoeff();
}

double gamma_max(const StackedSystem& sys) {
    if (sys.mode == SolverMode::shared) return gamma_max(sys.dictionary, sys.observation);
    const WorkSystem w = unstack(sys);
    const MatC g = w.a.adjoint() * w.y;
    double m = 0.0;
    for (int q = 0; q < g.rows(); ++q) m = std::max(m, g.row(q).norm());
    return m;
}

SparseSolution solve_lasso(const StackedSystem& sys, double gamma, double tol, int max_sweeps) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("solve_lasso: gamma must be >= 0");
    if (!(tol > 0.0) || max_sweeps < 1)
        throw std::invalid_argument("solve_lasso: bad tolerance or sweep cap");

    const WorkSystem w = unstack(sys);
    const int q_count = static_cast<int>(w.a.cols());
    const int b = static_cast<int>(w.y.cols());

    VecR col_sq(q_count);
    for (int q = 0; q < q_count; ++q) col_sq(q) = w.a.col(q).squaredNorm();

    SparseSolution sol;
    sol.gamma = gamma;
    sol.mode = sys.mode;
    sol.coefficients = MatC::Zero(q_count, b);
    MatC& s = sol.coefficients;
    MatC r = w.y; // residual Y - A S, updated incrementally

    Eigen::RowVectorXcd rho(b), delta(b);
    const auto sweep = [&](const std::vector<int>* subset) {
        double max_change = 0.0;
        const int count = subset ? static_cast<int>(subset->size()) : q_count;
        for (int i = 0; i < count; ++i) {
            const int q = subset ? (*subset)[i] : i;
            if (col_sq(q) == 0.0) continue;
            rho = w.a.col(q).adjoint() * r;
            rho += col_sq(q) * s.row(q);
            const double mag = rho.norm();
            const double shrunk = std::max(mag - 0.5 * gamma, 0.0);
            if (shrunk > 0.0) {
                delta = rho * (shrunk / (mag * col_sq(q)));
                delta -= s.row(q);
            } else {
                delta = -s.row(q);
            }
            const double change = delta.norm();
            if (change > 0.0) {
                r.noalias() -= w.a.col(q) * delta;
                s.row(q) += delta;
                max_change = std::max(max_change, change);
            }
        }
        ++sol.sweeps;
        sol.objective_trace.push_back(r.squaredNorm() + gamma * penalty_sum(s));
        return max_change;
    };

    while (sol.sweeps < max_sweeps) {
        sweep(nullptr);

        // Polish the current support cheaply before paying for a KKT pass.
        std::vector<int> support;
        for (int q = 0; q < q_count; ++q)
            if (s.row(q).squaredNorm() > 0.0) support.push_back(q);
        if (!support.empty()) {
            for (int inner = 0; inner < 50 && sol.sweeps < max_sweeps; ++inner) {
                if (sweep(&support) <= 0.01 * tol) break;
            }
        }

        r = w.y - w.a * s; // drop incremental-update drift before certifying
        sol.kkt_residual = kkt_violation_impl(w, s, gamma);
        if (sol.kkt_residual <= tol) {
            sol.converged = true;
            break;
        }
    }
    return sol;
}

double lasso_objective(const StackedSystem& sys, const MatC& coefficients, double gamma) {
    const WorkSystem w = unstack(sys);
    return (w.y - w.a * coefficients).squaredNorm() + gamma * penalty_sum(coefficients);
}

double kkt_violation(const StackedSystem& sys, const MatC& coefficients, double gamma) {
    return kkt_violation_impl(unstack(sys), coefficients, gamma);
}

VecR SparseSolution::band_magnitudes() const {
    VecR m(coefficients.rows());
    for (int q = 0; q < coefficients.rows(); ++q) m(q) = coefficients.row(q).norm();
    return m;
}

std::vector<int> active_bands(const SparseSolution& sol, double rel_threshold) {
    if (!(rel_threshold > 0.0 && rel_threshold <= 1.0))
        throw std::invalid_argument("active_bands: rel_threshold must be in (0, 1]");
    const VecR mags = sol.band_magnitudes();
    const double peak = mags.size() ? mags.maxCoeff() : 0.0;
    std::vector<int> idx;
    if (peak <= 0.0) return idx;
    for (int q = 0; q < mags.size(); ++q)
        if (mags(q) >= rel_threshold * peak) idx.push_back(q);
    return idx;
}

} // namespace ucadoa
