#include "ucadoa/bench.hpp"
#include "ucadoa/lasso.hpp"
#include "ucadoa/subspace.hpp"

#include <algorithm>
#include <cmath>

namespace ucadoa {

namespace {

// Uniform pointwise grid: azimuth wraps (no duplicate at 360), elevation
// includes both poles of its range.
struct AngleGrid {
    std::vector<double> az, el;

    int points() const { return static_cast<int>(az.size() * el.size()); }
    int n_el() const { return static_cast<int>(el.size()); }
    Direction direction(int q) const {
        return {az[q / el.size()], el[q % el.size()]};
    }
};

AngleGrid make_angle_grid(double grid_deg) {
    if (!(grid_deg > 0.0 && grid_deg <= 90.0))
        throw std::invalid_argument("baseline grid resolution must be in (0, 90] degrees");
    AngleGrid g;
    const int n_az = std::max(1, static_cast<int>(std::lround(360.0 / grid_deg)));
    const int n_el = std::max(2, static_cast<int>(std::lround(90.0 / grid_deg)) + 1);
    g.az.resize(n_az);
    for (int i = 0; i < n_az; ++i) g.az[i] = 360.0 * i / n_az;
    g.el.resize(n_el);
    for (int j = 0; j < n_el; ++j) g.el[j] = 90.0 * j / (n_el - 1);
    return g;
}

// Strict local maxima over the grid graph (azimuth circular, elevation
// clamped), strongest first; filled up to k from the remaining points so the
// result always has k entries. Ties break toward the lower linear index.
std::vector<Direction> top_k_peaks(const VecR& v, const AngleGrid& g, int k) {
    const int n_az = static_cast<int>(g.az.size());
    const int n_el = g.n_el();
    const auto at = [&](int i, int j) { return v(i * n_el + j); };

    std::vector<int> order(v.size());
    for (int q = 0; q < v.size(); ++q) order[q] = q;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return v(a) > v(b); });

    std::vector<int> picked;
    for (int q : order) {
        if (static_cast<int>(picked.size()) >= k) break;
        const int i = q / n_el, j = q % n_el;
        bool is_max = true;
        const int az_nb[2] = {(i + 1) % n_az, (i + n_az - 1) % n_az};
        for (int nb : az_nb)
            if (n_az > 1 && at(nb, j) >= at(i, j)) { is_max = false; break; }
        if (is_max && j + 1 < n_el && at(i, j + 1) >= at(i, j)) is_max = false;
        if (is_max && j - 1 >= 0 && at(i, j - 1) >= at(i, j)) is_max = false;
        if (is_max) picked.push_back(q);
    }
    for (int q : order) {
        if (static_cast<int>(picked.size()) >= k) break;
        if (std::find(picked.begin(), picked.end(), q) == picked.end()) picked.push_back(q);
    }

    std::vector<Direction> out;
    out.reserve(picked.size());
    for (int q : picked) out.push_back(g.direction(q));
    return out;
}

MatC grid_steering(const ArrayConfig& cfg, const AngleGrid& g) {
    MatC d(cfg.n_sensors, g.points());
    for (int q = 0; q < g.points(); ++q) {
        const Direction dir = g.direction(q);
        d.col(q) = steering_vector(cfg, dir.azimuth_deg, dir.elevation_deg);
    }
    return d;
}

} // namespace

int baseline_grid_points(double grid_deg) { return make_angle_grid(grid_deg).points(); }

std::vector<Direction> baseline_grid_music(const SnapshotMatrix& x, const ArrayConfig& cfg, int k,
                                           double grid_deg) {
    cfg.validate();
    if (k < 0) throw std::invalid_argument("baseline_grid_music: k must be >= 0");
    if (k == 0) return {};
    const AngleGrid g = make_angle_grid(grid_deg);
    const SubspaceData sub = reduce(x, k);
    const MatC proj = sub.noise_basis.adjoint() * grid_steering(cfg, g); // (N-k) x Q
    VecR p(g.points());
    for (int q = 0; q < g.points(); ++q) p(q) = 1.0 / proj.col(q).squaredNorm();
    return top_k_peaks(p, g, k);
}

std::vector<Direction> baseline_narrowband_lasso(const SnapshotMatrix& x, const ArrayConfig& cfg,
                                                 int k, double grid_deg,
                                                 const NarrowbandOptions& opts) {
    cfg.validate();
    if (k < 0) throw std::invalid_argument("baseline_narrowband_lasso: k must be >= 0");
    if (k == 0) return {};
    const AngleGrid g = make_angle_grid(grid_deg);
    const SubspaceData sub = reduce(x, k);

    MatC d = grid_steering(cfg, g);
    d /= std::sqrt(static_cast<double>(cfg.n_sensors)); // unit atom norm

    const StackedSystem sys = make_stacked_system(d, sub.reduced, SolverMode::group);
    const double gmax = gamma_max(sys);
    if (gmax <= 0.0) return top_k_peaks(VecR::Zero(g.points()), g, k);
    const SparseSolution sol = solve_lasso(sys, opts.alpha * 2.0 * gmax, opts.lasso_tol * gmax,
                                           opts.lasso_max_sweeps);
    return top_k_peaks(sol.band_magnitudes(), g, k);
}

} // namespace ucadoa
