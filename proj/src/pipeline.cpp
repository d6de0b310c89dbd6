#include "ucadoa/pipeline.hpp"

#include "ucadoa/coupling.hpp"
#include "ucadoa/subspace.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ucadoa {

void PipelineConfig::validate() const {
    if (stage_schedule.empty()) throw std::invalid_argument("PipelineConfig: empty stage schedule");
    for (const auto& [a, e] : stage_schedule)
        if (a < 1 || e < 1)
            throw std::invalid_argument("PipelineConfig: stage split counts must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("PipelineConfig: alpha must be > 0");
    if (!(rel_threshold > 0.0 && rel_threshold <= 1.0))
        throw std::invalid_argument("PipelineConfig: rel_threshold must be in (0, 1]");
    if (!(lasso_tol > 0.0)) throw std::invalid_argument("PipelineConfig: lasso_tol must be > 0");
    if (lasso_max_sweeps < 1) throw std::invalid_argument("PipelineConfig: lasso_max_sweeps must be >= 1");
    if (k_max < 1) throw std::invalid_argument("PipelineConfig: k_max must be >= 1");
    if (stage0_passes < 1) throw std::invalid_argument("PipelineConfig: stage0_passes must be >= 1");
}

namespace {

constexpr double kTouchEps = 1e-7; // degrees; same-stage edges are built bit-identical

bool intervals_touch(double lo1, double hi1, double lo2, double hi2) {
    return hi1 >= lo2 - kTouchEps && hi2 >= lo1 - kTouchEps;
}

// Overlap or shared edge, azimuth circular (360 meets 0), elevation linear.
bool bands_touch(const Band& a, const Band& b) {
    if (!intervals_touch(a.elevation_lo_deg, a.elevation_hi_deg, b.elevation_lo_deg,
                         b.elevation_hi_deg))
        return false;
    if (intervals_touch(a.azimuth_lo_deg, a.azimuth_hi_deg, b.azimuth_lo_deg, b.azimuth_hi_deg))
        return true;
    const bool a_wraps = a.azimuth_hi_deg >= 360.0 - kTouchEps && b.azimuth_lo_deg <= kTouchEps;
    const bool b_wraps = b.azimuth_hi_deg >= 360.0 - kTouchEps && a.azimuth_lo_deg <= kTouchEps;
    return a_wraps || b_wraps;
}

struct BandCluster {
    std::vector<int> members; // indices into the stage grid
    int representative = -1;  // strongest member
    double strength = 0.0;    // its magnitude
};

// Connected components of the active set under band adjacency, strongest first.
std::vector<BandCluster> cluster_active(const std::vector<Band>& bands,
                                        const std::vector<int>& active, const VecR& mags) {
    const int m = static_cast<int>(active.size());
    std::vector<int> parent(m);
    for (int i = 0; i < m; ++i) parent[i] = i;
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (bands_touch(bands[active[i]], bands[active[j]])) {
                const int ri = find(i), rj = find(j);
                if (ri != rj) parent[ri] = rj;
            }
    std::vector<BandCluster> clusters;
    std::vector<int> root_slot(m, -1);
    for (int i = 0; i < m; ++i) {
        const int r = find(i);
        if (root_slot[r] < 0) {
            root_slot[r] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        BandCluster& c = clusters[root_slot[r]];
        c.members.push_back(active[i]);
        if (c.representative < 0 || mags(active[i]) > c.strength) {
            c.representative = active[i];
            c.strength = mags(active[i]);
        }
    }
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const BandCluster& a, const BandCluster& b) {
                         return a.strength > b.strength;
                     });
    return clusters;
}

// Active set grown by its touching neighbors on the current grid, ascending.
std::vector<int> dilate_bands(const std::vector<Band>& bands, const std::vector<int>& active) {
    std::vector<char> keep(bands.size(), 0);
    for (int idx : active) keep[idx] = 1;
    for (int idx : active)
        for (int q = 0; q < static_cast<int>(bands.size()); ++q)
            if (!keep[q] && bands_touch(bands[idx], bands[q])) keep[q] = 1;
    std::vector<int> out;
    for (int q = 0; q < static_cast<int>(bands.size()); ++q)
        if (keep[q]) out.push_back(q);
    return out;
}

// Index of the grid band holding dir; nearest center when dir is outside the
// grid (possible on zoomed stages, which cover only part of the rectangle).
int band_index_of(const Direction& dir, const std::vector<Band>& bands) {
    double az = std::fmod(dir.azimuth_deg, 360.0);
    if (az < 0.0) az += 360.0;
    for (std::size_t i = 0; i < bands.size(); ++i)
        if (bands[i].contains(az, dir.elevation_deg)) return static_cast<int>(i);
    double best = std::numeric_limits<double>::infinity();
    int out = 0;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const Direction c = band_center(bands[i]);
        const double da = azimuth_distance_deg(c.azimuth_deg, az);
        const double de = c.elevation_deg - dir.elevation_deg;
        const double d2 = da * da + de * de;
        if (d2 < best) {
            best = d2;
            out = static_cast<int>(i);
        }
    }
    return out;
}

Direction snap_to_grid(const Direction& dir, const std::vector<Band>& bands) {
    return band_center(bands[band_index_of(dir, bands)]);
}

} // namespace

EstimationResult run(const SnapshotMatrix& x, const ArrayConfig& cfg, const PipelineConfig& pcfg,
                     const IntegratedDictionary* stage0) {
    cfg.validate();
    pcfg.validate();
    const int n = cfg.n_sensors;
    const int t = x.snapshot_count();
    if (x.data.rows() != n) throw std::invalid_argument("run: snapshot rows must match the array");
    const int k_cap = std::min(pcfg.k_max, std::min(n, t) - 1);
    if (k_cap < 1) throw std::invalid_argument("run: not enough snapshots for order selection");

    const int k = select_model_order(x, k_cap);
    const SubspaceData sub = reduce(x, k);

    EstimationResult res;
    res.k = k;
    CouplingVector c_hat = CouplingVector::identity(n);

    BandGrid grid;
    IntegratedDictionary dict;
    std::vector<int> active;
    std::vector<BandCluster> clusters;
    std::vector<Direction> polished;  // refined survivors from the last pass
    std::size_t clusters_used = 0;    // how many cluster seeds the last pass consumed

    for (std::size_t s = 0; s < pcfg.stage_schedule.size(); ++s) {
        const auto [a_split, e_split] = pcfg.stage_schedule[s];
        if (s == 0) {
            grid = make_stage0_grid(a_split, e_split);
            const bool reusable = stage0 && stage0->normalized &&
                                  stage0->atoms.rows() == n &&
                                  stage0->bands.size() == grid.bands.size();
            dict = reusable ? *stage0 : build_dictionary(cfg, grid);
        } else {
            std::vector<int> zoom = active;
            // The polished directions outrank the grid: a zoom that drops the
            // band one of them sits in could never report it later.
            for (const Direction& d : polished) zoom.push_back(band_index_of(d, grid.bands));
            std::sort(zoom.begin(), zoom.end());
            zoom.erase(std::unique(zoom.begin(), zoom.end()), zoom.end());
            if (pcfg.dilate_active) zoom = dilate_bands(grid.bands, zoom);
            grid = refine(grid, zoom, a_split, e_split);
            dict = build_dictionary(cfg, grid);
        }

        const int passes = s == 0 ? pcfg.stage0_passes : 1;
        for (int pass = 0; pass < passes; ++pass) {
            MatC coupled = coupling_matrix(c_hat).matrix * dict.atoms;
            for (int q = 0; q < coupled.cols(); ++q) {
                const double nrm = coupled.col(q).norm();
                if (nrm > 0.0) coupled.col(q) /= nrm;
            }

            const StackedSystem sys = make_stacked_system(coupled, sub.reduced, pcfg.solver_mode);
            const double gmax = gamma_max(sys);

            StageTrace tr;
            tr.stage = static_cast<int>(s);
            tr.pass = pass;
            tr.n_bands = static_cast<int>(grid.bands.size());
            tr.band_azimuth_width = grid.bands.front().azimuth_width();
            tr.band_elevation_width = grid.bands.front().elevation_width();
            tr.gamma_zero_boundary = 2.0 * gmax;

            if (gmax <= 0.0)
                throw NoSourcesError("run: observation projects to zero on every band");
            // gamma = alpha * (zero boundary), so alpha = 1 provably yields the empty model.
            tr.gamma = pcfg.alpha * 2.0 * gmax;
            const SparseSolution sol =
                solve_lasso(sys, tr.gamma, pcfg.lasso_tol * gmax, pcfg.lasso_max_sweeps);
            tr.lasso_sweeps = sol.sweeps;
            tr.lasso_converged = sol.converged;
            if (!sol.converged) res.lasso_warning = true;

            active = active_bands(sol, pcfg.rel_threshold);
            if (active.empty())
                throw NoSourcesError("run: stage " + std::to_string(s) + " activated no bands");
            tr.active = active;
            for (int idx : active) tr.active_band_geometry.push_back(grid.bands[idx]);

            const VecR mags = sol.band_magnitudes();
            clusters = cluster_active(grid.bands, active, mags);
            tr.clusters = static_cast<int>(clusters.size());

            clusters_used = 0;
            std::vector<Direction> seeds;
            const auto top_up = [&] {
                while (static_cast<int>(seeds.size()) < k && clusters_used < clusters.size())
                    seeds.push_back(
                        band_center(grid.bands[clusters[clusters_used++].representative]));
            };
            try {
                if (pcfg.refine_directions) {
                    // Merged duplicates and screened-out phantoms shrink the
                    // refined set, so keep feeding it the next clusters until
                    // it holds k directions or candidates run out.
                    top_up();
                    RefinedCoupling rc = estimate_coupling_refined(seeds, sub.noise_basis, cfg);
                    while (static_cast<int>(rc.directions.size()) < k &&
                           clusters_used < clusters.size()) {
                        seeds = rc.directions;
                        top_up();
                        rc = estimate_coupling_refined(seeds, sub.noise_basis, cfg);
                    }
                    polished = rc.directions;
                    tr.refined_directions = rc.directions;
                    tr.coupling_gap = rc.estimate.spectral_gap;
                    // One direction cannot pin the coupling: every elevation
                    // on its azimuth line is explained by some coupling, so a
                    // single-source fit would only launder the seed's
                    // elevation error into taps and drag later stages off the
                    // true elevation. Keep the identity model instead.
                    if (!rc.estimate.degenerate && k >= 2) {
                        c_hat = rc.estimate.coupling;
                        tr.coupling_updated = true;
                    }
                } else {
                    top_up();
                    const CouplingEstimate est =
                        estimate_coupling(coupling_cost(seeds, sub.noise_basis, cfg));
                    polished = seeds;
                    tr.coupling_gap = est.spectral_gap;
                    if (!est.degenerate && k >= 2) {
                        c_hat = est.coupling;
                        tr.coupling_updated = true;
                    }
                }
            } catch (const std::domain_error&) {
                // un-normalizable minimizer: keep the previous coupling, like a gap failure
            }
            res.stages.push_back(std::move(tr));
        }
    }

    // Refined directions carry the sub-band accuracy of the subspace fit;
    // reporting their band's center keeps every estimate on the final grid.
    // When fewer than k directions survived, the next strongest clusters
    // stand in with their centers.
    res.doas.clear();
    if (pcfg.refine_directions) {
        for (const Direction& d : polished)
            if (static_cast<int>(res.doas.size()) < k)
                res.doas.push_back(snap_to_grid(d, grid.bands));
        while (static_cast<int>(res.doas.size()) < k && clusters_used < clusters.size())
            res.doas.push_back(band_center(grid.bands[clusters[clusters_used++].representative]));
    } else {
        for (std::size_t c = 0; c < clusters.size() && static_cast<int>(c) < k; ++c)
            res.doas.push_back(band_center(grid.bands[clusters[c].representative]));
    }
    res.shortfall = static_cast<int>(res.doas.size()) < k;
    res.coupling = c_hat;
    return res;
}

namespace {

// O(n^3) assignment on a square cost matrix; returns, per column, the row
// assigned to it.
std::vector<int> min_cost_assignment(const MatR& cost) {
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return {};
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> match(n);
    for (int j = 1; j <= n; ++j) match[j - 1] = p[j] - 1;
    return match;
}

} // namespace

std::vector<int> match_estimates(const std::vector<Direction>& estimates,
                                 const std::vector<Direction>& truth) {
    if (estimates.size() != truth.size())
        throw std::invalid_argument("match_estimates: size mismatch");
    const int n = static_cast<int>(truth.size());
    MatR cost(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double de = estimates[i].elevation_deg - truth[j].elevation_deg;
            const double da = azimuth_distance_deg(estimates[i].azimuth_deg, truth[j].azimuth_deg);
            cost(i, j) = de * de + da * da;
        }
    return min_cost_assignment(cost);
}

std::string EstimationResult::to_json() const {
    nlohmann::json j;
    j["k"] = k;
    j["shortfall"] = shortfall;
    j["lasso_warning"] = lasso_warning;
    j["doas"] = nlohmann::json::array();
    for (const Direction& d : doas)
        j["doas"].push_back({{"azimuth_deg", d.azimuth_deg}, {"elevation_deg", d.elevation_deg}});
    j["coupling"] = nlohmann::json::array();
    for (int i = 0; i < coupling.coeffs.size(); ++i)
        j["coupling"].push_back({coupling.coeffs(i).real(), coupling.coeffs(i).imag()});
    j["stages"] = nlohmann::json::array();
    for (const StageTrace& tr : stages) {
        nlohmann::json refined = nlohmann::json::array();
        for (const Direction& d : tr.refined_directions)
            refined.push_back({{"azimuth_deg", d.azimuth_deg}, {"elevation_deg", d.elevation_deg}});
        j["stages"].push_back({{"stage", tr.stage},
                               {"pass", tr.pass},
                               {"n_bands", tr.n_bands},
                               {"band_azimuth_width_deg", tr.band_azimuth_width},
                               {"band_elevation_width_deg", tr.band_elevation_width},
                               {"gamma", tr.gamma},
                               {"gamma_zero_boundary", tr.gamma_zero_boundary},
                               {"lasso_sweeps", tr.lasso_sweeps},
                               {"lasso_converged", tr.lasso_converged},
                               {"active_bands", tr.active.size()},
                               {"clusters", tr.clusters},
                               {"refined_directions", refined},
                               {"coupling_updated", tr.coupling_updated},
                               {"coupling_gap", tr.coupling_gap}});
    }
    return j.dump(2);
}

} // namespace ucadoa
