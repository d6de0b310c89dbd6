#include "ucadoa/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ucadoa {

FTransform f_transform(const VecC& steering) {
    const int n = static_cast<int>(steering.size());
    if (n < 3) throw std::invalid_argument("f_transform: steering vector too short");
    const int l = CouplingVector::dof(n);
    FTransform f;
    f.matrix = MatC::Zero(n, l);
    // Row i of C(c) a is sum_j c[min(m, N-m)] a_j with m = (j - i) mod N.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f.matrix(i, coupling_index((j - i + n) % n, n)) += steering(j);
    return f;
}

CouplingCost coupling_cost(const std::vector<Direction>& directions, const MatC& noise_basis,
                           const ArrayConfig& cfg) {
    cfg.validate();
    if (directions.empty()) throw std::invalid_argument("coupling_cost: no directions");
    if (noise_basis.rows() != cfg.n_sensors)
        throw std::invalid_argument("coupling_cost: noise basis rows must match the array");
    if (noise_basis.cols() < 1)
        throw std::invalid_argument("coupling_cost: empty noise basis");

    const int l = CouplingVector::dof(cfg.n_sensors);
    CouplingCost cost;
    cost.n_sensors = cfg.n_sensors;
    cost.matrix = MatC::Zero(l, l);
    for (const Direction& d : directions) {
        const MatC f = f_transform(steering_vector(cfg, d.azimuth_deg, d.elevation_deg)).matrix;
        const MatC g = noise_basis.adjoint() * f; // (N-k) x L
        cost.matrix.noalias() += g.adjoint() * g;
    }
    cost.matrix = 0.5 * (cost.matrix + cost.matrix.adjoint().eval()); // exact Hermitian
    return cost;
}

double null_projection_cost(const ArrayConfig& cfg, const MatC& noise_basis, double azimuth_deg,
                            double elevation_deg) {
    double az = std::fmod(azimuth_deg, 360.0);
    if (az < 0.0) az += 360.0;
    const double el = std::clamp(elevation_deg, 0.0, 90.0);
    const MatC f = f_transform(steering_vector(cfg, az, el)).matrix;
    // Minimize ||E_n^H C(c) a|| over coupled vectors C(c) a of unit norm, i.e.
    // over the range of F. Normalizing the output, not the input c, blocks
    // the trivial minimizer that annihilates the steering vector where F is
    // rank-deficient (at elevation 0 every column is an equal-entry vector).
    Eigen::JacobiSVD<MatC> fsvd(f, Eigen::ComputeThinU);
    const VecR fsv = fsvd.singularValues();
    const double top = fsv(0);
    if (!(top > 0.0)) return 1.0;
    int rank = 0;
    while (rank < fsv.size() && fsv(rank) > 1e-10 * top) ++rank;
    const MatC g = noise_basis.adjoint() * fsvd.matrixU().leftCols(rank);
    Eigen::JacobiSVD<MatC> gsvd(g);
    return gsvd.singularValues()(rank - 1);
}

namespace {

// Golden-section minimization of f over [lo, hi]; f is evaluated, never
// differentiated, so noisy cost surfaces only cost extra iterations.
template <typename F>
double golden_min(F&& f, double lo, double hi, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

// One direction's contribution to the joint objective: u accumulates the
// noise-subspace energy of the coupled steering vector, v its total energy.
struct DirectionTerm {
    MatC u, v;
};

DirectionTerm direction_term(const ArrayConfig& cfg, const MatC& noise_basis, double az,
                             double el) {
    az = std::fmod(az, 360.0);
    if (az < 0.0) az += 360.0;
    el = std::clamp(el, 0.0, 90.0);
    const MatC f = f_transform(steering_vector(cfg, az, el)).matrix;
    const MatC g = noise_basis.adjoint() * f;
    DirectionTerm t;
    t.u = g.adjoint() * g;
    t.v = f.adjoint() * f;
    return t;
}

// Smallest generalized eigenvalue of the pencil (u, v): the best over
// couplings of the noise-subspace fraction of total coupled-output energy.
// Normalizing by output energy, not by the coupling itself, keeps couplings
// that simply annihilate the steering vectors from faking a null; low
// elevations would otherwise always win, since high phase modes vanish
// there. For the same reason the pencil is truncated, not ridge-regularized:
// coupling directions whose output energy is negligible are excluded from
// the competition instead of being handed a near-zero denominator.
// q restricts the competition to couplings supported on the first q taps.
double joint_cost(const MatC& u_full, const MatC& v_full, int q) {
    const MatC u = u_full.topLeftCorner(q, q);
    const MatC v = v_full.topLeftCorner(q, q);
    Eigen::SelfAdjointEigenSolver<MatC> ve(v);
    const VecR lam = ve.eigenvalues();
    const double lmax = lam(lam.size() - 1);
    if (!(lmax > 0.0)) return 1.0;
    int first = 0;
    while (first < lam.size() && lam(first) <= 1e-13 * lmax) ++first;
    const int keep = static_cast<int>(lam.size()) - first;
    if (keep == 0) return 1.0;
    MatC w = ve.eigenvectors().rightCols(keep);
    for (int j = 0; j < keep; ++j) w.col(j) /= std::sqrt(lam(first + j));
    Eigen::SelfAdjointEigenSolver<MatC> re(w.adjoint() * u * w, Eigen::EigenvaluesOnly);
    return re.eigenvalues()(0);
}

double circular_distance_deg(double a, double b) {
    double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

Direction wrap_direction(double az, double el) {
    double a = std::fmod(az, 360.0);
    if (a < 0.0) a += 360.0;
    return {a, std::clamp(el, 0.0, 90.0)};
}

} // namespace

RefinedCoupling estimate_coupling_refined(const std::vector<Direction>& seeds,
                                          const MatC& noise_basis, const ArrayConfig& cfg,
                                          const DirectionRefineOptions& opt) {
    if (seeds.empty()) throw std::invalid_argument("estimate_coupling_refined: no seeds");
    if (!(opt.coarse_el_step_deg > 0.0) || opt.max_rounds < 1 || !(opt.tol_deg > 0.0) ||
        !(opt.dedup_az_deg >= 0.0) || opt.coupling_taps < 1)
        throw std::invalid_argument("estimate_coupling_refined: bad options");
    const int q = std::min(opt.coupling_taps, CouplingVector::dof(cfg.n_sensors));

    // Azimuth polish on the coupling-free spectrum; two seeds straddling one
    // source reveal themselves by converging onto the same azimuth line.
    std::vector<double> az, el;
    for (const Direction& s : seeds) {
        const double el0 = std::clamp(s.elevation_deg, 0.0, 90.0);
        const double a = golden_min(
            [&](double x) { return null_projection_cost(cfg, noise_basis, x, el0); },
            s.azimuth_deg - opt.azimuth_halfwidth_deg, s.azimuth_deg + opt.azimuth_halfwidth_deg,
            opt.tol_deg);
        bool dup = false;
        for (double kept : az)
            if (circular_distance_deg(a, kept) < opt.dedup_az_deg) {
                dup = true;
                break;
            }
        if (!dup) {
            az.push_back(a);
            el.push_back(el0);
        }
    }
    // Elevations as seeded; a set that collapses to one survivor falls back
    // to these (see the single-survivor branch below).
    std::vector<double> seed_el = el;

    std::vector<double> grid;
    for (double g = 0.0; g < 90.0 - 1e-9; g += opt.coarse_el_step_deg) grid.push_back(g);
    grid.push_back(90.0);
    const int ng = static_cast<int>(grid.size());

    // The joint fit below is itself poisoned by any phantom it includes, and
    // the screen that finds phantoms needs a fit first. So fit, screen, and
    // refit the survivors whenever someone was dropped; the set shrinks each
    // time, which bounds the loop.
    RefinedCoupling out;
    while (true) {
        const int k = static_cast<int>(az.size());
        if (k == 1) {
            // A lone azimuth line leaves the coupling free to explain any
            // elevation on it, so an elevation search would chase noise.
            out.directions = {wrap_direction(az[0], seed_el[0])};
            out.estimate = estimate_coupling(coupling_cost(out.directions, noise_basis, cfg));
            return out;
        }

        // Coarse stage: one pair of survivors gets an exhaustive
        // elevation-pair search, the rest follow greedily against the sum so
        // far. A pair is the smallest set that pins elevations at all: one
        // direction alone is explained by some coupling at every elevation.
        // Among the leading survivors the deepest pair wins, which sidelines
        // phantoms the sparse stage promoted: no elevation lets them share a
        // coupling with a true source, so their pairs bottom out higher.
        const int heads = std::min(k, 3);
        std::vector<std::vector<DirectionTerm>> tabs(heads, std::vector<DirectionTerm>(ng));
        for (int i = 0; i < heads; ++i)
            for (int g = 0; g < ng; ++g)
                tabs[i][g] = direction_term(cfg, noise_basis, az[i], grid[g]);

        double best = std::numeric_limits<double>::infinity();
        int p0 = 0, p1 = 1, b0 = 0, b1 = 0;
        for (int i = 0; i < heads; ++i)
            for (int j = i + 1; j < heads; ++j)
                for (int gi = 0; gi < ng; ++gi)
                    for (int gj = 0; gj < ng; ++gj) {
                        const double v = joint_cost(tabs[i][gi].u + tabs[j][gj].u,
                                                    tabs[i][gi].v + tabs[j][gj].v, q);
                        if (v < best) {
                            best = v;
                            p0 = i;
                            p1 = j;
                            b0 = gi;
                            b1 = gj;
                        }
                    }
        el[p0] = grid[b0];
        el[p1] = grid[b1];

        std::vector<DirectionTerm> terms(k);
        terms[p0] = tabs[p0][b0];
        terms[p1] = tabs[p1][b1];
        MatC sum_u = terms[p0].u + terms[p1].u;
        MatC sum_v = terms[p0].v + terms[p1].v;
        for (int i = 0; i < k; ++i) {
            if (i == p0 || i == p1) continue;
            best = std::numeric_limits<double>::infinity();
            int bi = 0;
            for (int g = 0; g < ng; ++g) {
                const DirectionTerm t =
                    i < heads ? tabs[i][g] : direction_term(cfg, noise_basis, az[i], grid[g]);
                const double v = joint_cost(sum_u + t.u, sum_v + t.v, q);
                if (v < best) {
                    best = v;
                    bi = g;
                }
            }
            el[i] = grid[bi];
            terms[i] = i < heads ? tabs[i][bi] : direction_term(cfg, noise_basis, az[i], grid[bi]);
            sum_u += terms[i].u;
            sum_v += terms[i].v;
        }

        // Polish stage: cyclic golden-section over every azimuth and
        // elevation coordinate, brackets halving each round so late rounds
        // only sharpen.
        for (int round = 0; round < opt.max_rounds; ++round) {
            const double shrink = std::pow(0.5, round);
            const double ha = std::max(opt.azimuth_halfwidth_deg * shrink, 16.0 * opt.tol_deg);
            const double he = std::max(opt.elevation_halfwidth_deg * shrink, 16.0 * opt.tol_deg);
            double moved = 0.0;
            for (int i = 0; i < k; ++i) {
                const MatC others_u = sum_u - terms[i].u;
                const MatC others_v = sum_v - terms[i].v;
                const double az_prev = az[i], el_prev = el[i];
                az[i] = golden_min(
                    [&](double x) {
                        const DirectionTerm t = direction_term(cfg, noise_basis, x, el[i]);
                        return joint_cost(others_u + t.u, others_v + t.v, q);
                    },
                    az[i] - ha, az[i] + ha, opt.tol_deg);
                el[i] = golden_min(
                    [&](double x) {
                        const DirectionTerm t = direction_term(cfg, noise_basis, az[i], x);
                        return joint_cost(others_u + t.u, others_v + t.v, q);
                    },
                    std::max(0.0, el[i] - he), std::min(90.0, el[i] + he), opt.tol_deg);
                terms[i] = direction_term(cfg, noise_basis, az[i], el[i]);
                sum_u = others_u + terms[i].u;
                sum_v = others_v + terms[i].v;
                moved = std::max({moved, std::abs(az[i] - az_prev), std::abs(el[i] - el_prev)});
            }
            if (moved < opt.tol_deg) break;
        }

        std::vector<Direction> dirs;
        for (int i = 0; i < k; ++i) dirs.push_back(wrap_direction(az[i], el[i]));
        const CouplingEstimate est = estimate_coupling(coupling_cost(dirs, noise_basis, cfg));

        // Residual screen: a direction the fitted coupling cannot place near
        // the signal subspace is a phantom from the sparse stage. Keep the
        // coherent core; the caller can re-seed for replacements.
        VecR resid(k);
        for (int i = 0; i < k; ++i) {
            const VecC& c = est.coupling.coeffs;
            const double num = std::real(c.dot(terms[i].u * c));
            const double den = std::real(c.dot(terms[i].v * c));
            resid(i) = den > 0.0 ? num / den : 1.0;
        }
        const double rmin = resid.minCoeff();
        std::vector<int> kept;
        for (int i = 0; i < k; ++i)
            if (resid(i) <= 25.0 * rmin || resid(i) <= 1e-8) kept.push_back(i);

        if (static_cast<int>(kept.size()) == k) {
            out.directions = std::move(dirs);
            out.estimate = est;
            return out;
        }
        std::vector<double> az2, el2, seed2;
        for (int i : kept) {
            az2.push_back(az[i]);
            el2.push_back(el[i]);
            seed2.push_back(seed_el[i]);
        }
        az = std::move(az2);
        el = std::move(el2);
        seed_el = std::move(seed2);
    }
}

CouplingEstimate estimate_coupling(const CouplingCost& cost) {
    const int l = static_cast<int>(cost.matrix.rows());
    if (l < 1 || cost.matrix.cols() != l)
        throw std::invalid_argument("estimate_coupling: cost matrix must be square");
    if (CouplingVector::dof(cost.n_sensors) != l)
        throw std::invalid_argument("estimate_coupling: cost matrix size does not match n_sensors");

    Eigen::SelfAdjointEigenSolver<MatC> eig(cost.matrix);
    const VecC v = eig.eigenvectors().col(0);

    CouplingEstimate est;
    est.eigenvalues = eig.eigenvalues();
    const double scale = std::max(std::abs(est.eigenvalues(l - 1)), 1.0);
    est.spectral_gap = l > 1 ? est.eigenvalues(1) - est.eigenvalues(0) : 0.0;
    est.degenerate = l > 1 && est.spectral_gap <= 1e-10 * scale;

    if (std::abs(v(0)) < 1e-12)
        throw std::domain_error("estimate_coupling: minimizer has vanishing first entry, "
                                "cannot normalize to c1 = 1");
    CouplingVector c;
    c.n_sensors = cost.n_sensors;
    c.coeffs = v / v(0);
    c.coeffs(0) = 1.0; // exact, not just to rounding
    est.coupling = c;
    return est;
}

} // namespace ucadoa
