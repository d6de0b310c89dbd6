#include "ucadoa/bench.hpp"

#include "ucadoa/coupling.hpp"
#include "ucadoa/dictionary.hpp"
#include "ucadoa/lasso.hpp"
#include "ucadoa/quadrature.hpp"
#include "ucadoa/subspace.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace ucadoa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string>& known_estimators() {
    static const std::vector<std::string> names = {kEstimatorProposed, kEstimatorGridMusic,
                                                   kEstimatorNarrowbandLasso};
    return names;
}

void require_keys(const nlohmann::json& j, const char* where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument("scenario: unknown key '" + it.key() + "' in " + where);
    }
}

VecC parse_coupling_coeffs(const nlohmann::json& j, int n_sensors) {
    const int l = CouplingVector::dof(n_sensors);
    if (!j.is_array() || j.empty() || static_cast<int>(j.size()) > l)
        throw std::invalid_argument("scenario: coupling must list 1.." + std::to_string(l) +
                                    " [re, im] pairs for this array");
    VecC c = VecC::Zero(l);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        if (!e.is_array() || e.size() != 2)
            throw std::invalid_argument("scenario: coupling entries must be [re, im] pairs");
        c(static_cast<int>(i)) = cxd(e[0].get<double>(), e[1].get<double>());
    }
    return c;
}

} // namespace

Scenario Scenario::reference() {
    Scenario sc;
    sc.array = {15, 1.0, 1.0};
    sc.sources.sources = {{243.4, 18.3, 1.0}, {60.0, 83.6, 1.0}, {357.8, 73.9, 1.0}};
    sc.coupling = CouplingVector::identity(15);
    sc.coupling.coeffs(1) = cxd(0.79, 0.432);
    sc.coupling.coeffs(2) = cxd(0.35, 0.16);
    return sc;
}

void Scenario::validate() const {
    array.validate();
    sources.validate();
    coupling.validate_structure();
    coupling.validate_magnitudes();
    if (coupling.n_sensors != array.n_sensors)
        throw std::invalid_argument("scenario: coupling vector sized for a different array");
    if (snapshots < 1) throw std::invalid_argument("scenario: snapshots must be >= 1");
    if (snr_grid_db.empty()) throw std::invalid_argument("scenario: snr_grid_db must be nonempty");
    for (double s : snr_grid_db)
        if (std::isnan(s)) throw std::invalid_argument("scenario: snr values must not be NaN");
    if (trials < 1) throw std::invalid_argument("scenario: trials must be >= 1");
    pipeline.validate();
    if (estimators.empty()) throw std::invalid_argument("scenario: estimators must be nonempty");
    for (const std::string& e : estimators) {
        const auto& known = known_estimators();
        if (std::find(known.begin(), known.end(), e) == known.end())
            throw std::invalid_argument("scenario: unknown estimator '" + e + "'");
        if (std::count(estimators.begin(), estimators.end(), e) != 1)
            throw std::invalid_argument("scenario: duplicate estimator '" + e + "'");
    }
    if (!(music_grid_deg > 0.0 && music_grid_deg <= 90.0))
        throw std::invalid_argument("scenario: music_grid_deg must be in (0, 90]");
    if (!(narrowband_grid_deg > 0.0 && narrowband_grid_deg <= 90.0))
        throw std::invalid_argument("scenario: narrowband_grid_deg must be in (0, 90]");
}

std::string Scenario::to_json() const {
    nlohmann::json j;
    j["array"] = {{"n_sensors", array.n_sensors},
                  {"radius", array.radius},
                  {"wavelength", array.wavelength}};
    j["sources"] = nlohmann::json::array();
    for (const Source& s : sources.sources)
        j["sources"].push_back({{"azimuth_deg", s.azimuth_deg},
                                {"elevation_deg", s.elevation_deg},
                                {"power", s.power}});
    j["coupling"] = nlohmann::json::array();
    for (int i = 0; i < coupling.coeffs.size(); ++i)
        j["coupling"].push_back({coupling.coeffs(i).real(), coupling.coeffs(i).imag()});
    j["snapshots"] = snapshots;
    j["snr_grid_db"] = snr_grid_db;
    j["trials"] = trials;
    j["seed"] = seed;
    nlohmann::json sched = nlohmann::json::array();
    for (const auto& [a, e] : pipeline.stage_schedule) sched.push_back({a, e});
    j["pipeline"] = {{"stage_schedule", sched},
                     {"alpha", pipeline.alpha},
                     {"rel_threshold", pipeline.rel_threshold},
                     {"lasso_tol", pipeline.lasso_tol},
                     {"lasso_max_sweeps", pipeline.lasso_max_sweeps},
                     {"k_max", pipeline.k_max},
                     {"solver_mode", pipeline.solver_mode == SolverMode::group ? "group" : "shared"}};
    j["estimators"] = estimators;
    j["music_grid_deg"] = music_grid_deg;
    j["narrowband_grid_deg"] = narrowband_grid_deg;
    return j.dump(2);
}

Scenario Scenario::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scenario: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("scenario: top level must be an object");
    require_keys(j, "the scenario",
                 {"array", "sources", "coupling", "snapshots", "snr_grid_db", "trials", "seed",
                  "pipeline", "estimators", "music_grid_deg", "narrowband_grid_deg"});

    Scenario sc = reference();
    try {
        if (j.contains("array")) {
            const auto& ja = j["array"];
            require_keys(ja, "array", {"n_sensors", "radius", "wavelength"});
            if (ja.contains("n_sensors")) sc.array.n_sensors = ja["n_sensors"].get<int>();
            if (ja.contains("radius")) sc.array.radius = ja["radius"].get<double>();
            if (ja.contains("wavelength")) sc.array.wavelength = ja["wavelength"].get<double>();
        }
        if (j.contains("sources")) {
            sc.sources.sources.clear();
            for (const auto& js : j["sources"]) {
                require_keys(js, "sources[]", {"azimuth_deg", "elevation_deg", "power"});
                Source s;
                s.azimuth_deg = js.at("azimuth_deg").get<double>();
                s.elevation_deg = js.at("elevation_deg").get<double>();
                if (js.contains("power")) s.power = js["power"].get<double>();
                sc.sources.sources.push_back(s);
            }
        }
        if (j.contains("coupling")) {
            sc.coupling.n_sensors = sc.array.n_sensors;
            sc.coupling.coeffs = parse_coupling_coeffs(j["coupling"], sc.array.n_sensors);
        } else if (sc.coupling.n_sensors != sc.array.n_sensors) {
            sc.coupling = CouplingVector::identity(sc.array.n_sensors);
        }
        if (j.contains("snapshots")) sc.snapshots = j["snapshots"].get<int>();
        if (j.contains("snr_grid_db")) sc.snr_grid_db = j["snr_grid_db"].get<std::vector<double>>();
        if (j.contains("trials")) sc.trials = j["trials"].get<int>();
        if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("pipeline")) {
            const auto& jp = j["pipeline"];
            require_keys(jp, "pipeline",
                         {"stage_schedule", "alpha", "rel_threshold", "lasso_tol",
                          "lasso_max_sweeps", "k_max", "solver_mode"});
            if (jp.contains("stage_schedule")) {
                sc.pipeline.stage_schedule.clear();
                for (const auto& je : jp["stage_schedule"]) {
                    if (!je.is_array() || je.size() != 2)
                        throw std::invalid_argument(
                            "scenario: stage_schedule entries must be [azimuth, elevation] splits");
                    sc.pipeline.stage_schedule.emplace_back(je[0].get<int>(), je[1].get<int>());
                }
            }
            if (jp.contains("alpha")) sc.pipeline.alpha = jp["alpha"].get<double>();
            if (jp.contains("rel_threshold"))
                sc.pipeline.rel_threshold = jp["rel_threshold"].get<double>();
            if (jp.contains("lasso_tol")) sc.pipeline.lasso_tol = jp["lasso_tol"].get<double>();
            if (jp.contains("lasso_max_sweeps"))
                sc.pipeline.lasso_max_sweeps = jp["lasso_max_sweeps"].get<int>();
            if (jp.contains("k_max")) sc.pipeline.k_max = jp["k_max"].get<int>();
            if (jp.contains("solver_mode")) {
                const std::string mode = jp["solver_mode"].get<std::string>();
                if (mode == "group")
                    sc.pipeline.solver_mode = SolverMode::group;
                else if (mode == "shared")
                    sc.pipeline.solver_mode = SolverMode::shared;
                else
                    throw std::invalid_argument("scenario: solver_mode must be 'group' or 'shared'");
            }
        }
        if (j.contains("estimators"))
            sc.estimators = j["estimators"].get<std::vector<std::string>>();
        if (j.contains("music_grid_deg")) sc.music_grid_deg = j["music_grid_deg"].get<double>();
        if (j.contains("narrowband_grid_deg"))
            sc.narrowband_grid_deg = j["narrowband_grid_deg"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scenario: malformed field: ") + e.what());
    }
    sc.validate();
    return sc;
}

Scenario Scenario::from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("scenario: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

AngleRmse rmse_angles(
    const std::vector<std::pair<std::vector<Direction>, std::vector<Direction>>>& trials) {
    AngleRmse out;
    double sq = 0.0;
    long pairs = 0;
    for (const auto& [est, truth] : trials) {
        if (truth.empty() || est.size() != truth.size()) {
            ++out.excluded;
            continue;
        }
        const std::vector<int> perm = match_estimates(est, truth);
        for (std::size_t j = 0; j < truth.size(); ++j) {
            const Direction& e = est[perm[j]];
            const double de = e.elevation_deg - truth[j].elevation_deg;
            const double da = azimuth_distance_deg(e.azimuth_deg, truth[j].azimuth_deg);
            sq += de * de + da * da;
        }
        pairs += static_cast<long>(truth.size());
        ++out.used;
    }
    out.rmse_deg = pairs > 0 ? std::sqrt(sq / pairs) : kNaN;
    return out;
}

double rmse_coupling(const std::vector<std::pair<VecC, VecC>>& trials, bool trial_mean) {
    if (trials.empty()) return kNaN;
    double sq = 0.0;
    for (const auto& [est, truth] : trials) {
        if (est.size() != truth.size())
            throw std::invalid_argument("rmse_coupling: vector length mismatch");
        const double denom = truth.norm();
        if (!(denom > 0.0)) throw std::invalid_argument("rmse_coupling: zero truth vector");
        sq += (est - truth).squaredNorm() / (denom * denom);
    }
    if (trial_mean) sq /= static_cast<double>(trials.size());
    return std::sqrt(sq) * 100.0;
}

namespace {

struct PointSpec {
    double value = 0.0;
    double snr_db = 0.0;
    int snapshots = 0;
    PipelineConfig pipeline;
};

void for_each_trial(int count, int parallel, const std::function<void(int)>& fn) {
    const int workers = std::max(1, std::min(parallel, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    for (std::thread& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

TrialRecord run_trial(const Scenario& sc, const PointSpec& pt, const std::string& estimator,
                      int trial, const IntegratedDictionary* stage0) {
    TrialRecord rec;
    rec.value = pt.value;
    rec.estimator = estimator;
    rec.trial = trial;
    rec.seed = sc.seed + static_cast<std::uint64_t>(trial);
    rec.coupling_rel_err = kNaN;

    const auto [x, gt] =
        synthesize(sc.array, sc.sources, sc.coupling, pt.snapshots, pt.snr_db, rec.seed);
    const int k_true = sc.sources.count();
    std::vector<Direction> truth;
    truth.reserve(k_true);
    for (const Source& s : sc.sources.sources) truth.push_back({s.azimuth_deg, s.elevation_deg});

    const int k_cap =
        std::min(pt.pipeline.k_max, std::min(sc.array.n_sensors, pt.snapshots) - 1);
    std::vector<Direction> estimates;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (estimator == kEstimatorProposed) {
            const EstimationResult res = run(x, sc.array, pt.pipeline, stage0);
            rec.k_hat = res.k;
            estimates = res.doas;
            for (const StageTrace& tr : res.stages) rec.atoms += tr.n_bands;
            rec.coupling_rel_err =
                (res.coupling.coeffs - sc.coupling.coeffs).norm() / sc.coupling.coeffs.norm();
        } else if (estimator == kEstimatorGridMusic) {
            rec.k_hat = select_model_order(x, k_cap);
            estimates = baseline_grid_music(x, sc.array, rec.k_hat, sc.music_grid_deg);
            rec.atoms = baseline_grid_points(sc.music_grid_deg);
        } else if (estimator == kEstimatorNarrowbandLasso) {
            rec.k_hat = select_model_order(x, k_cap);
            NarrowbandOptions opts;
            opts.alpha = pt.pipeline.alpha;
            opts.rel_threshold = pt.pipeline.rel_threshold;
            opts.lasso_tol = pt.pipeline.lasso_tol;
            opts.lasso_max_sweeps = pt.pipeline.lasso_max_sweeps;
            estimates =
                baseline_narrowband_lasso(x, sc.array, rec.k_hat, sc.narrowband_grid_deg, opts);
            rec.atoms = baseline_grid_points(sc.narrowband_grid_deg);
        } else {
            throw std::invalid_argument("unknown estimator '" + estimator + "'");
        }
    } catch (const NoSourcesError&) {
        rec.failed = true; // benign: the sparse stage pruned everything
    }
    rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    rec.n_estimates = static_cast<int>(estimates.size());
    rec.correct_order = rec.n_estimates == k_true;
    if (rec.correct_order && k_true > 0) {
        rec.matched = true;
        const std::vector<int> perm = match_estimates(estimates, truth);
        for (int j = 0; j < k_true; ++j) {
            const Direction& e = estimates[perm[j]];
            const double de = e.elevation_deg - truth[j].elevation_deg;
            const double da = azimuth_distance_deg(e.azimuth_deg, truth[j].azimuth_deg);
            rec.angle_sq_err_sum += de * de + da * da;
        }
    }
    return rec;
}

MetricsRow aggregate(const std::vector<TrialRecord>& recs, double value,
                     const std::string& estimator, int k_true) {
    MetricsRow row;
    row.value = value;
    row.estimator = estimator;
    double sq = 0.0, csq = 0.0, atoms = 0.0, rt = 0.0;
    int correct = 0, coupling_used = 0;
    for (const TrialRecord& r : recs) {
        if (r.matched) {
            sq += r.angle_sq_err_sum;
            ++row.angle_trials_used;
        } else {
            ++row.angle_trials_excluded;
        }
        if (std::isfinite(r.coupling_rel_err)) {
            csq += r.coupling_rel_err * r.coupling_rel_err;
            ++coupling_used;
        }
        correct += r.correct_order ? 1 : 0;
        atoms += static_cast<double>(r.atoms);
        rt += r.runtime_s;
    }
    const int m = static_cast<int>(recs.size());
    row.rmse_angles_deg = row.angle_trials_used > 0 && k_true > 0
                              ? std::sqrt(sq / (static_cast<double>(k_true) * row.angle_trials_used))
                              : kNaN;
    row.rmse_coupling_pct = coupling_used > 0 ? std::sqrt(csq / coupling_used) * 100.0 : kNaN;
    row.correct_order_prob = m > 0 ? static_cast<double>(correct) / m : kNaN;
    row.mean_atoms = m > 0 ? atoms / m : 0.0;
    row.mean_runtime_s = m > 0 ? rt / m : 0.0;
    return row;
}

SweepResult sweep_core(const Scenario& sc, const std::string& value_name,
                       const std::vector<PointSpec>& points,
                       const std::vector<std::string>& estimators, int parallel) {
    sc.validate();
    if (parallel < 1) throw std::invalid_argument("parallel must be >= 1");

    SweepResult out;
    out.value_name = value_name;

    // The stage-0 dictionary depends only on the array and schedule; build it
    // once and share it read-only across trials and sweep points.
    IntegratedDictionary stage0;
    const IntegratedDictionary* stage0_ptr = nullptr;
    if (std::find(estimators.begin(), estimators.end(), kEstimatorProposed) != estimators.end()) {
        const auto [a0, e0] = sc.pipeline.stage_schedule.front();
        stage0 = build_dictionary(sc.array, make_stage0_grid(a0, e0));
        stage0_ptr = &stage0;
    }

    for (const std::string& est : estimators) {
        for (const PointSpec& pt : points) {
            std::vector<TrialRecord> recs(sc.trials);
            for_each_trial(sc.trials, parallel,
                           [&](int i) { recs[i] = run_trial(sc, pt, est, i, stage0_ptr); });
            out.rows.push_back(aggregate(recs, pt.value, est, sc.sources.count()));
            out.trials.insert(out.trials.end(), recs.begin(), recs.end());
        }
    }
    return out;
}

} // namespace

SweepResult run_scenario(const Scenario& sc, int parallel) {
    return sweep_snr(sc, sc.snr_grid_db, parallel);
}

SweepResult sweep_snr(const Scenario& sc, const std::vector<double>& snrs_db, int parallel) {
    if (snrs_db.empty()) throw std::invalid_argument("sweep_snr: empty SNR list");
    std::vector<PointSpec> pts;
    for (double s : snrs_db) pts.push_back({s, s, sc.snapshots, sc.pipeline});
    return sweep_core(sc, "snr_db", pts, sc.estimators, parallel);
}

SweepResult sweep_snapshots(const Scenario& sc, const std::vector<int>& snapshot_counts,
                            double snr_db, int parallel) {
    if (snapshot_counts.empty()) throw std::invalid_argument("sweep_snapshots: empty list");
    std::vector<PointSpec> pts;
    for (int t : snapshot_counts) {
        if (t < 1) throw std::invalid_argument("sweep_snapshots: snapshot counts must be >= 1");
        pts.push_back({static_cast<double>(t), snr_db, t, sc.pipeline});
    }
    return sweep_core(sc, "snapshots", pts, sc.estimators, parallel);
}

SweepResult alpha_sweep(const Scenario& sc, const std::vector<double>& alphas, double snr_db,
                        int parallel) {
    if (alphas.empty()) throw std::invalid_argument("alpha_sweep: empty alpha list");
    std::vector<PointSpec> pts;
    for (double a : alphas) {
        if (!(a > 0.0 && a <= 1.0))
            throw std::invalid_argument("alpha_sweep: alphas must lie in (0, 1]");
        PointSpec pt{a, snr_db, sc.snapshots, sc.pipeline};
        pt.pipeline.alpha = a;
        pts.push_back(pt);
    }
    return sweep_core(sc, "alpha", pts, {kEstimatorProposed}, parallel);
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace

std::string metrics_csv(const SweepResult& r) {
    std::ostringstream out;
    out << r.value_name
        << ",estimator,rmse_angles_deg,rmse_coupling_pct,correct_order_prob,"
           "angle_trials_used,angle_trials_excluded,mean_atoms\n";
    for (const MetricsRow& row : r.rows)
        out << fmt(row.value) << ',' << row.estimator << ',' << fmt(row.rmse_angles_deg) << ','
            << fmt(row.rmse_coupling_pct) << ',' << fmt(row.correct_order_prob) << ','
            << row.angle_trials_used << ',' << row.angle_trials_excluded << ','
            << fmt(row.mean_atoms) << '\n';
    return out.str();
}

std::string trials_csv(const SweepResult& r) {
    std::ostringstream out;
    out << r.value_name
        << ",estimator,trial,seed,k_hat,n_estimates,correct_order,matched,"
           "angle_sq_err_sum_deg2,coupling_rel_err,atoms,failed\n";
    for (const TrialRecord& t : r.trials)
        out << fmt(t.value) << ',' << t.estimator << ',' << t.trial << ',' << t.seed << ','
            << t.k_hat << ',' << t.n_estimates << ',' << (t.correct_order ? 1 : 0) << ','
            << (t.matched ? 1 : 0) << ',' << fmt(t.angle_sq_err_sum) << ','
            << fmt(t.coupling_rel_err) << ',' << t.atoms << ',' << (t.failed ? 1 : 0) << '\n';
    return out.str();
}

std::string runtime_csv(const SweepResult& r) {
    std::ostringstream out;
    out << r.value_name << ",estimator,mean_runtime_s\n";
    for (const MetricsRow& row : r.rows)
        out << fmt(row.value) << ',' << row.estimator << ',' << fmt(row.mean_runtime_s) << '\n';
    return out.str();
}

void write_outputs(const SweepResult& r, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto write = [&](const char* name, const std::string& content) {
        const std::filesystem::path p = std::filesystem::path(out_dir) / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << content;
    };
    write("metrics.csv", metrics_csv(r));
    write("trials.csv", trials_csv(r));
    write("runtime.csv", runtime_csv(r));
}

bool oracle_check(std::ostream& out) {
    bool all_ok = true;

    { // coupling-transform defining property on random draws
        std::mt19937_64 gen(7);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double max_dev = 0.0;
        const int draws = 200;
        for (int d = 0; d < draws; ++d) {
            const int n = 4 + static_cast<int>(gen() % 13); // 4..16
            ArrayConfig cfg{n, 0.5 + uni(gen), 1.0};
            const VecC a = steering_vector(cfg, 360.0 * uni(gen), 90.0 * uni(gen));
            CouplingVector c = CouplingVector::identity(n);
            for (int i = 1; i < c.coeffs.size(); ++i) {
                const double phase = 2.0 * kPi * uni(gen);
                c.coeffs(i) = uni(gen) * cxd(std::cos(phase), std::sin(phase));
            }
            const VecC lhs = f_transform(a).matrix * c.coeffs;
            const VecC rhs = coupling_matrix(c).matrix * a;
            max_dev = std::max(max_dev, (lhs - rhs).cwiseAbs().maxCoeff());
        }
        const bool ok = max_dev < 1e-12;
        all_ok = all_ok && ok;
        out << (ok ? "[ ok ]" : "[FAIL]") << " coupling transform identity: max deviation "
            << max_dev << " over " << draws << " draws (limit 1e-12)\n";
    }

    { // series evaluator vs independent 2-D quadrature
        std::mt19937_64 gen(11);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double max_rel = 0.0;
        const int cases = 20;
        for (int d = 0; d < cases; ++d) {
            ArrayConfig cfg{15, d % 2 == 0 ? 0.5 : 1.0, 1.0};
            const double wa = 0.5 + 14.5 * uni(gen);
            const double we = 0.5 + 14.5 * uni(gen);
            Band band;
            band.azimuth_lo_deg = (360.0 - wa) * uni(gen);
            band.azimuth_hi_deg = band.azimuth_lo_deg + wa;
            band.elevation_lo_deg = (90.0 - we) * uni(gen);
            band.elevation_hi_deg = band.elevation_lo_deg + we;
            const int sensor = static_cast<int>(gen() % 15);

            const cxd series = integrated_atom_element(cfg, band, sensor);
            const double kr = cfg.wave_number() * cfg.radius;
            const double gamma = cfg.sensor_angle(sensor);
            const auto f = [&](double az, double el) {
                const double phase = kr * std::sin(el) * std::cos(az - gamma);
                return cxd(std::cos(phase), std::sin(phase));
            };
            const double area = deg2rad(wa) * deg2rad(we);
            const cxd quad = integrate_rectangle(
                f, deg2rad(band.azimuth_lo_deg), deg2rad(band.azimuth_hi_deg),
                deg2rad(band.elevation_lo_deg), deg2rad(band.elevation_hi_deg), 1e-13 * area);
            max_rel = std::max(max_rel, std::abs(series - quad) / std::abs(quad));
        }
        const bool ok = max_rel < 1e-8;
        all_ok = all_ok && ok;
        out << (ok ? "[ ok ]" : "[FAIL]") << " band integral series vs adaptive quadrature: "
            << "max relative error " << max_rel << " over " << cases << " cases (limit 1e-8)\n";
    }

    return all_ok;
}

} // namespace ucadoa
