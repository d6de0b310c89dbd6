#include "ucadoa/bench.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace ucadoa;

namespace {

VecC paper_taps() {
    return Scenario::reference().coupling.coeffs;
}

} // namespace

TEST_CASE("rmse_angles: exact estimates, right triangles, and the wrap") {
    using Pair = std::pair<std::vector<Direction>, std::vector<Direction>>;
    const AngleRmse zero = rmse_angles({Pair{{{10.0, 20.0}}, {{10.0, 20.0}}}});
    CHECK(zero.rmse_deg == 0.0);
    CHECK(zero.used == 1);
    CHECK(zero.excluded == 0);

    const AngleRmse tri = rmse_angles({Pair{{{103.0, 54.0}}, {{100.0, 50.0}}}});
    CHECK(tri.rmse_deg == doctest::Approx(5.0).epsilon(1e-12));

    const AngleRmse wrap = rmse_angles({Pair{{{359.9, 10.0}}, {{0.1, 10.0}}}});
    CHECK(wrap.rmse_deg == doctest::Approx(0.2).epsilon(1e-12));

    const AngleRmse none = rmse_angles({});
    CHECK(none.used == 0);
    CHECK(std::isnan(none.rmse_deg));
}

TEST_CASE("rmse_angles: counts mismatched trials out instead of scoring them") {
    using Pair = std::pair<std::vector<Direction>, std::vector<Direction>>;
    const std::vector<Direction> truth = {{100.0, 50.0}, {200.0, 30.0}};
    const Pair good{{{100.0, 50.0}, {200.0, 30.0}}, truth};
    const Pair short_one{{{100.0, 50.0}}, truth};
    const AngleRmse r = rmse_angles({good, short_one, good});
    CHECK(r.used == 2);
    CHECK(r.excluded == 1);
    CHECK(r.rmse_deg == 0.0);
}

TEST_CASE("rmse_angles: invariant to the order of the estimates") {
    using Pair = std::pair<std::vector<Direction>, std::vector<Direction>>;
    const std::vector<Direction> truth = {{10.0, 10.0}, {120.0, 40.0}, {250.0, 70.0}};
    const std::vector<Direction> est = {{11.0, 11.0}, {121.0, 41.0}, {251.0, 71.0}};
    const std::vector<Direction> shuffled = {est[2], est[0], est[1]};
    const AngleRmse a = rmse_angles({Pair{est, truth}});
    const AngleRmse b = rmse_angles({Pair{shuffled, truth}});
    CHECK(a.rmse_deg == doctest::Approx(b.rmse_deg).epsilon(1e-14));
}

TEST_CASE("rmse_coupling: relative error in percent, trial-count invariant") {
    const VecC c = paper_taps();
    CHECK(rmse_coupling({{c, c}}) == 0.0);

    const VecC off = c * 1.1;
    CHECK(rmse_coupling({{off, c}}) == doctest::Approx(10.0).epsilon(1e-12));

    const std::vector<std::pair<VecC, VecC>> four(4, {off, c});
    CHECK(rmse_coupling(four, true) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(rmse_coupling(four, false) == doctest::Approx(20.0).epsilon(1e-12));

    CHECK(std::isnan(rmse_coupling({})));
    CHECK_THROWS_AS(rmse_coupling({{VecC::Ones(3), c}}), std::invalid_argument);
    CHECK_THROWS_AS(rmse_coupling({{c, VecC::Zero(8)}}), std::invalid_argument);
}

TEST_CASE("scenario: the reference benchmark setup") {
    const Scenario sc = Scenario::reference();
    CHECK(sc.array.n_sensors == 15);
    CHECK(sc.array.radius == 1.0);
    CHECK(sc.array.wavelength == 1.0);
    REQUIRE(sc.sources.count() == 3);
    CHECK(sc.sources.sources[0].azimuth_deg == 243.4);
    CHECK(sc.sources.sources[0].elevation_deg == 18.3);
    CHECK(sc.sources.sources[1].azimuth_deg == 60.0);
    CHECK(sc.sources.sources[1].elevation_deg == 83.6);
    CHECK(sc.sources.sources[2].azimuth_deg == 357.8);
    CHECK(sc.sources.sources[2].elevation_deg == 73.9);
    for (const Source& s : sc.sources.sources) CHECK(s.power == 1.0);
    REQUIRE(sc.coupling.coeffs.size() == 8);
    CHECK(sc.coupling.coeffs(0) == cxd(1.0, 0.0));
    CHECK(sc.coupling.coeffs(1) == cxd(0.79, 0.432));
    CHECK(sc.coupling.coeffs(2) == cxd(0.35, 0.16));
    for (int i = 3; i < 8; ++i) CHECK(sc.coupling.coeffs(i) == cxd(0.0, 0.0));
    CHECK(sc.snapshots == 200);
    CHECK(sc.trials == 50);
    CHECK(sc.snr_grid_db == std::vector<double>{0.0, 5.0, 10.0, 15.0, 20.0});
    CHECK(sc.estimators.size() == 3);
    CHECK_NOTHROW(sc.validate());
}

TEST_CASE("scenario: validation rejects broken setups") {
    Scenario sc = Scenario::reference();
    sc.trials = 0;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = Scenario::reference();
    sc.snapshots = 0;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = Scenario::reference();
    sc.snr_grid_db.clear();
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = Scenario::reference();
    sc.estimators = {kEstimatorProposed, kEstimatorProposed};
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = Scenario::reference();
    sc.estimators = {"psychic"};
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = Scenario::reference();
    sc.music_grid_deg = 0.0;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}

TEST_CASE("scenario: JSON round trip preserves every field") {
    Scenario sc = Scenario::reference();
    sc.trials = 7;
    sc.seed = 99;
    sc.pipeline.alpha = 0.4;
    sc.estimators = {kEstimatorProposed, kEstimatorGridMusic};
    const Scenario rt = Scenario::from_json(sc.to_json());
    CHECK(rt.array.n_sensors == sc.array.n_sensors);
    CHECK(rt.sources.sources[2].elevation_deg == sc.sources.sources[2].elevation_deg);
    CHECK((rt.coupling.coeffs.array() == sc.coupling.coeffs.array()).all());
    CHECK(rt.snapshots == sc.snapshots);
    CHECK(rt.snr_grid_db == sc.snr_grid_db);
    CHECK(rt.trials == 7);
    CHECK(rt.seed == 99);
    CHECK(rt.pipeline.alpha == 0.4);
    CHECK(rt.pipeline.stage_schedule == sc.pipeline.stage_schedule);
    CHECK(rt.estimators == sc.estimators);
    CHECK(rt.music_grid_deg == sc.music_grid_deg);
}

TEST_CASE("scenario: unknown JSON keys are an error wherever they appear") {
    const std::string base = Scenario::reference().to_json();
    CHECK_NOTHROW(Scenario::from_json(base));

    nlohmann::json top = nlohmann::json::parse(base);
    top["bogus"] = 1;
    CHECK_THROWS_AS(Scenario::from_json(top.dump()), std::invalid_argument);

    nlohmann::json nested = nlohmann::json::parse(base);
    nested["pipeline"]["bogus"] = 1;
    CHECK_THROWS_AS(Scenario::from_json(nested.dump()), std::invalid_argument);

    nlohmann::json fat = nlohmann::json::parse(base);
    fat["coupling"].push_back({0.1, 0.0}); // 9 taps for a 15-sensor circle
    CHECK_THROWS_AS(Scenario::from_json(fat.dump()), std::invalid_argument);
}

TEST_CASE("scenario: file loading") {
    namespace fs = std::filesystem;
    const fs::path p = fs::temp_directory_path() / "ucadoa_scenario_roundtrip.json";
    {
        std::ofstream f(p);
        f << Scenario::reference().to_json();
    }
    const Scenario sc = Scenario::from_json_file(p.string());
    CHECK(sc.sources.count() == 3);
    fs::remove(p);
    CHECK_THROWS(Scenario::from_json_file((fs::temp_directory_path() / "absent.json").string()));
}

TEST_CASE("run_scenario: deterministic and invariant to the worker count") {
    Scenario sc = Scenario::reference();
    sc.trials = 2;
    sc.snapshots = 100;
    sc.snr_grid_db = {20.0};
    sc.estimators = {kEstimatorProposed};

    const SweepResult a = run_scenario(sc, 1);
    const SweepResult b = run_scenario(sc, 1);
    const SweepResult c = run_scenario(sc, 4);
    CHECK(metrics_csv(a) == metrics_csv(b));
    CHECK(trials_csv(a) == trials_csv(b));
    CHECK(metrics_csv(a) == metrics_csv(c));
    CHECK(trials_csv(a) == trials_csv(c));

    CHECK(a.value_name == "snr_db");
    REQUIRE(a.rows.size() == 1);
    REQUIRE(a.trials.size() == 2);
    for (const TrialRecord& t : a.trials) {
        CHECK(t.value == 20.0);
        CHECK(t.estimator == kEstimatorProposed);
        CHECK(t.seed == sc.seed + static_cast<std::uint64_t>(t.trial));
        CHECK(!t.failed);
        // the multi-stage zoom must stay far below a brute-force fine grid
        CHECK(t.atoms >= 3600);
        CHECK(t.atoms < baseline_grid_points(0.1));
        CHECK(std::isfinite(t.coupling_rel_err));
    }
    CHECK(a.rows[0].correct_order_prob == 1.0);
    CHECK(a.rows[0].rmse_angles_deg < 0.5);
}

TEST_CASE("alpha_sweep: full-boundary regularization empties every trial") {
    Scenario sc = Scenario::reference();
    sc.trials = 1;
    sc.snapshots = 100;
    sc.estimators = {kEstimatorProposed};
    const SweepResult r = alpha_sweep(sc, {0.3, 1.0}, 10.0, 1);
    CHECK(r.value_name == "alpha");
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].value == 0.3);
    const double p0 = r.rows[0].correct_order_prob;
    CHECK((p0 == 0.0 || p0 == 1.0)); // single trial, so a probability endpoint
    CHECK(r.rows[1].value == 1.0);
    CHECK(r.rows[1].correct_order_prob == 0.0);
    for (const TrialRecord& t : r.trials)
        if (t.value == 1.0) {
            CHECK(t.failed);
            CHECK(t.n_estimates == 0);
        }
}

TEST_CASE("sweep_snapshots: one row per snapshot count") {
    Scenario sc = Scenario::reference();
    sc.trials = 1;
    sc.estimators = {kEstimatorProposed};
    const SweepResult r = sweep_snapshots(sc, {50, 100}, 20.0, 1);
    CHECK(r.value_name == "snapshots");
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].value == 50.0);
    CHECK(r.rows[1].value == 100.0);
}

TEST_CASE("baseline grid music: exact on its own grid when coupling is absent") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    SourceSet set;
    set.sources = {{30.0, 40.0, 1.0}};
    const auto [x, truth] =
        synthesize(cfg, set, CouplingVector::identity(15), 200, 40.0, 81);
    const std::vector<Direction> est = baseline_grid_music(x, cfg, 1, 1.0);
    REQUIRE(est.size() == 1);
    CHECK(est[0].azimuth_deg == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(est[0].elevation_deg == doctest::Approx(40.0).epsilon(1e-12));

    CHECK(baseline_grid_music(x, cfg, 0, 1.0).empty());
    CHECK_THROWS_AS(baseline_grid_music(x, cfg, -1, 1.0), std::invalid_argument);
}

TEST_CASE("baseline narrowband lasso: on-grid recovery, half-spacing floor off-grid") {
    const ArrayConfig cfg{15, 1.0, 1.0};
    SourceSet on;
    on.sources = {{100.0, 30.0, 1.0}};
    const auto [x1, t1] = synthesize(cfg, on, CouplingVector::identity(15), 200, 40.0, 83);
    const std::vector<Direction> est = baseline_narrowband_lasso(x1, cfg, 1, 2.0);
    REQUIRE(est.size() == 1);
    CHECK(est[0].azimuth_deg == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(est[0].elevation_deg == doctest::Approx(30.0).epsilon(1e-12));

    SourceSet off;
    off.sources = {{30.5, 40.0, 1.0}};
    const auto [x2, t2] = synthesize(cfg, off, CouplingVector::identity(15), 200, 40.0, 85);
    const std::vector<Direction> est2 = baseline_narrowband_lasso(x2, cfg, 1, 1.0);
    REQUIRE(est2.size() == 1);
    CHECK(azimuth_distance_deg(est2[0].azimuth_deg, 30.5) >= 0.5 - 1e-9);

    CHECK(baseline_narrowband_lasso(x2, cfg, 0, 1.0).empty());
}

TEST_CASE("baseline grid sizes") {
    CHECK(baseline_grid_points(2.0) == 8280);
    CHECK(baseline_grid_points(1.0) == 32760);
}

TEST_CASE("csv emission: stable headers, runtime quarantined") {
    SweepResult r;
    r.value_name = "snr_db";
    MetricsRow row;
    row.value = 5.0;
    row.estimator = kEstimatorProposed;
    row.rmse_angles_deg = 0.25;
    row.mean_runtime_s = 1.5;
    r.rows = {row};

    const std::string m = metrics_csv(r);
    CHECK(m.rfind("snr_db,estimator,rmse_angles_deg,rmse_coupling_pct,correct_order_prob,"
                  "angle_trials_used,angle_trials_excluded,mean_atoms\n",
                  0) == 0);
    CHECK(m.find("runtime") == std::string::npos);

    const std::string t = trials_csv(r);
    CHECK(t.rfind("snr_db,estimator,trial,seed,k_hat,n_estimates,correct_order,matched,"
                  "angle_sq_err_sum_deg2,coupling_rel_err,atoms,failed\n",
                  0) == 0);
    CHECK(t.find("runtime") == std::string::npos);

    const std::string rt = runtime_csv(r);
    CHECK(rt.rfind("snr_db,estimator,mean_runtime_s\n", 0) == 0);
    CHECK(rt.find("1.5") != std::string::npos);
}

TEST_CASE("write_outputs: three tables matching the in-memory emitters") {
    namespace fs = std::filesystem;
    SweepResult r;
    r.value_name = "alpha";
    MetricsRow row;
    row.value = 0.3;
    row.estimator = kEstimatorProposed;
    r.rows = {row};
    TrialRecord tr;
    tr.value = 0.3;
    tr.estimator = kEstimatorProposed;
    r.trials = {tr};

    const fs::path dir = fs::temp_directory_path() / "ucadoa_write_outputs_test";
    fs::remove_all(dir);
    write_outputs(r, dir.string());
    const auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        REQUIRE(f.good());
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    CHECK(slurp(dir / "metrics.csv") == metrics_csv(r));
    CHECK(slurp(dir / "trials.csv") == trials_csv(r));
    CHECK(slurp(dir / "runtime.csv") == runtime_csv(r));
    fs::remove_all(dir);
}

TEST_CASE("oracle_check: self-checks pass and report per line") {
    std::ostringstream out;
    CHECK(oracle_check(out));
    const std::string s = out.str();
    CHECK(s.find("[ ok ]") != std::string::npos);
    CHECK(s.find("[FAIL]") == std::string::npos);
}
