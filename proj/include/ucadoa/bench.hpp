#pragma once

#include "ucadoa/array.hpp"
#include "ucadoa/pipeline.hpp"
#include "ucadoa/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ucadoa {

inline constexpr const char* kEstimatorProposed = "proposed";
inline constexpr const char* kEstimatorGridMusic = "grid-music";
inline constexpr const char* kEstimatorNarrowbandLasso = "narrowband-grid-lasso";

// One Monte Carlo experiment definition. JSON round-trippable; unknown keys
// in a scenario file are an error.
struct Scenario {
    ArrayConfig array;
    SourceSet sources;
    CouplingVector coupling;
    int snapshots = 200;
    std::vector<double> snr_grid_db = {0.0, 5.0, 10.0, 15.0, 20.0};
    int trials = 50;
    std::uint64_t seed = 1;
    PipelineConfig pipeline;
    std::vector<std::string> estimators = {kEstimatorProposed, kEstimatorGridMusic,
                                           kEstimatorNarrowbandLasso};
    double music_grid_deg = 1.0;
    double narrowband_grid_deg = 2.0;

    void validate() const;
    std::string to_json() const;
    static Scenario from_json(const std::string& text);
    static Scenario from_json_file(const std::string& path);
    // The benchmark setup the defaults above describe: 15-sensor UCA, r equal
    // to the wavelength, three sources, two nonzero coupling terms.
    static Scenario reference();
};

// Everything recorded about a single trial; long-format CSV rows come from these.
struct TrialRecord {
    double value = 0.0; // the sweep coordinate (SNR dB, snapshot count, or alpha)
    std::string estimator;
    int trial = 0;
    std::uint64_t seed = 0;
    int k_hat = 0;
    int n_estimates = 0;
    bool correct_order = false; // n_estimates == true source count
    bool matched = false;       // counted in the angle RMSE
    double angle_sq_err_sum = 0.0;  // sum over matched pairs, deg^2
    double coupling_rel_err = 0.0;  // ||c_hat - c|| / ||c||; NaN when not estimated
    long atoms = 0;                 // dictionary columns evaluated
    bool failed = false;            // estimator raised (e.g. empty active set)
    double runtime_s = 0.0;
};

struct MetricsRow {
    double value = 0.0;
    std::string estimator;
    double rmse_angles_deg = 0.0;   // NaN when no trial matched
    double rmse_coupling_pct = 0.0; // NaN when the estimator does not produce coupling
    double correct_order_prob = 0.0;
    int angle_trials_used = 0;
    int angle_trials_excluded = 0;
    double mean_atoms = 0.0;
    double mean_runtime_s = 0.0; // wall clock; kept out of the deterministic CSVs
};

struct SweepResult {
    std::string value_name; // "snr_db", "snapshots", or "alpha"
    std::vector<MetricsRow> rows;
    std::vector<TrialRecord> trials;
};

// Eq.-style angle RMSE over already-run trials: sqrt of the mean of
// elevation^2 + circular-azimuth^2 errors over all matched (estimate, truth)
// pairs. Trials whose estimate count differs from the truth count are
// excluded and counted.
struct AngleRmse {
    double rmse_deg = 0.0;
    int used = 0;
    int excluded = 0;
};
AngleRmse rmse_angles(
    const std::vector<std::pair<std::vector<Direction>, std::vector<Direction>>>& trials);

// Coupling RMSE percent. trial_mean = true divides by the trial count inside
// the square root (trial-count invariant); false is the raw accumulated form.
double rmse_coupling(const std::vector<std::pair<VecC, VecC>>& trials, bool trial_mean = true);

// Monte Carlo drivers. `parallel` is the worker thread count; results are
// invariant to it. run_scenario sweeps the scenario's own SNR grid.
SweepResult run_scenario(const Scenario& sc, int parallel);
SweepResult sweep_snr(const Scenario& sc, const std::vector<double>& snrs_db, int parallel);
SweepResult sweep_snapshots(const Scenario& sc, const std::vector<int>& snapshot_counts,
                            double snr_db, int parallel);
// Correct-order probability per alpha at one SNR point; proposed estimator only.
SweepResult alpha_sweep(const Scenario& sc, const std::vector<double>& alphas, double snr_db,
                        int parallel);

// Conventional comparison methods; both ignore mutual coupling.
std::vector<Direction> baseline_grid_music(const SnapshotMatrix& x, const ArrayConfig& cfg, int k,
                                           double grid_deg);
struct NarrowbandOptions {
    double alpha = 0.3;
    double rel_threshold = 0.05;
    double lasso_tol = 1e-6; // relative to gamma_max, like the pipeline
    int lasso_max_sweeps = 10000;
};
std::vector<Direction> baseline_narrowband_lasso(const SnapshotMatrix& x, const ArrayConfig& cfg,
                                                 int k, double grid_deg,
                                                 const NarrowbandOptions& opts = {});
// Number of pointwise atoms a baseline evaluates at this resolution.
int baseline_grid_points(double grid_deg);

// CSV emission. metrics/trials are deterministic for a fixed scenario+seed;
// runtime goes to its own table because wall clock never is.
std::string metrics_csv(const SweepResult& r);
std::string trials_csv(const SweepResult& r);
std::string runtime_csv(const SweepResult& r);
// Writes metrics.csv, trials.csv, runtime.csv under out_dir (created if needed).
void write_outputs(const SweepResult& r, const std::string& out_dir);

// Library self-checks behind `bench oracle-check`: the coupling-transform
// defining property and series-vs-quadrature agreement. Prints one line per
// check; returns true when all pass.
bool oracle_check(std::ostream& out);

} // namespace ucadoa
