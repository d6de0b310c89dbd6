#include "ucadoa/bench.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonOpts {
    std::string scenario_path;
    int trials = 0; // 0 = keep scenario value
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = "out";
    int parallel = 1;
    std::string estimator = "all";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool scenario_required) {
    auto* pos = cmd->add_option("scenario", o.scenario_path,
                                "scenario JSON file (defaults to the built-in reference)");
    if (scenario_required) pos->required()->check(CLI::ExistingFile);
    else pos->check(CLI::ExistingFile);
    cmd->add_option("--trials", o.trials, "override trial count");
    cmd->add_option("--seed", o.seed, "override base seed")->each([&](const std::string&) {
        o.seed_set = true;
    });
    cmd->add_option("--out", o.out_dir, "output directory [out]");
    cmd->add_option("--parallel", o.parallel, "worker threads [1]")->check(CLI::PositiveNumber);
    cmd->add_option("--estimator", o.estimator,
                    "estimator name or 'all' (proposed, grid-music, narrowband-grid-lasso)");
}

ucadoa::Scenario load_scenario(const CommonOpts& o) {
    ucadoa::Scenario sc = o.scenario_path.empty()
                              ? ucadoa::Scenario::reference()
                              : ucadoa::Scenario::from_json_file(o.scenario_path);
    if (o.trials > 0) sc.trials = o.trials;
    if (o.seed_set) sc.seed = o.seed;
    if (o.estimator != "all") sc.estimators = {o.estimator};
    sc.validate();
    return sc;
}

int emit(const ucadoa::SweepResult& r, const CommonOpts& o) {
    ucadoa::write_outputs(r, o.out_dir);
    std::cout << ucadoa::metrics_csv(r);
    std::cout << "# wrote " << o.out_dir << "/{metrics,trials,runtime}.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo benchmark for joint DOA and mutual-coupling estimation "
                 "on uniform circular arrays"};
    app.require_subcommand(1);

    CommonOpts run_o, snr_o, snap_o, alpha_o;
    std::vector<double> snrs, alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0};
    std::vector<int> snapshot_counts = {50, 100, 200, 400};
    double snap_snr = 5.0, alpha_snr = 10.0;

    auto* cmd_run = app.add_subcommand("run", "run the scenario over its own SNR grid");
    add_common(cmd_run, run_o, true);

    auto* cmd_snr = app.add_subcommand("sweep-snr", "sweep SNR");
    add_common(cmd_snr, snr_o, false);
    cmd_snr->add_option("--snrs", snrs, "SNR grid in dB (default: scenario's grid)")
        ->delimiter(',');

    auto* cmd_snap = app.add_subcommand("sweep-snapshots", "sweep snapshot count");
    add_common(cmd_snap, snap_o, false);
    cmd_snap->add_option("--snapshots", snapshot_counts, "snapshot counts [50,100,200,400]")
        ->delimiter(',');
    cmd_snap->add_option("--snr", snap_snr, "SNR in dB [5]");

    auto* cmd_alpha = app.add_subcommand("sweep-alpha", "sweep the regularization fraction");
    add_common(cmd_alpha, alpha_o, false);
    cmd_alpha->add_option("--alphas", alphas, "alpha values in (0,1]")->delimiter(',');
    cmd_alpha->add_option("--snr", alpha_snr, "SNR in dB [10]");

    auto* cmd_oracle =
        app.add_subcommand("oracle-check", "run the built-in numerical self-checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_oracle->parsed()) return ucadoa::oracle_check(std::cout) ? 0 : 1;
        if (cmd_run->parsed()) {
            const ucadoa::Scenario sc = load_scenario(run_o);
            return emit(ucadoa::run_scenario(sc, run_o.parallel), run_o);
        }
        if (cmd_snr->parsed()) {
            const ucadoa::Scenario sc = load_scenario(snr_o);
            const std::vector<double>& grid = snrs.empty() ? sc.snr_grid_db : snrs;
            return emit(ucadoa::sweep_snr(sc, grid, snr_o.parallel), snr_o);
        }
        if (cmd_snap->parsed()) {
            const ucadoa::Scenario sc = load_scenario(snap_o);
            return emit(ucadoa::sweep_snapshots(sc, snapshot_counts, snap_snr, snap_o.parallel),
                        snap_o);
        }
        if (cmd_alpha->parsed()) {
            const ucadoa::Scenario sc = load_scenario(alpha_o);
            return emit(ucadoa::alpha_sweep(sc, alphas, alpha_snr, alpha_o.parallel), alpha_o);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
