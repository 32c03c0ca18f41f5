// SPDX-License-Identifier: Apache-2.0
// scampi-bench: Monte-Carlo NMSE-vs-SNR experiments for lens beamspace channel estimation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "beamscampi/baselines.hpp"
#include "beamscampi/cosparse_augment.hpp"
#include "beamscampi/experiment.hpp"
#include "beamscampi/scampi.hpp"
#include "bundled_configs.hpp"

namespace bs = beamscampi;

namespace {

struct RunFlags {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> out;
    int jobs = 0;
    bool fresh = false;
    bool timing = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Override the master seed");
    cmd->add_option("--trials", flags.trials, "Override trials per point")->check(CLI::PositiveNumber);
    cmd->add_option("--out", flags.out, "Override the output directory");
    cmd->add_option("--jobs,-j", flags.jobs, "Worker threads (0 = hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--fresh", flags.fresh, "Ignore rows of an existing results.csv");
    cmd->add_flag("--timing", flags.timing, "Record mean wall time per point (results become non-reproducible)");
}

int run(bs::ExperimentConfig cfg, const RunFlags& flags) {
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.trials) cfg.trials = *flags.trials;
    if (flags.out) cfg.out_dir = *flags.out;
    bs::RunOptions options;
    options.jobs = flags.jobs > 0 ? flags.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    options.resume = !flags.fresh;
    options.record_walltime = flags.timing;
    const bs::ResultTable table = bs::run_experiment(cfg, options);
    bs::write_results_csv(std::cout, table);
    std::cerr << "wrote " << cfg.out_dir << "/results.csv and plot_" << cfg.name << ".svg\n";
    return 0;
}

bs::ExperimentConfig bundled_config(const std::string& name) {
    const char* text = name == "fig6" ? bundled::fig6 : name == "fig7" ? bundled::fig7 : bundled::fig8;
    std::istringstream in(text);
    return bs::parse_config(in);
}

struct EstimateFlags {
    std::string size = "32x32";
    double snr = 30.0;
    double p = 0.0;
    int L = 3;
    int trial = 0;
    std::uint64_t seed = 1;
    std::string algorithm = "em_scampi";
    std::vector<std::string> options;
    std::string trace;
    std::string channel_out;
};

int estimate(const EstimateFlags& flags) {
    bs::ExperimentConfig cfg;
    const auto x = flags.size.find('x');
    if (x == std::string::npos) {
        throw std::invalid_argument("--size expects MxN");
    }
    const int m = std::stoi(flags.size.substr(0, x));
    const int n = std::stoi(flags.size.substr(x + 1));
    cfg.sizes = {{m, n}};
    cfg.L = flags.L;
    cfg.seed = flags.seed;
    cfg.snr_db = {flags.snr};
    cfg.p = {flags.p};

    bs::AlgorithmSpec spec{flags.algorithm, flags.algorithm, {}};
    for (const auto& kv : flags.options) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("--opt expects key=value, got '" + kv + "'");
        }
        spec.options[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    cfg.algorithms = {spec};
    cfg.validate();
    bs::check_algorithm_options(spec);

    const bs::TrialInstance inst = bs::draw_trial(cfg, m, n, flags.snr, flags.p, flags.trial);
    if (!flags.channel_out.empty()) {
        std::ofstream out(flags.channel_out, std::ios::binary);
        bs::write_channel_binary(out, inst.channel, bs::trial_seed(cfg.seed, m, n, flags.snr, flags.trial));
    }
    std::cout << "instance " << m << 'x' << n << " Q=" << inst.net.rows() << " snr_db=" << flags.snr
              << " p=" << flags.p << " Delta=" << inst.meas.Delta << '\n';

    if (flags.algorithm == "em_scampi" || flags.algorithm == "uniform_scampi") {
        bs::ScampiOptions opts = bs::scampi_options(spec);
        if (!opts.learn_noise) {
            opts.fixed_delta = inst.meas.Delta;
        }
        const bs::AugmentedSystem sys =
            bs::augment(inst.net, bs::build_difference_operator(m, n), inst.meas);
        std::ofstream trace_file;
        if (!flags.trace.empty()) {
            trace_file.open(flags.trace);
        }
        const bs::EstimationReport report =
            bs::run_scampi(sys, opts, &inst.channel.h, flags.trace.empty() ? nullptr : &trace_file);
        std::cout << "nmse " << *report.nmse << "\niterations " << report.iterations << "\nconverged "
                  << (report.converged ? "yes" : "no") << "\nretries " << report.retries
                  << "\nnoise delta_mean=" << report.learned_noise_summary.delta_mean
                  << " upsilon_mean=" << report.learned_noise_summary.upsilon_mean << '\n';
        if (report.learned_prior) {
            std::cout << "prior lambda=" << report.learned_prior->lambda << " a=" << report.learned_prior->a
                      << " v=" << report.learned_prior->v << '\n';
        }
    } else {
        const bs::AlgorithmOutcome outcome = bs::run_algorithm(spec, cfg, inst);
        std::cout << "nmse " << outcome.nmse << "\niterations " << outcome.iterations << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo NMSE-vs-SNR experiments for SCAMPI lens channel estimation"};
    app.require_subcommand(1);

    RunFlags run_flags;
    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
    run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    add_run_flags(run_cmd, run_flags);

    std::vector<CLI::App*> fig_cmds;
    for (const char* fig : {"fig6", "fig7", "fig8"}) {
        auto* cmd = app.add_subcommand(fig, std::string("Run the bundled ") + fig + " reproduction config");
        add_run_flags(cmd, run_flags);
        fig_cmds.push_back(cmd);
    }

    std::string show_name;
    auto* show_cmd = app.add_subcommand("show-config", "Print a bundled config");
    show_cmd->add_option("name", show_name, "fig6, fig7 or fig8")
        ->required()
        ->check(CLI::IsMember({"fig6", "fig7", "fig8"}));

    EstimateFlags est;
    auto* est_cmd = app.add_subcommand("estimate", "Estimate a single drawn instance and report convergence");
    est_cmd->add_option("--size", est.size, "Array size MxN")->capture_default_str();
    est_cmd->add_option("--snr", est.snr, "SNR in dB")->capture_default_str();
    est_cmd->add_option("--p", est.p, "Disconnected phase-shifter ratio")->capture_default_str();
    est_cmd->add_option("--paths", est.L, "Number of paths minus one (L)")->capture_default_str();
    est_cmd->add_option("--seed", est.seed, "Master seed")->capture_default_str();
    est_cmd->add_option("--trial", est.trial, "Trial index")->capture_default_str();
    est_cmd->add_option("--algo", est.algorithm, "Algorithm")
        ->check(CLI::IsMember(bs::algorithm_kinds()))
        ->capture_default_str();
    est_cmd->add_option("--opt", est.options, "Algorithm option key=value (repeatable)");
    est_cmd->add_option("--trace", est.trace, "Per-iteration CSV trace (SCAMPI only)");
    est_cmd->add_option("--channel-out", est.channel_out, "Write the drawn channel in binary form");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            return run(bs::load_config(config_path), run_flags);
        }
        for (auto* cmd : fig_cmds) {
            if (cmd->parsed()) {
                return run(bundled_config(cmd->get_name()), run_flags);
            }
        }
        if (show_cmd->parsed()) {
            std::cout << (show_name == "fig6" ? bundled::fig6 : show_name == "fig7" ? bundled::fig7 : bundled::fig8);
            return 0;
        }
        if (est_cmd->parsed()) {
            return estimate(est);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
