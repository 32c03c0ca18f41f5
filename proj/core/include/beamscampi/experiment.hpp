// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "beamscampi/lens_channel.hpp"
#include "beamscampi/report.hpp"
#include "beamscampi/scampi.hpp"
#include "beamscampi/selection_network.hpp"

namespace beamscampi {

/// Number of RF chains as a function of MN.
struct QRule {
    enum class Kind { half, ratio, count };
    Kind kind = Kind::half;
    double value = 0.5;

    [[nodiscard]] int resolve(int mn) const;
    [[nodiscard]] std::string to_string() const;
    static QRule parse(const std::string& text);
};

struct AlgorithmSpec {
    std::string label;  // column value in results.csv
    std::string kind;   // em_scampi | uniform_scampi | sd | omp | ls
    std::map<std::string, std::string> options;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<std::pair<int, int>> sizes{{32, 32}};
    int L = 3;
    double d_y = 12.0;
    double d_z = 12.0;
    double wavelength = 1.0;
    QRule q_rule;
    std::vector<double> snr_db;
    int trials = 100;
    std::vector<double> p{0.0};
    std::vector<AlgorithmSpec> algorithms;
    std::uint64_t seed = 1;
    std::string out_dir = "results";

    /// Throws std::invalid_argument describing the first problem found.
    void validate() const;
};

// Config text format: one `key = value` per line, `#` starts a comment.
//
//   name       = fig7
//   sizes      = 32x32, 64x64
//   L          = 3
//   dy         = 12
//   dz         = 12
//   wavelength = 1
//   q_rule     = half | ratio:0.25 | count:256
//   snr_db     = -20, -10, 0   or   range:-20:30:10  (start:stop:step, inclusive)
//   trials     = 100
//   p          = 0, 0.1
//   algorithms = em_scampi, uniform_scampi, warm0:em_scampi
//   algo.<label>.<option> = value
//   seed       = 2024
//   out        = results/fig7
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Known algorithm kinds.
const std::vector<std::string>& algorithm_kinds();

struct ResultRow {
    std::string algorithm;
    int size_m = 0;
    int size_n = 0;
    int q = 0;
    double snr_db = 0.0;
    double p = 0.0;
    int trials = 0;
    double nmse_mean = 0.0;
    double nmse_std = 0.0;
    double iters_mean = 0.0;
    double walltime_ms = 0.0;
};

struct ResultTable {
    std::vector<ResultRow> rows;
    [[nodiscard]] const ResultRow* find(const std::string& algorithm, int m, int n, double snr_db,
                                        double p) const;
};

inline constexpr const char* kResultsHeader =
    "algorithm,size_m,size_n,q,snr_db,p,trials,nmse_mean,nmse_std,iters_mean,walltime_ms";

void write_results_csv(std::ostream& out, const ResultTable& table);
ResultTable read_results_csv(std::istream& in);

/// Everything one Monte-Carlo trial draws. All algorithms of a trial see the
/// same instance.
struct TrialInstance {
    MultipathChannel channel;
    SelectionNetwork net;
    Measurement meas;
};

/// Seed of trial `trial` at one (size, SNR) point.
std::uint64_t trial_seed(std::uint64_t master, int m, int n, double snr_db, int trial);

TrialInstance draw_trial(const ExperimentConfig& cfg, int m, int n, double snr_db, double p, int trial);

struct AlgorithmOutcome {
    double nmse = 0.0;
    int iterations = 0;
    double walltime_ms = 0.0;
};

/// Throws std::invalid_argument for options the algorithm does not accept.
void check_algorithm_options(const AlgorithmSpec& spec);

/// Solver options of an em_scampi or uniform_scampi entry. Keys: t_max, eps,
/// alpha, beta, omega, learn_noise, noise_pooling, upsilon, and for em_scampi
/// em_warmup, em_init_lambda.
ScampiOptions scampi_options(const AlgorithmSpec& spec);

AlgorithmOutcome run_algorithm(const AlgorithmSpec& spec, const ExperimentConfig& cfg,
                               const TrialInstance& instance);

struct RunOptions {
    int jobs = 1;
    bool resume = true;          // reuse rows of an existing results.csv
    bool write_outputs = true;   // results.csv, plot_<name>.svg, run.log
    bool record_walltime = false;
    double failure_cap = 0.05;   // fraction of failed trials that fails the run
};

/// Runs every (size, SNR, p, algorithm) point. Throws std::runtime_error when
/// a point exceeds the failure cap.
ResultTable run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Sum of values by recursive halving; the result depends only on the order
/// of `values`.
double pairwise_sum(const double* values, std::size_t count);

}  // namespace beamscampi
