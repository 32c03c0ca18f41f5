// SPDX-License-Identifier: Apache-2.0
#include "beamscampi/experiment.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "beamscampi/baselines.hpp"
#include "beamscampi/cosparse_augment.hpp"
#include "beamscampi/scampi.hpp"
#include "beamscampi/svg_plot.hpp"

namespace beamscampi {

namespace {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class OptionReader {
public:
    explicit OptionReader(const AlgorithmSpec& spec) : spec_(spec) {}

    double number(const std::string& key, double fallback) {
        used_.insert(key);
        auto it = spec_.options.find(key);
        if (it == spec_.options.end()) {
            return fallback;
        }
        std::size_t n = 0;
        double value = 0.0;
        try {
            value = std::stod(it->second, &n);
        } catch (const std::exception&) {
            n = 0;
        }
        if (n != it->second.size() || n == 0) {
            throw std::invalid_argument(where(key) + ": expected a number, got '" + it->second + "'");
        }
        return value;
    }

    int integer(const std::string& key, int fallback) {
        const double value = number(key, fallback);
        if (value != std::floor(value)) {
            throw std::invalid_argument(where(key) + ": expected an integer");
        }
        return static_cast<int>(value);
    }

    bool flag(const std::string& key, bool fallback) {
        used_.insert(key);
        auto it = spec_.options.find(key);
        if (it == spec_.options.end()) {
            return fallback;
        }
        if (it->second == "true" || it->second == "1" || it->second == "on") {
            return true;
        }
        if (it->second == "false" || it->second == "0" || it->second == "off") {
            return false;
        }
        throw std::invalid_argument(where(key) + ": expected true or false");
    }

    std::string text(const std::string& key) {
        used_.insert(key);
        auto it = spec_.options.find(key);
        return it == spec_.options.end() ? std::string() : it->second;
    }

    bool has(const std::string& key) const { return spec_.options.count(key) > 0; }

    void finish() const {
        for (const auto& [key, value] : spec_.options) {
            if (!used_.count(key)) {
                throw std::invalid_argument("algorithm '" + spec_.label + "' (" + spec_.kind +
                                            ") has no option '" + key + "'");
            }
        }
    }

private:
    std::string where(const std::string& key) const { return "algo." + spec_.label + "." + key; }

    const AlgorithmSpec& spec_;
    std::set<std::string> used_;
};

ScampiOptions read_scampi_options(OptionReader& reader, bool em) {
    ScampiOptions opts;
    opts.prior_kind = em ? PriorKind::bernoulli_gaussian : PriorKind::uniform;
    opts.t_max = reader.integer("t_max", opts.t_max);
    opts.eps = reader.number("eps", opts.eps);
    opts.alpha_damp = reader.number("alpha", opts.alpha_damp);
    opts.beta_damp = reader.number("beta", opts.beta_damp);
    opts.omega = reader.number("omega", opts.omega);
    opts.learn_noise = reader.flag("learn_noise", opts.learn_noise);
    if (reader.has("noise_pooling")) {
        const std::string pooling = reader.text("noise_pooling");
        using Pooling = ScampiOptions::Pooling;
        if (pooling == "none") opts.noise_pooling = Pooling::none;
        else if (pooling == "measurement") opts.noise_pooling = Pooling::measurement;
        else if (pooling == "difference") opts.noise_pooling = Pooling::difference;
        else if (pooling == "both") opts.noise_pooling = Pooling::both;
        else throw std::invalid_argument("noise_pooling must be none, measurement, difference or both");
    }
    if (reader.has("upsilon")) {
        opts.fixed_upsilon = reader.number("upsilon", 0.0);
    }
    if (em) {
        opts.em_warmup = reader.integer("em_warmup", opts.em_warmup);
        opts.em_init_lambda = reader.number("em_init_lambda", opts.em_init_lambda);
    }
    opts.validate();
    return opts;
}

struct ParsedAlgorithm {
    ScampiOptions scampi;
    int square = 8;
    int paths = -1;
    int omp_k = 0;
};

ParsedAlgorithm parse_algorithm(const AlgorithmSpec& spec, int default_paths) {
    OptionReader reader(spec);
    ParsedAlgorithm out;
    if (spec.kind == "em_scampi" || spec.kind == "uniform_scampi") {
        out.scampi = read_scampi_options(reader, spec.kind == "em_scampi");
    } else if (spec.kind == "sd") {
        out.square = reader.integer("square", 8);
        out.paths = reader.integer("paths", default_paths);
    } else if (spec.kind == "omp") {
        out.omp_k = reader.integer("k", 16 * (default_paths + 1));
    } else if (spec.kind != "ls") {
        throw std::invalid_argument("unknown algorithm '" + spec.kind + "'");
    }
    reader.finish();
    return out;
}

}  // namespace

double pairwise_sum(const double* values, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            s += values[i];
        }
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

std::uint64_t trial_seed(std::uint64_t master, int m, int n, double snr_db, int trial) {
    std::uint64_t s = combine_seed(master, static_cast<std::uint64_t>(m));
    s = combine_seed(s, static_cast<std::uint64_t>(n));
    s = combine_seed(s, std::bit_cast<std::uint64_t>(snr_db));
    return combine_seed(s, static_cast<std::uint64_t>(trial));
}

TrialInstance draw_trial(const ExperimentConfig& cfg, int m, int n, double snr_db, double p, int trial) {
    const std::uint64_t base = trial_seed(cfg.seed, m, n, snr_db, trial);
    const LensConfig lens{m, n, cfg.d_y, cfg.d_z, cfg.wavelength};
    TrialInstance inst;
    Rng channel_rng(combine_seed(base, 1));
    inst.channel = sample_channel(channel_rng, cfg.L, lens);
    const int mn = m * n;
    inst.net = build_hadamard_selection(cfg.q_rule.resolve(mn), mn, combine_seed(base, 2));
    if (p > 0.0) {
        // The mask stream depends on p alone, so p sweeps share channel and noise draws.
        inst.net = reduce_phase_shifters(inst.net, p, combine_seed(combine_seed(base, 3), std::bit_cast<std::uint64_t>(p)));
    }
    Rng noise_rng(combine_seed(base, 4));
    inst.meas = measure(inst.net, inst.channel.h, snr_db, noise_rng);
    return inst;
}

void check_algorithm_options(const AlgorithmSpec& spec) {
    parse_algorithm(spec, 3);
}

ScampiOptions scampi_options(const AlgorithmSpec& spec) {
    if (spec.kind != "em_scampi" && spec.kind != "uniform_scampi") {
        throw std::invalid_argument("scampi_options: '" + spec.kind + "' is not a SCAMPI variant");
    }
    return parse_algorithm(spec, 3).scampi;
}

AlgorithmOutcome run_algorithm(const AlgorithmSpec& spec, const ExperimentConfig& cfg,
                               const TrialInstance& instance) {
    ParsedAlgorithm parsed = parse_algorithm(spec, cfg.L);
    const auto start = std::chrono::steady_clock::now();
    const Vector& truth = instance.channel.h;
    const int rows = static_cast<int>(instance.channel.H.rows());
    const int cols = static_cast<int>(instance.channel.H.cols());
    AlgorithmOutcome out;
    if (spec.kind == "em_scampi" || spec.kind == "uniform_scampi") {
        if (!parsed.scampi.learn_noise) {
            parsed.scampi.fixed_delta = instance.meas.Delta;
        }
        const AugmentedSystem sys = augment(instance.net, build_difference_operator(rows, cols), instance.meas);
        const EstimationReport report = run_scampi(sys, parsed.scampi, &truth);
        out.nmse = *report.nmse;
        out.iterations = report.iterations;
    } else if (spec.kind == "sd") {
        const SdResult sd = sd_estimate(instance.meas, instance.net, rows, cols, parsed.paths, parsed.square);
        out.nmse = compute_nmse(sd.report.h_est, truth);
        out.iterations = sd.report.iterations;
    } else if (spec.kind == "omp") {
        const EstimationReport report = omp_estimate(instance.meas, instance.net, parsed.omp_k);
        out.nmse = compute_nmse(report.h_est, truth);
        out.iterations = report.iterations;
    } else {
        const LeastSquaresResult ls = ls_estimate(instance.meas, instance.net);
        out.nmse = compute_nmse(ls.h, truth);
        out.iterations = 1;
    }
    out.walltime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(out.nmse)) {
        throw std::runtime_error("non-finite NMSE");
    }
    return out;
}

const ResultRow* ResultTable::find(const std::string& algorithm, int m, int n, double snr_db, double p) const {
    for (const auto& row : rows) {
        if (row.algorithm == algorithm && row.size_m == m && row.size_n == n && row.snr_db == snr_db &&
            row.p == p) {
            return &row;
        }
    }
    return nullptr;
}

void write_results_csv(std::ostream& out, const ResultTable& table) {
    out << kResultsHeader << '\n';
    for (const auto& row : table.rows) {
        out << row.algorithm << ',' << row.size_m << ',' << row.size_n << ',' << row.q << ','
            << format_double(row.snr_db) << ',' << format_double(row.p) << ',' << row.trials << ','
            << format_double(row.nmse_mean) << ',' << format_double(row.nmse_std) << ','
            << format_double(row.iters_mean) << ',' << format_double(row.walltime_ms) << '\n';
    }
}

ResultTable read_results_csv(std::istream& in) {
    ResultTable table;
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader) {
        throw std::runtime_error("results.csv: unexpected header");
    }
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 11) {
            throw std::runtime_error("results.csv line " + std::to_string(line_no) + ": expected 11 fields");
        }
        ResultRow row;
        row.algorithm = cells[0];
        row.size_m = std::stoi(cells[1]);
        row.size_n = std::stoi(cells[2]);
        row.q = std::stoi(cells[3]);
        row.snr_db = std::stod(cells[4]);
        row.p = std::stod(cells[5]);
        row.trials = std::stoi(cells[6]);
        row.nmse_mean = std::stod(cells[7]);
        row.nmse_std = std::stod(cells[8]);
        row.iters_mean = std::stod(cells[9]);
        row.walltime_ms = std::stod(cells[10]);
        table.rows.push_back(row);
    }
    return table;
}

namespace {

struct Point {
    int m = 0;
    int n = 0;
    double p = 0.0;
    double snr = 0.0;
};

struct Cell {
    std::optional<AlgorithmOutcome> outcome;
    std::string error;
};

std::string size_label(int m, int n) {
    return std::to_string(m) + "x" + std::to_string(n);
}

void write_plot(const std::filesystem::path& path, const ExperimentConfig& cfg, const ResultTable& table) {
    std::vector<PlotSeries> series;
    for (const auto& [m, n] : cfg.sizes) {
        for (const double p : cfg.p) {
            for (const auto& algo : cfg.algorithms) {
                PlotSeries s;
                s.label = algo.label + " " + size_label(m, n);
                if (cfg.p.size() > 1 || p > 0.0) {
                    s.label += " p=" + format_double(p);
                }
                for (const double snr : cfg.snr_db) {
                    if (const ResultRow* row = table.find(algo.label, m, n, snr, p)) {
                        s.x.push_back(snr);
                        s.y.push_back(row->nmse_mean);
                    }
                }
                series.push_back(std::move(s));
            }
        }
    }
    std::ofstream out(path);
    PlotSpec spec;
    spec.title = cfg.name;
    write_log_plot_svg(out, spec, series);
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    cfg.validate();
    for (const auto& algo : cfg.algorithms) {
        parse_algorithm(algo, cfg.L);
    }
    const std::filesystem::path out_dir(cfg.out_dir);
    std::ofstream log;
    ResultTable previous;
    if (options.write_outputs) {
        std::filesystem::create_directories(out_dir);
        log.open(out_dir / "run.log", options.resume ? std::ios::app : std::ios::trunc);
        const auto csv = out_dir / "results.csv";
        if (options.resume && std::filesystem::exists(csv)) {
            std::ifstream in(csv);
            previous = read_results_csv(in);
        }
        log << "experiment " << cfg.name << " seed=" << cfg.seed << " trials=" << cfg.trials
            << " q_rule=" << cfg.q_rule.to_string() << " L=" << cfg.L << " dy=" << format_double(cfg.d_y)
            << " dz=" << format_double(cfg.d_z) << '\n';
    }

    std::vector<Point> points;
    for (const auto& [m, n] : cfg.sizes) {
        for (const double p : cfg.p) {
            for (const double snr : cfg.snr_db) {
                points.push_back({m, n, p, snr});
            }
        }
    }
    const std::size_t n_algo = cfg.algorithms.size();
    const auto trials = static_cast<std::size_t>(cfg.trials);

    // pending[point][algo]: still has to run
    std::vector<std::vector<char>> pending(points.size(), std::vector<char>(n_algo, 1));
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        for (std::size_t a = 0; a < n_algo; ++a) {
            const Point& pt = points[pi];
            if (previous.find(cfg.algorithms[a].label, pt.m, pt.n, pt.snr, pt.p) != nullptr) {
                pending[pi][a] = 0;
            }
        }
    }

    std::vector<std::size_t> work;
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        for (std::size_t a = 0; a < n_algo; ++a) {
            if (pending[pi][a]) {
                work.push_back(pi);
                break;
            }
        }
    }

    // cells[work index][trial][algo]
    std::vector<std::vector<std::vector<Cell>>> cells(
        work.size(), std::vector<std::vector<Cell>>(trials, std::vector<Cell>(n_algo)));
    std::atomic<std::size_t> next{0};
    const std::size_t total = work.size() * trials;
    auto worker = [&]() {
        for (std::size_t item = next.fetch_add(1); item < total; item = next.fetch_add(1)) {
            const std::size_t w = item / trials;
            const std::size_t t = item % trials;
            const Point& pt = points[work[w]];
            auto& row = cells[w][t];
            std::optional<TrialInstance> inst;
            std::string draw_error;
            try {
                inst = draw_trial(cfg, pt.m, pt.n, pt.snr, pt.p, static_cast<int>(t));
            } catch (const std::exception& e) {
                draw_error = e.what();
            }
            for (std::size_t a = 0; a < n_algo; ++a) {
                if (!pending[work[w]][a]) {
                    continue;
                }
                if (!inst) {
                    row[a].error = draw_error;
                    continue;
                }
                try {
                    row[a].outcome = run_algorithm(cfg.algorithms[a], cfg, *inst);
                } catch (const std::exception& e) {
                    row[a].error = e.what();
                }
            }
        }
    };
    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    ResultTable table;
    std::string failure;
    std::size_t w = 0;
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        const Point& pt = points[pi];
        const bool computed = w < work.size() && work[w] == pi;
        for (std::size_t a = 0; a < n_algo; ++a) {
            const auto& algo = cfg.algorithms[a];
            if (!pending[pi][a]) {
                table.rows.push_back(*previous.find(algo.label, pt.m, pt.n, pt.snr, pt.p));
                continue;
            }
            std::vector<double> nmse;
            std::vector<double> iters;
            std::vector<double> wall;
            int failed = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                const Cell& c = cells[w][t][a];
                if (c.outcome) {
                    nmse.push_back(c.outcome->nmse);
                    iters.push_back(c.outcome->iterations);
                    wall.push_back(c.outcome->walltime_ms);
                } else {
                    ++failed;
                    if (log.is_open()) {
                        log << "  failure " << algo.label << ' ' << size_label(pt.m, pt.n) << " snr="
                            << format_double(pt.snr) << " p=" << format_double(pt.p) << " trial=" << t
                            << ": " << c.error << '\n';
                    }
                }
            }
            ResultRow row;
            row.algorithm = algo.label;
            row.size_m = pt.m;
            row.size_n = pt.n;
            row.q = cfg.q_rule.resolve(pt.m * pt.n);
            row.snr_db = pt.snr;
            row.p = pt.p;
            row.trials = static_cast<int>(nmse.size());
            if (!nmse.empty()) {
                const double count = static_cast<double>(nmse.size());
                row.nmse_mean = pairwise_sum(nmse.data(), nmse.size()) / count;
                std::vector<double> sq(nmse.size());
                for (std::size_t k = 0; k < nmse.size(); ++k) {
                    sq[k] = (nmse[k] - row.nmse_mean) * (nmse[k] - row.nmse_mean);
                }
                row.nmse_std = nmse.size() > 1 ? std::sqrt(pairwise_sum(sq.data(), sq.size()) / (count - 1.0)) : 0.0;
                row.iters_mean = pairwise_sum(iters.data(), iters.size()) / count;
                row.walltime_ms = options.record_walltime ? pairwise_sum(wall.data(), wall.size()) / count : 0.0;
            }
            table.rows.push_back(row);
            if (log.is_open()) {
                log << "point " << algo.label << ' ' << size_label(pt.m, pt.n) << " snr=" << format_double(pt.snr)
                    << " p=" << format_double(pt.p) << " trials=" << row.trials << " failed=" << failed
                    << " nmse_mean=" << format_double(row.nmse_mean) << '\n';
            }
            if (static_cast<double>(failed) > options.failure_cap * static_cast<double>(trials) &&
                failure.empty()) {
                failure = algo.label + " at " + size_label(pt.m, pt.n) + " snr=" + format_double(pt.snr) +
                          " p=" + format_double(pt.p) + ": " + std::to_string(failed) + " of " +
                          std::to_string(trials) + " trials failed";
            }
        }
        if (computed) {
            ++w;
        }
    }

    if (options.write_outputs) {
        {
            std::ofstream csv(out_dir / "results.csv", std::ios::trunc);
            write_results_csv(csv, table);
        }
        write_plot(out_dir / ("plot_" + cfg.name + ".svg"), cfg, table);
        log << (failure.empty() ? "done\n" : "failed: " + failure + "\n");
    }
    if (!failure.empty()) {
        throw std::runtime_error("failure cap exceeded: " + failure);
    }
    return table;
}

}  // namespace beamscampi
