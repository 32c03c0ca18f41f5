// SPDX-License-Identifier: Apache-2.0
#include "beamscampi/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace beamscampi {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) {
            parts.push_back(item);
        }
    }
    return parts;
}

double to_double(const std::string& s, const std::string& context) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) {
        throw std::invalid_argument(context + ": expected a number, got '" + s + "'");
    }
    return value;
}

long long to_integer(const std::string& s, const std::string& context) {
    std::size_t used = 0;
    long long value = 0;
    try {
        value = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) {
        throw std::invalid_argument(context + ": expected an integer, got '" + s + "'");
    }
    return value;
}

std::vector<double> parse_grid(const std::string& value, const std::string& context) {
    if (value.rfind("range:", 0) == 0) {
        const auto parts = split(value.substr(6), ':');
        if (parts.size() != 3) {
            throw std::invalid_argument(context + ": range needs start:stop:step");
        }
        const double start = to_double(parts[0], context);
        const double stop = to_double(parts[1], context);
        const double step = to_double(parts[2], context);
        if (!(step > 0.0) || stop < start) {
            throw std::invalid_argument(context + ": range needs step > 0 and stop >= start");
        }
        std::vector<double> grid;
        const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
        for (long long k = 0; k <= count; ++k) {
            grid.push_back(start + static_cast<double>(k) * step);
        }
        return grid;
    }
    std::vector<double> grid;
    for (const auto& item : split(value, ',')) {
        grid.push_back(to_double(item, context));
    }
    return grid;
}

}  // namespace

int QRule::resolve(int mn) const {
    int q = 0;
    switch (kind) {
        case Kind::half:
            q = mn / 2;
            break;
        case Kind::ratio:
            q = static_cast<int>(std::floor(value * mn));
            break;
        case Kind::count:
            q = static_cast<int>(value);
            break;
    }
    return std::clamp(q, 1, mn);
}

std::string QRule::to_string() const {
    std::ostringstream ss;
    switch (kind) {
        case Kind::half:
            return "half";
        case Kind::ratio:
            ss << "ratio:" << value;
            return ss.str();
        case Kind::count:
            ss << "count:" << static_cast<long long>(value);
            return ss.str();
    }
    return "half";
}

QRule QRule::parse(const std::string& text) {
    QRule rule;
    const std::string t = trim(text);
    if (t == "half") {
        return rule;
    }
    if (t.rfind("ratio:", 0) == 0) {
        rule.kind = Kind::ratio;
        rule.value = to_double(t.substr(6), "q_rule");
        if (!(rule.value > 0.0 && rule.value <= 1.0)) {
            throw std::invalid_argument("q_rule: ratio must lie in (0, 1]");
        }
        return rule;
    }
    if (t.rfind("count:", 0) == 0) {
        rule.kind = Kind::count;
        rule.value = static_cast<double>(to_integer(t.substr(6), "q_rule"));
        if (rule.value < 1) {
            throw std::invalid_argument("q_rule: count must be >= 1");
        }
        return rule;
    }
    throw std::invalid_argument("q_rule: expected half, ratio:<x> or count:<n>, got '" + t + "'");
}

const std::vector<std::string>& algorithm_kinds() {
    static const std::vector<std::string> kinds = {"em_scampi", "uniform_scampi", "sd", "omp", "ls"};
    return kinds;
}

void ExperimentConfig::validate() const {
    if (sizes.empty()) {
        throw std::invalid_argument("config: sizes is empty");
    }
    for (const auto& [m, n] : sizes) {
        if (m < 1 || n < 1) {
            throw std::invalid_argument("config: array sizes must be positive");
        }
    }
    if (L < 0) {
        throw std::invalid_argument("config: L must be >= 0");
    }
    LensConfig{sizes.front().first, sizes.front().second, d_y, d_z, wavelength}.validate();
    if (snr_db.empty()) {
        throw std::invalid_argument("config: snr_db grid is empty");
    }
    if (trials < 1) {
        throw std::invalid_argument("config: trials must be >= 1");
    }
    if (p.empty()) {
        throw std::invalid_argument("config: p list is empty");
    }
    for (const double ratio : p) {
        if (!(ratio >= 0.0 && ratio < 1.0)) {
            throw std::invalid_argument("config: p values must lie in [0, 1)");
        }
    }
    if (algorithms.empty()) {
        throw std::invalid_argument("config: no algorithms listed");
    }
    std::set<std::string> labels;
    for (const auto& algo : algorithms) {
        const auto& kinds = algorithm_kinds();
        if (std::find(kinds.begin(), kinds.end(), algo.kind) == kinds.end()) {
            throw std::invalid_argument("config: unknown algorithm '" + algo.kind + "'");
        }
        if (!labels.insert(algo.label).second) {
            throw std::invalid_argument("config: duplicate algorithm label '" + algo.label + "'");
        }
        if (algo.label.find(',') != std::string::npos) {
            throw std::invalid_argument("config: algorithm labels cannot contain commas");
        }
    }
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    cfg.algorithms.clear();
    std::map<std::string, std::map<std::string, std::string>> algo_options;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        const std::string context = "config line " + std::to_string(line_no);
        if (eq == std::string::npos) {
            throw std::invalid_argument(context + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "name") {
            cfg.name = value;
        } else if (key == "sizes") {
            cfg.sizes.clear();
            for (const auto& item : split(value, ',')) {
                const auto x = item.find('x');
                if (x == std::string::npos) {
                    throw std::invalid_argument(context + ": sizes entries look like 32x32");
                }
                cfg.sizes.emplace_back(static_cast<int>(to_integer(trim(item.substr(0, x)), context)),
                                       static_cast<int>(to_integer(trim(item.substr(x + 1)), context)));
            }
        } else if (key == "L") {
            cfg.L = static_cast<int>(to_integer(value, context));
        } else if (key == "dy") {
            cfg.d_y = to_double(value, context);
        } else if (key == "dz") {
            cfg.d_z = to_double(value, context);
        } else if (key == "wavelength") {
            cfg.wavelength = to_double(value, context);
        } else if (key == "q_rule") {
            cfg.q_rule = QRule::parse(value);
        } else if (key == "snr_db") {
            cfg.snr_db = parse_grid(value, context);
        } else if (key == "trials") {
            cfg.trials = static_cast<int>(to_integer(value, context));
        } else if (key == "p") {
            cfg.p = parse_grid(value, context);
        } else if (key == "algorithms") {
            for (const auto& item : split(value, ',')) {
                AlgorithmSpec spec;
                const auto colon = item.find(':');
                if (colon == std::string::npos) {
                    spec.label = spec.kind = item;
                } else {
                    spec.label = trim(item.substr(0, colon));
                    spec.kind = trim(item.substr(colon + 1));
                }
                cfg.algorithms.push_back(spec);
            }
        } else if (key.rfind("algo.", 0) == 0) {
            const auto dot = key.find('.', 5);
            if (dot == std::string::npos) {
                throw std::invalid_argument(context + ": expected algo.<label>.<option>");
            }
            algo_options[key.substr(5, dot - 5)][key.substr(dot + 1)] = value;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(to_integer(value, context));
        } else if (key == "out") {
            cfg.out_dir = value;
        } else {
            throw std::invalid_argument(context + ": unknown key '" + key + "'");
        }
    }
    for (auto& spec : cfg.algorithms) {
        auto it = algo_options.find(spec.label);
        if (it != algo_options.end()) {
            spec.options = it->second;
            algo_options.erase(it);
        }
    }
    if (!algo_options.empty()) {
        throw std::invalid_argument("config: options given for unlisted algorithm '" +
                                    algo_options.begin()->first + "'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    return parse_config(in);
}

}  // namespace beamscampi
