// SPDX-License-Identifier: Apache-2.0
#include "beamscampi/selection_network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace beamscampi {

void fwht(double* data, std::size_t n) {
    for (std::size_t half = 1; half < n; half <<= 1) {
        for (std::size_t block = 0; block < n; block += 2 * half) {
            double* lo = data + block;
            double* hi = lo + half;
            for (std::size_t k = 0; k < half; ++k) {
                const double a = lo[k];
                const double b = hi[k];
                lo[k] = a + b;
                hi[k] = a - b;
            }
        }
    }
}

SelectionNetwork::SelectionNetwork(int q, int mn, std::uint64_t seed)
    : q_(q), mn_(mn), seed_(seed) {
    if (mn < 1 || q < 1 || q > mn) {
        throw std::invalid_argument("SelectionNetwork: need 1 <= Q <= MN (Q=" + std::to_string(q) +
                                    ", MN=" + std::to_string(mn) + ")");
    }
    if (mn > (1 << 30)) {
        throw std::invalid_argument("SelectionNetwork: no Hadamard order available for MN=" +
                                    std::to_string(mn));
    }
    order_ = static_cast<int>(std::bit_ceil(static_cast<unsigned>(mn)));
    scale_ = 1.0 / std::sqrt(static_cast<double>(mn));

    Rng rng(mix_seed(seed));
    std::vector<int> perm(static_cast<std::size_t>(order_));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    row_sel_.assign(perm.begin(), perm.begin() + q);

    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    col_map_.assign(perm.begin(), perm.begin() + mn);
}

int SelectionNetwork::entry(int q, int j) const {
    if (!connected(q, j)) {
        return 0;
    }
    const auto bits = static_cast<unsigned>(row_sel_[q]) & static_cast<unsigned>(col_map_[j]);
    return (std::popcount(bits) & 1) ? -1 : 1;
}

bool SelectionNetwork::connected(int q, int j) const {
    const std::int64_t key = static_cast<std::int64_t>(q) * mn_ + j;
    return !std::binary_search(off_.begin(), off_.end(), key);
}

Vector SelectionNetwork::apply(const Vector& x) const {
    if (x.size() != mn_) {
        throw std::invalid_argument("SelectionNetwork::apply: expected length " + std::to_string(mn_));
    }
    std::vector<double> work(static_cast<std::size_t>(order_), 0.0);
    for (int j = 0; j < mn_; ++j) {
        work[col_map_[j]] = x[j];
    }
    fwht(work.data(), work.size());
    Vector y(q_);
    for (int q = 0; q < q_; ++q) {
        y[q] = scale_ * work[row_sel_[q]];
    }
    if (!off_.empty()) {
        for (int q = 0; q < q_; ++q) {
            for (auto k = off_row_[q]; k < off_row_[q + 1]; ++k) {
                y[q] -= off_weight_[k] * x[off_col_[k]];
            }
        }
    }
    return y;
}

Vector SelectionNetwork::apply_transpose(const Vector& y) const {
    if (y.size() != q_) {
        throw std::invalid_argument("SelectionNetwork::apply_transpose: expected length " +
                                    std::to_string(q_));
    }
    std::vector<double> work(static_cast<std::size_t>(order_), 0.0);
    for (int q = 0; q < q_; ++q) {
        work[row_sel_[q]] = y[q];
    }
    fwht(work.data(), work.size());
    Vector x(mn_);
    for (int j = 0; j < mn_; ++j) {
        x[j] = scale_ * work[col_map_[j]];
    }
    if (!off_.empty()) {
        for (int q = 0; q < q_; ++q) {
            for (auto k = off_row_[q]; k < off_row_[q + 1]; ++k) {
                x[off_col_[k]] -= off_weight_[k] * y[q];
            }
        }
    }
    return x;
}

Vector SelectionNetwork::apply_squared(const Vector& x) const {
    if (x.size() != mn_) {
        throw std::invalid_argument("SelectionNetwork::apply_squared: expected length " +
                                    std::to_string(mn_));
    }
    const double inv = 1.0 / static_cast<double>(mn_);
    Vector y = Vector::Constant(q_, x.sum());
    if (!off_.empty()) {
        for (int q = 0; q < q_; ++q) {
            for (auto k = off_row_[q]; k < off_row_[q + 1]; ++k) {
                y[q] -= x[off_col_[k]];
            }
        }
    }
    return y * inv;
}

Vector SelectionNetwork::apply_squared_transpose(const Vector& y) const {
    if (y.size() != q_) {
        throw std::invalid_argument("SelectionNetwork::apply_squared_transpose: expected length " +
                                    std::to_string(q_));
    }
    const double inv = 1.0 / static_cast<double>(mn_);
    Vector x = Vector::Constant(mn_, y.sum());
    if (!off_.empty()) {
        for (int q = 0; q < q_; ++q) {
            for (auto k = off_row_[q]; k < off_row_[q + 1]; ++k) {
                x[off_col_[k]] -= y[q];
            }
        }
    }
    return x * inv;
}

Matrix SelectionNetwork::dense() const {
    Matrix W(q_, mn_);
    for (int q = 0; q < q_; ++q) {
        for (int j = 0; j < mn_; ++j) {
            const auto bits = static_cast<unsigned>(row_sel_[q]) & static_cast<unsigned>(col_map_[j]);
            W(q, j) = scale_ * ((std::popcount(bits) & 1) ? -1.0 : 1.0);
        }
    }
    for (const auto key : off_) {
        W(key / mn_, key % mn_) = 0.0;
    }
    return W;
}

SelectionNetwork build_hadamard_selection(int q, int mn, std::uint64_t seed) {
    return SelectionNetwork(q, mn, seed);
}

SelectionNetwork reduce_phase_shifters(const SelectionNetwork& net, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw std::invalid_argument("reduce_phase_shifters: p must lie in [0, 1)");
    }
    SelectionNetwork out = net;
    out.off_.clear();
    out.off_row_.clear();
    out.off_col_.clear();
    out.off_weight_.clear();
    out.ratio_ = p;
    out.reduction_seed_ = seed;

    const std::int64_t total = static_cast<std::int64_t>(net.q_) * net.mn_;
    const auto wanted = static_cast<std::int64_t>(std::floor(p * static_cast<double>(total)));
    if (wanted == 0) {
        return out;
    }
    // Selection sampling (Knuth, TAOCP vol. 2, Algorithm S): ascending output,
    // exact count, one uniform per scanned entry.
    Rng rng(mix_seed(seed));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    out.off_.reserve(static_cast<std::size_t>(wanted));
    std::int64_t chosen = 0;
    for (std::int64_t t = 0; t < total && chosen < wanted; ++t) {
        if (static_cast<double>(total - t) * unit(rng) < static_cast<double>(wanted - chosen)) {
            out.off_.push_back(t);
            ++chosen;
        }
    }
    out.off_row_.assign(static_cast<std::size_t>(out.q_) + 1, 0);
    out.off_col_.reserve(out.off_.size());
    out.off_weight_.reserve(out.off_.size());
    for (const auto key : out.off_) {
        const int q = static_cast<int>(key / out.mn_);
        const int j = static_cast<int>(key % out.mn_);
        ++out.off_row_[static_cast<std::size_t>(q) + 1];
        out.off_col_.push_back(j);
        const auto bits = static_cast<unsigned>(out.row_sel_[q]) & static_cast<unsigned>(out.col_map_[j]);
        out.off_weight_.push_back(out.scale_ * ((std::popcount(bits) & 1) ? -1.0 : 1.0));
    }
    for (int q = 0; q < out.q_; ++q) {
        out.off_row_[q + 1] += out.off_row_[q];
    }
    return out;
}

Measurement measure(const SelectionNetwork& net, const Vector& h, double snr_db, Rng& rng) {
    if (h.size() != net.cols()) {
        throw std::invalid_argument("measure: channel length " + std::to_string(h.size()) +
                                    " does not match MN=" + std::to_string(net.cols()));
    }
    Measurement meas;
    meas.snr_db = snr_db;
    const Vector clean = net.apply(h);
    const double power = clean.squaredNorm();
    if (std::isinf(snr_db) && snr_db > 0) {
        meas.Delta = 0.0;
    } else {
        if (!(power > 0.0)) {
            throw std::invalid_argument("measure: zero signal cannot reach a finite SNR");
        }
        meas.Delta = power / (static_cast<double>(net.rows()) * std::pow(10.0, snr_db / 10.0));
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(meas.Delta);
    meas.r.resize(clean.size());
    for (Eigen::Index i = 0; i < clean.size(); ++i) {
        meas.r[i] = clean[i] + sd * normal(rng);
    }
    return meas;
}

NetworkDescriptor describe(const SelectionNetwork& net) {
    return {net.seed(), net.rows(), net.cols(), net.reduction_ratio(), net.reduction_seed()};
}

SelectionNetwork regenerate(const NetworkDescriptor& desc) {
    auto net = build_hadamard_selection(desc.q, desc.mn, desc.seed);
    if (desc.p > 0.0) {
        net = reduce_phase_shifters(net, desc.p, desc.reduction_seed);
    }
    return net;
}

void write_descriptor(std::ostream& out, const NetworkDescriptor& desc) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "seed=" << desc.seed << '\n'
       << "q=" << desc.q << '\n'
       << "mn=" << desc.mn << '\n'
       << "p=" << desc.p << '\n'
       << "reduction_seed=" << desc.reduction_seed << '\n';
    out << ss.str();
}

NetworkDescriptor read_descriptor(std::istream& in) {
    NetworkDescriptor desc;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "seed") {
            desc.seed = std::stoull(value);
        } else if (key == "q") {
            desc.q = std::stoi(value);
        } else if (key == "mn") {
            desc.mn = std::stoi(value);
        } else if (key == "p") {
            desc.p = std::stod(value);
        } else if (key == "reduction_seed") {
            desc.reduction_seed = std::stoull(value);
        } else {
            throw std::runtime_error("read_descriptor: unknown key '" + key + "'");
        }
    }
    return desc;
}

void write_network_csv(std::ostream& out, const SelectionNetwork& net) {
    for (int q = 0; q < net.rows(); ++q) {
        for (int j = 0; j < net.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << net.entry(q, j);
        }
        out << '\n';
    }
}

}  // namespace beamscampi
