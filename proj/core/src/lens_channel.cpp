// SPDX-License-Identifier: Apache-2.0
#include "beamscampi/lens_channel.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace beamscampi {

double LensConfig::aperture() const {
    const double length = d_y * wavelength;
    const double height = d_z * wavelength;
    return wavelength * wavelength / (length * height);
}

void LensConfig::validate() const {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("LensConfig: array dimensions must be >= 1");
    }
    if (!(d_y > 0.0) || !(d_z > 0.0)) {
        throw std::invalid_argument("LensConfig: lens dimensions must be positive");
    }
    if (!(wavelength > 0.0)) {
        throw std::invalid_argument("LensConfig: wavelength must be positive");
    }
}

int LensConfig::critical_dimension(double d) {
    return 1 + static_cast<int>(std::floor(2.0 * d));
}

double grid_coordinate(int index, int extent) {
    return static_cast<double>(index) - 0.5 * static_cast<double>(extent - 1);
}

double sinc(double x) {
    if (x == 0.0) {
        return 1.0;
    }
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

double array_response(GridIndex index, const PathParams& path, const LensConfig& cfg) {
    const double m = grid_coordinate(index.row, cfg.rows);
    const double n = grid_coordinate(index.col, cfg.cols);
    return std::sqrt(cfg.aperture()) * sinc(m - cfg.d_y * path.phi_y) *
           sinc(n - cfg.d_z * path.phi_z);
}

Matrix build_response_matrix(const PathParams& path, const LensConfig& cfg) {
    cfg.validate();
    // The response is separable; evaluate each sinc factor once per row/col.
    Vector row_factor(cfg.rows);
    Vector col_factor(cfg.cols);
    for (int m = 0; m < cfg.rows; ++m) {
        row_factor[m] = sinc(grid_coordinate(m, cfg.rows) - cfg.d_y * path.phi_y);
    }
    for (int n = 0; n < cfg.cols; ++n) {
        col_factor[n] = sinc(grid_coordinate(n, cfg.cols) - cfg.d_z * path.phi_z);
    }
    Matrix A = std::sqrt(cfg.aperture()) * row_factor * col_factor.transpose();
    return A;
}

Matrix channel_matrix(const std::vector<PathParams>& paths, const LensConfig& cfg) {
    cfg.validate();
    Matrix H = Matrix::Zero(cfg.rows, cfg.cols);
    if (paths.empty()) {
        return H;
    }
    for (const auto& path : paths) {
        H += path.alpha * build_response_matrix(path, cfg);
    }
    H *= std::sqrt(static_cast<double>(cfg.antenna_count()) / static_cast<double>(paths.size()));
    return H;
}

ScalarSampler standard_normal_gain() {
    return [](Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); };
}

ScalarSampler uniform_direction() {
    return [](Rng& rng) { return std::uniform_real_distribution<double>(-1.0, 1.0)(rng); };
}

MultipathChannel sample_channel(Rng& rng, int path_count_minus_one, const LensConfig& cfg,
                                const ScalarSampler& gain, const ScalarSampler& angle) {
    if (path_count_minus_one < 0) {
        throw std::invalid_argument("sample_channel: L must be >= 0");
    }
    cfg.validate();
    MultipathChannel channel;
    channel.paths.reserve(static_cast<std::size_t>(path_count_minus_one) + 1);
    for (int l = 0; l <= path_count_minus_one; ++l) {
        PathParams path;
        path.alpha = gain(rng);
        path.phi_y = angle(rng);
        path.phi_z = angle(rng);
        channel.paths.push_back(path);
    }
    channel.H = channel_matrix(channel.paths, cfg);
    channel.h = vectorize(channel.H);
    return channel;
}

Vector vectorize(const Matrix& H) {
    return Eigen::Map<const Vector>(H.data(), H.size());
}

Matrix devectorize(const Vector& h, int rows, int cols) {
    if (rows < 0 || cols < 0 || h.size() != static_cast<Eigen::Index>(rows) * cols) {
        throw std::invalid_argument("devectorize: length " + std::to_string(h.size()) +
                                    " does not match " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    }
    return Eigen::Map<const Matrix>(h.data(), rows, cols);
}

void write_channel_csv(std::ostream& out, const Matrix& H) {
    const auto old_precision = out.precision(17);
    for (Eigen::Index m = 0; m < H.rows(); ++m) {
        for (Eigen::Index n = 0; n < H.cols(); ++n) {
            if (n > 0) {
                out << ',';
            }
            out << H(m, n);
        }
        out << '\n';
    }
    out.precision(old_precision);
}

Matrix read_channel_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            values.push_back(std::stod(cell));
        }
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw std::runtime_error("read_channel_csv: ragged row " + std::to_string(rows.size()));
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) {
        throw std::runtime_error("read_channel_csv: no data");
    }
    Matrix H(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t m = 0; m < rows.size(); ++m) {
        for (std::size_t n = 0; n < rows[m].size(); ++n) {
            H(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = rows[m][n];
        }
    }
    return H;
}

namespace {

constexpr std::array<char, 8> kChannelMagic = {'B', 'S', 'C', 'H', 'A', 'N', '0', '1'};

template <typename T>
void put(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.write(bytes, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    char bytes[sizeof(T)];
    if (!in.read(bytes, sizeof(T))) {
        throw std::runtime_error("read_channel_binary: truncated file");
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_channel_binary(std::ostream& out, const MultipathChannel& channel, std::uint64_t seed) {
    if (channel.paths.empty()) {
        throw std::invalid_argument("write_channel_binary: channel has no paths");
    }
    out.write(kChannelMagic.data(), kChannelMagic.size());
    put<std::int32_t>(out, static_cast<std::int32_t>(channel.H.rows()));
    put<std::int32_t>(out, static_cast<std::int32_t>(channel.H.cols()));
    put<std::int32_t>(out, static_cast<std::int32_t>(channel.paths.size() - 1));
    put<std::uint64_t>(out, seed);
    for (const auto& p : channel.paths) {
        put(out, p.alpha);
        put(out, p.phi_y);
        put(out, p.phi_z);
    }
    const Vector h = vectorize(channel.H);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        put(out, h[i]);
    }
}

MultipathChannel read_channel_binary(std::istream& in, ChannelFileHeader* header) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kChannelMagic) {
        throw std::runtime_error("read_channel_binary: bad magic");
    }
    ChannelFileHeader hdr;
    hdr.rows = get<std::int32_t>(in);
    hdr.cols = get<std::int32_t>(in);
    hdr.path_count_minus_one = get<std::int32_t>(in);
    hdr.seed = get<std::uint64_t>(in);
    if (hdr.rows < 1 || hdr.cols < 1 || hdr.path_count_minus_one < 0) {
        throw std::runtime_error("read_channel_binary: invalid header");
    }
    MultipathChannel channel;
    channel.paths.resize(static_cast<std::size_t>(hdr.path_count_minus_one) + 1);
    for (auto& p : channel.paths) {
        p.alpha = get<double>(in);
        p.phi_y = get<double>(in);
        p.phi_z = get<double>(in);
    }
    channel.h.resize(static_cast<Eigen::Index>(hdr.rows) * hdr.cols);
    for (Eigen::Index i = 0; i < channel.h.size(); ++i) {
        channel.h[i] = get<double>(in);
    }
    channel.H = devectorize(channel.h, hdr.rows, hdr.cols);
    if (header != nullptr) {
        *header = hdr;
    }
    return channel;
}

}  // namespace beamscampi
