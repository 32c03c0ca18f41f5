// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "beamscampi/types.hpp"

namespace beamscampi {

/// Geometry of a 3D lens antenna array.
///
/// The array is an M x N grid of antennas on the focal surface of an EM lens
/// of electrical length `d_y` and height `d_z` (both in wavelengths).
struct LensConfig {
    int rows = 32;           // M
    int cols = 32;           // N
    double d_y = 12.0;       // lens length in wavelengths
    double d_z = 12.0;       // lens height in wavelengths
    double wavelength = 1.0;

    /// Aperture constant A = wavelength^2 / (D_y * D_z) with D = d * wavelength.
    [[nodiscard]] double aperture() const;
    [[nodiscard]] int antenna_count() const { return rows * cols; }

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    /// Array dimension that exactly covers a lens of `d` wavelengths: 1 + floor(2d).
    static int critical_dimension(double d);
};

struct PathParams {
    double alpha = 0.0;   // real path gain
    double phi_y = 0.0;   // sin of azimuth AoA, in [-1, 1]
    double phi_z = 0.0;   // sin of elevation AoA, in [-1, 1]
};

struct GridIndex {
    int row = 0;
    int col = 0;
};

struct MultipathChannel {
    std::vector<PathParams> paths;
    Matrix H;
    Vector h;
};

/// Grid coordinate of antenna row/col `index` in an array of `extent`
/// antennas: index - (extent - 1) / 2. Half-integers for even extents.
double grid_coordinate(int index, int extent);

/// sin(pi x) / (pi x) with sinc(0) = 1.
double sinc(double x);

/// Sampled lens response sqrt(A) sinc(m - D_y phi_y) sinc(n - D_z phi_z).
double array_response(GridIndex index, const PathParams& path, const LensConfig& cfg);

Matrix build_response_matrix(const PathParams& path, const LensConfig& cfg);

/// Superposition sqrt(MN / (L + 1)) * sum_l alpha_l A_l over the given paths.
Matrix channel_matrix(const std::vector<PathParams>& paths, const LensConfig& cfg);

using ScalarSampler = std::function<double(Rng&)>;

ScalarSampler standard_normal_gain();
ScalarSampler uniform_direction();

/// Draws L + 1 i.i.d. paths (gain first, then phi_y, phi_z per path).
MultipathChannel sample_channel(Rng& rng, int path_count_minus_one, const LensConfig& cfg,
                                const ScalarSampler& gain = standard_normal_gain(),
                                const ScalarSampler& angle = uniform_direction());

/// Row-by-row vectorization: h[m * N + n] = H(m, n).
Vector vectorize(const Matrix& H);
Matrix devectorize(const Vector& h, int rows, int cols);

// Channel interchange formats.
//
// CSV: one line per row of H, comma separated, written with 17 significant
// digits so values round-trip exactly.
//
// Binary container (little endian):
//   bytes 0..7   magic "BSCHAN01"
//   int32        M
//   int32        N
//   int32        L (number of paths minus one)
//   uint64       seed
//   (L + 1) x 3  float64 path records {alpha, phi_y, phi_z}
//   M * N        float64 entries of h in vectorized order
struct ChannelFileHeader {
    std::int32_t rows = 0;
    std::int32_t cols = 0;
    std::int32_t path_count_minus_one = 0;
    std::uint64_t seed = 0;
};

void write_channel_csv(std::ostream& out, const Matrix& H);
Matrix read_channel_csv(std::istream& in);

void write_channel_binary(std::ostream& out, const MultipathChannel& channel, std::uint64_t seed);
MultipathChannel read_channel_binary(std::istream& in, ChannelFileHeader* header = nullptr);

}  // namespace beamscampi
