// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "beamscampi/report.hpp"
#include "beamscampi/selection_network.hpp"

namespace beamscampi {

struct SquareRecord {
    int center = 0;  // vectorized index of the detected peak
    int size = 0;    // side length of the square
};

struct SupportSet {
    std::vector<int> indices;  // ascending, unique
    std::vector<SquareRecord> per_path_squares;
};

struct LeastSquaresResult {
    Vector h;
    bool regularized = false;  // normal matrix was rank deficient
};

/// Columns of W restricted to `indices`, as a dense Q x |indices| matrix.
Matrix restricted_columns(const SelectionNetwork& net, const std::vector<int>& indices);

/// Minimum-norm least squares of r on the columns in `support` (all columns
/// when absent); zeros elsewhere.
LeastSquaresResult ls_estimate(const Measurement& meas, const SelectionNetwork& net,
                               const std::optional<SupportSet>& support = std::nullopt);

struct SdResult {
    EstimationReport report;
    SupportSet support;
};

/// Support detection: for each of the L + 1 paths, matched-filter peak over
/// entries not yet in the support, a square x square block around it (shifted
/// to stay inside the grid), then removal of the block's fitted contribution.
/// A final least-squares fit over the union of blocks gives the estimate.
SdResult sd_estimate(const Measurement& meas, const SelectionNetwork& net, int grid_rows, int grid_cols,
                     int path_count_minus_one, int square);

/// Orthogonal matching pursuit with K atoms.
EstimationReport omp_estimate(const Measurement& meas, const SelectionNetwork& net, int sparsity);

}  // namespace beamscampi
