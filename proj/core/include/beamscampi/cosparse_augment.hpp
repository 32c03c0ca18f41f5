// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "beamscampi/selection_network.hpp"
#include "beamscampi/types.hpp"

namespace beamscampi {

/// One row of D: +1 at `plus`, -1 at `minus`.
struct Edge {
    int plus = 0;
    int minus = 0;
};

/// Neighbor-difference analysis operator D = [D_h; D_v] on an M x N grid in
/// row-major vectorization. Horizontal edges (m, n) - (m, n + 1) come first,
/// then vertical edges (m, n) - (m + 1, n), each in row-major scan order.
class DifferenceOperator {
public:
    DifferenceOperator() = default;
    DifferenceOperator(int rows, int cols);

    [[nodiscard]] int grid_rows() const { return rows_; }
    [[nodiscard]] int grid_cols() const { return cols_; }
    [[nodiscard]] int size() const { return rows_ * cols_; }
    [[nodiscard]] int edge_count() const { return static_cast<int>(edges_.size()); }
    [[nodiscard]] int horizontal_count() const { return rows_ * (cols_ - 1); }
    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }

    [[nodiscard]] Vector apply(const Vector& h) const;
    [[nodiscard]] Vector apply_transpose(const Vector& d) const;
    /// Products with |D|: sums instead of differences.
    [[nodiscard]] Vector apply_abs(const Vector& h) const;
    [[nodiscard]] Vector apply_abs_transpose(const Vector& d) const;

    [[nodiscard]] Matrix dense() const;
    [[nodiscard]] Matrix dense_horizontal() const;
    [[nodiscard]] Matrix dense_vertical() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Edge> edges_;
};

DifferenceOperator build_difference_operator(int rows, int cols);

/// Coordinate triplets "row col value", zero-based, one nonzero per line,
/// preceded by a "rows cols nnz" header line.
void write_triplets(std::ostream& out, const DifferenceOperator& diff);

struct AugmentedDims {
    int q = 0;
    int mn = 0;
    int edges = 0;
    [[nodiscard]] int rows() const { return q + edges; }
    [[nodiscard]] int cols() const { return mn + edges; }
};

/// Structured operator [[W, 0], [D, -I]] with observation [r; 0].
class AugmentedSystem {
public:
    AugmentedSystem(const SelectionNetwork& net, DifferenceOperator diff, const Vector& r);

    [[nodiscard]] AugmentedDims dims() const { return dims_; }
    [[nodiscard]] const Vector& observation() const { return r_aug_; }
    [[nodiscard]] const SelectionNetwork& network() const { return *net_; }
    [[nodiscard]] const DifferenceOperator& difference() const { return diff_; }

    [[nodiscard]] Vector apply(const Vector& x) const;
    [[nodiscard]] Vector apply_transpose(const Vector& y) const;
    [[nodiscard]] Vector apply_squared(const Vector& x) const;
    [[nodiscard]] Vector apply_squared_transpose(const Vector& y) const;

    [[nodiscard]] Matrix dense() const;

private:
    const SelectionNetwork* net_;
    DifferenceOperator diff_;
    AugmentedDims dims_;
    Vector r_aug_;
};

/// The network must outlive the returned system.
AugmentedSystem augment(const SelectionNetwork& net, const DifferenceOperator& diff,
                        const Measurement& meas);

}  // namespace beamscampi
