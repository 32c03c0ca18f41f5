// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "beamscampi/types.hpp"

namespace beamscampi {

/// In-place unnormalized Walsh-Hadamard transform; size must be a power of two.
void fwht(double* data, std::size_t n);

/// Q x MN combiner made of Q rows of a row/column-permuted Sylvester Hadamard
/// matrix, scaled by 1/sqrt(MN). Entries switched off by phase-shifter
/// reduction are kept as a sorted list and handled as a sparse correction,
/// so every product costs one fast transform.
///
/// When MN is not a power of two the transform order is padded to the next
/// power of two P and each column is mapped to a distinct column of the
/// P x P Hadamard matrix.
class SelectionNetwork {
public:
    SelectionNetwork() = default;
    SelectionNetwork(int q, int mn, std::uint64_t seed);

    [[nodiscard]] int rows() const { return q_; }
    [[nodiscard]] int cols() const { return mn_; }
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] double scale() const { return scale_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] double reduction_ratio() const { return ratio_; }
    [[nodiscard]] std::uint64_t reduction_seed() const { return reduction_seed_; }

    /// Unscaled entry in {0, +1, -1}.
    [[nodiscard]] int entry(int q, int j) const;
    [[nodiscard]] bool connected(int q, int j) const;
    [[nodiscard]] std::size_t disconnected_count() const { return off_.size(); }
    /// Linear indices q * MN + j of disconnected entries, ascending.
    [[nodiscard]] const std::vector<std::int64_t>& disconnected() const { return off_; }

    [[nodiscard]] Vector apply(const Vector& x) const;
    [[nodiscard]] Vector apply_transpose(const Vector& y) const;
    /// Products with the elementwise square of W, whose entries are mask / MN.
    [[nodiscard]] Vector apply_squared(const Vector& x) const;
    [[nodiscard]] Vector apply_squared_transpose(const Vector& y) const;

    /// Scaled dense materialization; for tests and small exports only.
    [[nodiscard]] Matrix dense() const;

    [[nodiscard]] const std::vector<int>& row_selection() const { return row_sel_; }
    [[nodiscard]] const std::vector<int>& column_map() const { return col_map_; }

private:
    friend SelectionNetwork reduce_phase_shifters(const SelectionNetwork&, double, std::uint64_t);

    int q_ = 0;
    int mn_ = 0;
    int order_ = 0;
    double scale_ = 0.0;
    std::uint64_t seed_ = 0;
    double ratio_ = 0.0;
    std::uint64_t reduction_seed_ = 0;
    std::vector<int> row_sel_;
    std::vector<int> col_map_;
    std::vector<std::int64_t> off_;
    // off_ regrouped by row: entries off_row_[q] .. off_row_[q + 1] of
    // off_col_ and off_weight_ (scaled signed entry) belong to row q.
    std::vector<std::int64_t> off_row_;
    std::vector<int> off_col_;
    std::vector<double> off_weight_;
};

/// Throws std::invalid_argument unless 1 <= Q <= MN.
SelectionNetwork build_hadamard_selection(int q, int mn, std::uint64_t seed);

/// Switches off exactly floor(p * Q * MN) uniformly chosen connected entries.
/// Reduction always starts from the fully connected network of `net`.
SelectionNetwork reduce_phase_shifters(const SelectionNetwork& net, double p, std::uint64_t seed);

struct Measurement {
    Vector r;
    double Delta = 0.0;
    double snr_db = 0.0;
};

/// r = W h + n with n ~ N(0, Delta I) and Delta = ||W h||^2 / (Q 10^(snr/10)).
/// An infinite SNR gives Delta = 0. Throws std::invalid_argument for a zero
/// signal at finite SNR.
Measurement measure(const SelectionNetwork& net, const Vector& h, double snr_db, Rng& rng);

/// Parameters that regenerate a network bit-exactly.
struct NetworkDescriptor {
    std::uint64_t seed = 0;
    int q = 0;
    int mn = 0;
    double p = 0.0;
    std::uint64_t reduction_seed = 0;
};

NetworkDescriptor describe(const SelectionNetwork& net);
SelectionNetwork regenerate(const NetworkDescriptor& desc);

/// Descriptor text format, one `key=value` per line:
/// seed, q, mn, p (17 significant digits), reduction_seed.
void write_descriptor(std::ostream& out, const NetworkDescriptor& desc);
NetworkDescriptor read_descriptor(std::istream& in);

/// Unscaled entries in {0, 1, -1}, one row of W per line.
void write_network_csv(std::ostream& out, const SelectionNetwork& net);

}  // namespace beamscampi
