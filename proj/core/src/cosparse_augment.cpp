// SPDX-License-Identifier: Apache-2.0
#include "beamscampi/cosparse_augment.hpp"

#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace beamscampi {

DifferenceOperator::DifferenceOperator(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("DifferenceOperator: grid dimensions must be >= 1");
    }
    edges_.reserve(static_cast<std::size_t>(rows * (cols - 1) + cols * (rows - 1)));
    for (int m = 0; m < rows; ++m) {
        for (int n = 0; n + 1 < cols; ++n) {
            edges_.push_back({m * cols + n, m * cols + n + 1});
        }
    }
    for (int m = 0; m + 1 < rows; ++m) {
        for (int n = 0; n < cols; ++n) {
            edges_.push_back({m * cols + n, (m + 1) * cols + n});
        }
    }
}

Vector DifferenceOperator::apply(const Vector& h) const {
    if (h.size() != size()) {
        throw std::invalid_argument("DifferenceOperator::apply: expected length " +
                                    std::to_string(size()));
    }
    Vector d(edge_count());
    for (int e = 0; e < edge_count(); ++e) {
        d[e] = h[edges_[e].plus] - h[edges_[e].minus];
    }
    return d;
}

Vector DifferenceOperator::apply_transpose(const Vector& d) const {
    if (d.size() != edge_count()) {
        throw std::invalid_argument("DifferenceOperator::apply_transpose: expected length " +
                                    std::to_string(edge_count()));
    }
    Vector h = Vector::Zero(size());
    for (int e = 0; e < edge_count(); ++e) {
        h[edges_[e].plus] += d[e];
        h[edges_[e].minus] -= d[e];
    }
    return h;
}

Vector DifferenceOperator::apply_abs(const Vector& h) const {
    if (h.size() != size()) {
        throw std::invalid_argument("DifferenceOperator::apply_abs: expected length " +
                                    std::to_string(size()));
    }
    Vector d(edge_count());
    for (int e = 0; e < edge_count(); ++e) {
        d[e] = h[edges_[e].plus] + h[edges_[e].minus];
    }
    return d;
}

Vector DifferenceOperator::apply_abs_transpose(const Vector& d) const {
    if (d.size() != edge_count()) {
        throw std::invalid_argument("DifferenceOperator::apply_abs_transpose: expected length " +
                                    std::to_string(edge_count()));
    }
    Vector h = Vector::Zero(size());
    for (int e = 0; e < edge_count(); ++e) {
        h[edges_[e].plus] += d[e];
        h[edges_[e].minus] += d[e];
    }
    return h;
}

Matrix DifferenceOperator::dense() const {
    Matrix D = Matrix::Zero(edge_count(), size());
    for (int e = 0; e < edge_count(); ++e) {
        D(e, edges_[e].plus) = 1.0;
        D(e, edges_[e].minus) = -1.0;
    }
    return D;
}

Matrix DifferenceOperator::dense_horizontal() const {
    return dense().topRows(horizontal_count());
}

Matrix DifferenceOperator::dense_vertical() const {
    return dense().bottomRows(edge_count() - horizontal_count());
}

DifferenceOperator build_difference_operator(int rows, int cols) {
    return DifferenceOperator(rows, cols);
}

void write_triplets(std::ostream& out, const DifferenceOperator& diff) {
    out << diff.edge_count() << ' ' << diff.size() << ' ' << 2 * diff.edge_count() << '\n';
    for (int e = 0; e < diff.edge_count(); ++e) {
        out << e << ' ' << diff.edges()[e].plus << " 1\n";
        out << e << ' ' << diff.edges()[e].minus << " -1\n";
    }
}

AugmentedSystem::AugmentedSystem(const SelectionNetwork& net, DifferenceOperator diff, const Vector& r)
    : net_(&net), diff_(std::move(diff)) {
    if (net.cols() != diff_.size()) {
        throw std::invalid_argument("augment: network has " + std::to_string(net.cols()) +
                                    " columns but the grid has " + std::to_string(diff_.size()) +
                                    " entries");
    }
    if (r.size() != net.rows()) {
        throw std::invalid_argument("augment: measurement length " + std::to_string(r.size()) +
                                    " does not match Q=" + std::to_string(net.rows()));
    }
    dims_ = {net.rows(), net.cols(), diff_.edge_count()};
    r_aug_ = Vector::Zero(dims_.rows());
    r_aug_.head(dims_.q) = r;
}

Vector AugmentedSystem::apply(const Vector& x) const {
    if (x.size() != dims_.cols()) {
        throw std::invalid_argument("AugmentedSystem::apply: expected length " +
                                    std::to_string(dims_.cols()));
    }
    Vector y(dims_.rows());
    const Vector h = x.head(dims_.mn);
    y.head(dims_.q) = net_->apply(h);
    y.tail(dims_.edges) = diff_.apply(h) - x.tail(dims_.edges);
    return y;
}

Vector AugmentedSystem::apply_transpose(const Vector& y) const {
    if (y.size() != dims_.rows()) {
        throw std::invalid_argument("AugmentedSystem::apply_transpose: expected length " +
                                    std::to_string(dims_.rows()));
    }
    Vector x(dims_.cols());
    const Vector lower = y.tail(dims_.edges);
    x.head(dims_.mn) = net_->apply_transpose(y.head(dims_.q)) + diff_.apply_transpose(lower);
    x.tail(dims_.edges) = -lower;
    return x;
}

Vector AugmentedSystem::apply_squared(const Vector& x) const {
    if (x.size() != dims_.cols()) {
        throw std::invalid_argument("AugmentedSystem::apply_squared: expected length " +
                                    std::to_string(dims_.cols()));
    }
    Vector y(dims_.rows());
    const Vector h = x.head(dims_.mn);
    y.head(dims_.q) = net_->apply_squared(h);
    y.tail(dims_.edges) = diff_.apply_abs(h) + x.tail(dims_.edges);
    return y;
}

Vector AugmentedSystem::apply_squared_transpose(const Vector& y) const {
    if (y.size() != dims_.rows()) {
        throw std::invalid_argument("AugmentedSystem::apply_squared_transpose: expected length " +
                                    std::to_string(dims_.rows()));
    }
    Vector x(dims_.cols());
    const Vector lower = y.tail(dims_.edges);
    x.head(dims_.mn) = net_->apply_squared_transpose(y.head(dims_.q)) + diff_.apply_abs_transpose(lower);
    x.tail(dims_.edges) = lower;
    return x;
}

Matrix AugmentedSystem::dense() const {
    Matrix A = Matrix::Zero(dims_.rows(), dims_.cols());
    A.topLeftCorner(dims_.q, dims_.mn) = net_->dense();
    A.bottomLeftCorner(dims_.edges, dims_.mn) = diff_.dense();
    A.bottomRightCorner(dims_.edges, dims_.edges) = -Matrix::Identity(dims_.edges, dims_.edges);
    return A;
}

AugmentedSystem augment(const SelectionNetwork& net, const DifferenceOperator& diff,
                        const Measurement& meas) {
    return AugmentedSystem(net, diff, meas.r);
}

}  // namespace beamscampi
