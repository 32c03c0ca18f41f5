// SPDX-License-Identifier: Apache-2.0
#include "beamscampi/baselines.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace beamscampi {

Matrix restricted_columns(const SelectionNetwork& net, const std::vector<int>& indices) {
    Matrix A(net.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const int j = indices[k];
        if (j < 0 || j >= net.cols()) {
            throw std::out_of_range("restricted_columns: index " + std::to_string(j) + " out of range");
        }
        for (int q = 0; q < net.rows(); ++q) {
            A(q, static_cast<Eigen::Index>(k)) = net.scale() * net.entry(q, j);
        }
    }
    return A;
}

namespace {

struct Fit {
    Vector coef;
    bool regularized = false;
};

Fit solve_least_squares(const Matrix& A, const Vector& r) {
    Fit fit;
    if (A.cols() == 0) {
        fit.coef = Vector::Zero(0);
        return fit;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    fit.coef = cod.solve(r);
    fit.regularized = cod.rank() < A.cols();
    return fit;
}

}  // namespace

LeastSquaresResult ls_estimate(const Measurement& meas, const SelectionNetwork& net,
                               const std::optional<SupportSet>& support) {
    if (meas.r.size() != net.rows()) {
        throw std::invalid_argument("ls_estimate: measurement length does not match Q");
    }
    std::vector<int> indices;
    if (support) {
        indices = support->indices;
    } else {
        indices.resize(static_cast<std::size_t>(net.cols()));
        std::iota(indices.begin(), indices.end(), 0);
    }
    LeastSquaresResult out;
    out.h = Vector::Zero(net.cols());
    const Fit fit = solve_least_squares(restricted_columns(net, indices), meas.r);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.h[indices[k]] = fit.coef[static_cast<Eigen::Index>(k)];
    }
    out.regularized = fit.regularized;
    return out;
}

namespace {

int block_start(int center, int size, int extent) {
    if (size >= extent) {
        return 0;
    }
    return std::clamp(center - (size - 1) / 2, 0, extent - size);
}

int argmax_abs(const Vector& c, const std::vector<char>& excluded) {
    int best = -1;
    double best_value = -1.0;
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        if (excluded[j]) {
            continue;
        }
        const double value = std::abs(c[j]);
        if (value > best_value) {
            best_value = value;
            best = static_cast<int>(j);
        }
    }
    return best;
}

}  // namespace

SdResult sd_estimate(const Measurement& meas, const SelectionNetwork& net, int grid_rows, int grid_cols,
                     int path_count_minus_one, int square) {
    if (square < 1) {
        throw std::invalid_argument("sd_estimate: square must be >= 1");
    }
    if (path_count_minus_one < 0) {
        throw std::invalid_argument("sd_estimate: L must be >= 0");
    }
    if (grid_rows * grid_cols != net.cols()) {
        throw std::invalid_argument("sd_estimate: grid does not match the network width");
    }
    const int mn = net.cols();
    SdResult out;
    std::vector<char> in_support(static_cast<std::size_t>(mn), 0);
    Vector residual = meas.r;
    bool regularized = false;

    for (int l = 0; l <= path_count_minus_one; ++l) {
        const int peak = argmax_abs(net.apply_transpose(residual), in_support);
        if (peak < 0) {
            break;
        }
        const int row0 = block_start(peak / grid_cols, square, grid_rows);
        const int col0 = block_start(peak % grid_cols, square, grid_cols);
        std::vector<int> block;
        for (int m = row0; m < std::min(row0 + square, grid_rows); ++m) {
            for (int n = col0; n < std::min(col0 + square, grid_cols); ++n) {
                const int j = m * grid_cols + n;
                if (!in_support[j]) {
                    block.push_back(j);
                    in_support[j] = 1;
                }
            }
        }
        out.support.per_path_squares.push_back({peak, square});
        const Matrix A = restricted_columns(net, block);
        const Fit fit = solve_least_squares(A, residual);
        regularized = regularized || fit.regularized;
        residual -= A * fit.coef;
    }

    for (int j = 0; j < mn; ++j) {
        if (in_support[j]) {
            out.support.indices.push_back(j);
        }
    }
    const LeastSquaresResult ls = ls_estimate(meas, net, out.support);
    out.report.h_est = ls.h;
    out.report.iterations = path_count_minus_one + 1;
    out.report.converged = true;
    out.report.degenerate = regularized || ls.regularized;
    return out;
}

EstimationReport omp_estimate(const Measurement& meas, const SelectionNetwork& net, int sparsity) {
    if (sparsity < 0 || sparsity > net.rows()) {
        throw std::invalid_argument("omp_estimate: need 0 <= K <= Q");
    }
    EstimationReport report;
    report.h_est = Vector::Zero(net.cols());
    report.converged = true;
    if (sparsity == 0) {
        return report;
    }
    std::vector<char> chosen(static_cast<std::size_t>(net.cols()), 0);
    std::vector<int> atoms;
    Matrix A(net.rows(), 0);
    Vector coef;
    Vector residual = meas.r;
    for (int k = 0; k < sparsity; ++k) {
        const int j = argmax_abs(net.apply_transpose(residual), chosen);
        if (j < 0) {
            break;
        }
        chosen[j] = 1;
        atoms.push_back(j);
        A.conservativeResize(Eigen::NoChange, A.cols() + 1);
        A.col(A.cols() - 1) = restricted_columns(net, {j}).col(0);
        const Fit fit = solve_least_squares(A, meas.r);
        report.degenerate = report.degenerate || fit.regularized;
        coef = fit.coef;
        residual = meas.r - A * coef;
        report.iterations = k + 1;
        if (residual.squaredNorm() == 0.0) {
            break;
        }
    }
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        report.h_est[atoms[k]] = coef[static_cast<Eigen::Index>(k)];
    }
    return report;
}

}  // namespace beamscampi
