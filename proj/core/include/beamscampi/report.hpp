// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "beamscampi/scalar_estimators.hpp"
#include "beamscampi/types.hpp"

namespace beamscampi {

/// ||h_est - h||^2 / ||h||^2. Throws std::invalid_argument on length mismatch
/// or a zero-norm truth.
inline double compute_nmse(const Vector& h_est, const Vector& h_true) {
    if (h_est.size() != h_true.size()) {
        throw std::invalid_argument("compute_nmse: length mismatch");
    }
    const double energy = h_true.squaredNorm();
    if (!(energy > 0.0)) {
        throw std::invalid_argument("compute_nmse: truth has zero norm");
    }
    return (h_est - h_true).squaredNorm() / energy;
}

struct NoiseSummary {
    double delta_mean = 0.0;    // mean learned variance over the measurement rows
    double upsilon_mean = 0.0;  // mean learned variance over the difference rows
};

struct EstimationReport {
    Vector h_est;
    Vector d_est;
    int iterations = 0;
    bool converged = false;
    std::optional<double> nmse;
    std::vector<double> tau_trace;
    std::optional<SparseGaussianPrior> learned_prior;
    std::vector<SparseGaussianPrior> prior_trace;
    NoiseSummary learned_noise_summary;
    int retries = 0;           // sweeps repeated with heavier damping
    bool degenerate = false;   // EM had no informative support, or a solve was regularized
};

}  // namespace beamscampi
