// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "beamscampi/types.hpp"

namespace beamscampi {

/// Limit spike-and-slab prior on the difference variables. With slab scale
/// sigma the slab weight is rho(sigma; omega) = sigma^2 / (sigma^2 + sqrt(Sigma) e^omega),
/// and the prior is taken in the limit sigma -> infinity.
struct SnipePrior {
    double omega = 0.0;
};

/// lambda N(a, v) + (1 - lambda) delta_0.
struct SparseGaussianPrior {
    double lambda = 0.5;
    double a = 0.0;
    double v = 1.0;
};

struct PosteriorMoments {
    double fa = 0.0;
    double fv = 0.0;
};

struct EmPosterior {
    double pi = 0.0;
    double gamma = 0.0;
    double nu = 0.0;
};

inline constexpr double kLambdaFloor = 1e-6;
inline constexpr double kVarianceFloor = 1e-12;

/// Posterior mean and variance of x given R = x + N(0, Sigma) under the SNIPE prior.
/// Throws std::domain_error for Sigma <= 0.
PosteriorMoments snipe_moments(double Sigma, double R, double omega);

/// Flat prior: (R, Sigma).
PosteriorMoments uniform_moments(double Sigma, double R);

/// Bernoulli-Gaussian posterior. lambda = 0 returns (0, 0).
/// Throws std::domain_error for Sigma <= 0, v <= 0 or lambda outside [0, 1].
PosteriorMoments bernoulli_gaussian_moments(double Sigma, double R, const SparseGaussianPrior& prior);

/// log eta, the log odds of the spike against the slab.
double bernoulli_gaussian_log_odds(double Sigma, double R, const SparseGaussianPrior& prior);

/// Slab responsibility pi, slab posterior mean gamma and variance nu.
EmPosterior em_posterior_quantities(double Sigma, double R, const SparseGaussianPrior& prior);

struct EmUpdateResult {
    SparseGaussianPrior prior;
    bool informative = true;  // false when sum(pi) == 0 and the prior was kept
};

/// Closed-form M step over the MN channel entries. lambda is clamped to
/// [kLambdaFloor, 1 - kLambdaFloor] and v floored at kVarianceFloor.
EmUpdateResult em_update(const Vector& pis, const Vector& gammas, const Vector& nus,
                         const SparseGaussianPrior& current);

}  // namespace beamscampi
