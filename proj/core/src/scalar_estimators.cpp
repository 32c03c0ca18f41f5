// SPDX-License-Identifier: Apache-2.0
#include "beamscampi/scalar_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace beamscampi {

namespace {

void require_positive(double value, const char* what) {
    if (!(value > 0.0)) {
        throw std::domain_error(std::string(what) + " must be positive, got " + std::to_string(value));
    }
}

void require_prior(const SparseGaussianPrior& prior) {
    if (!(prior.lambda >= 0.0 && prior.lambda <= 1.0)) {
        throw std::domain_error("sparsity rate must lie in [0, 1], got " + std::to_string(prior.lambda));
    }
    require_positive(prior.v, "prior variance");
}

// 1 / (1 + e^x) without overflow.
double logistic_complement(double x) {
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

}  // namespace

PosteriorMoments snipe_moments(double Sigma, double R, double omega) {
    require_positive(Sigma, "Sigma");
    const double z = R * R / (2.0 * Sigma) - omega;
    const double gate = logistic_complement(-z);   // 1 / (1 + e^{omega - R^2/2Sigma})
    const double closed = logistic_complement(z);  // 1 / (1 + e^{R^2/2Sigma - omega})
    return {R * gate, gate * (Sigma + R * R * closed)};
}

PosteriorMoments uniform_moments(double Sigma, double R) {
    require_positive(Sigma, "Sigma");
    return {R, Sigma};
}

double bernoulli_gaussian_log_odds(double Sigma, double R, const SparseGaussianPrior& prior) {
    const double lambda = prior.lambda;
    const double v = prior.v;
    const double d = prior.a - R;
    return std::log1p(-lambda) - std::log(lambda) + 0.5 * std::log((v + Sigma) / Sigma) +
           d * d / (2.0 * (v + Sigma)) - R * R / (2.0 * Sigma);
}

EmPosterior em_posterior_quantities(double Sigma, double R, const SparseGaussianPrior& prior) {
    require_positive(Sigma, "Sigma");
    require_prior(prior);
    EmPosterior out;
    out.nu = 1.0 / (1.0 / prior.v + 1.0 / Sigma);
    out.gamma = out.nu * (prior.a / prior.v + R / Sigma);
    if (prior.lambda == 0.0) {
        out.pi = 0.0;
    } else if (prior.lambda == 1.0) {
        out.pi = 1.0;
    } else {
        out.pi = logistic_complement(bernoulli_gaussian_log_odds(Sigma, R, prior));
    }
    return out;
}

PosteriorMoments bernoulli_gaussian_moments(double Sigma, double R, const SparseGaussianPrior& prior) {
    const EmPosterior q = em_posterior_quantities(Sigma, R, prior);
    if (prior.lambda == 0.0) {
        return {0.0, 0.0};
    }
    const double fa = q.pi * q.gamma;
    const double fv = q.pi * q.nu + q.pi * (1.0 - q.pi) * q.gamma * q.gamma;
    return {fa, fv};
}

EmUpdateResult em_update(const Vector& pis, const Vector& gammas, const Vector& nus,
                         const SparseGaussianPrior& current) {
    if (pis.size() != gammas.size() || pis.size() != nus.size() || pis.size() == 0) {
        throw std::invalid_argument("em_update: posterior vectors must be nonempty and of equal length");
    }
    const double n = static_cast<double>(pis.size());
    const double mass = pis.sum();
    if (!(mass > 0.0)) {
        return {current, false};
    }
    SparseGaussianPrior next;
    const double lambda_raw = mass / n;
    // a and v use the unclamped rate so that they remain responsibility-weighted means.
    next.a = pis.dot(gammas) / mass;
    const double spread = (pis.array() * (nus.array() + (gammas.array() - next.a).square())).sum();
    next.v = std::max(spread / mass, kVarianceFloor);
    next.lambda = std::clamp(lambda_raw, kLambdaFloor, 1.0 - kLambdaFloor);
    return {next, true};
}

}  // namespace beamscampi
