// SPDX-License-Identifier: Apache-2.0
// Numerical posterior moments of x given R = x + N(0, Sigma) for the three
// channel/difference priors, computed by adaptive Gauss-Kronrod quadrature.
// Used as an independent reference for the closed-form estimators.
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

// Moments of the density proportional to exp(log_f(x)), which is unimodal
// with standard deviation at most `width`. Returns also log of the normalizer.
struct Continuous {
    double log_z = 0.0;
    double mean = 0.0;
    double var = 0.0;
};

inline Continuous integrate_unimodal(const std::function<double(double)>& log_f, double guess, double width) {
    using boost::math::quadrature::gauss_kronrod;
    const double lo = guess - 50.0 * width;
    const double hi = guess + 50.0 * width;
    const auto peak = boost::math::tools::brent_find_minima([&](double x) { return -log_f(x); }, lo, hi, 52);
    const double x0 = peak.first;
    const double lf0 = log_f(x0);
    const double w = 40.0 * width;

    auto integrate = [&](const std::function<double(double)>& g) {
        double err = 0.0;
        const double left = gauss_kronrod<double, 61>::integrate(g, x0 - w, x0, 12, 1e-12, &err);
        const double right = gauss_kronrod<double, 61>::integrate(g, x0, x0 + w, 12, 1e-12, &err);
        return left + right;
    };

    const double z = integrate([&](double x) { return std::exp(log_f(x) - lf0); });
    const double shift = integrate([&](double x) { return (x - x0) * std::exp(log_f(x) - lf0); }) / z;
    const double mean = x0 + shift;
    const double var =
        integrate([&](double x) { return (x - mean) * (x - mean) * std::exp(log_f(x) - lf0); }) / z;
    return {std::log(z) + lf0, mean, var};
}

inline double log_normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
}

// Mixture of a point mass at zero with weight exp(log_w0) and a continuous
// component; the point mass is handled exactly.
inline Moments mix_with_spike(double log_w0, const Continuous& slab) {
    const double slab_weight = 1.0 / (1.0 + std::exp(log_w0 - slab.log_z));
    const double spike_weight = 1.0 / (1.0 + std::exp(slab.log_z - log_w0));
    return {slab_weight * slab.mean,
            slab_weight * slab.var + slab_weight * spike_weight * slab.mean * slab.mean};
}

inline Moments flat(double Sigma, double R) {
    const Continuous c = integrate_unimodal([&](double x) { return log_normal_pdf(R, x, Sigma); }, R,
                                            std::sqrt(Sigma));
    return {c.mean, c.var};
}

inline Moments bernoulli_gaussian(double Sigma, double R, double lambda, double a, double v) {
    const Continuous slab = integrate_unimodal(
        [&](double x) { return std::log(lambda) + log_normal_pdf(x, a, v) + log_normal_pdf(R, x, Sigma); },
        (a * Sigma + R * v) / (Sigma + v), std::sqrt(std::min(v, Sigma)));
    const double log_w0 = std::log1p(-lambda) + log_normal_pdf(R, 0.0, Sigma);
    return mix_with_spike(log_w0, slab);
}

// Spike-and-slab with a zero-mean slab of standard deviation `scale` and slab
// weight scale / (scale + sqrt(Sigma) e^omega). Its moments converge to the
// limit prior as scale grows, with corrections of order Sigma / scale^2.
inline Moments spike_and_slab(double Sigma, double R, double omega, double scale) {
    const double slab_var = scale * scale;
    const double log_rho = std::log(scale) - std::log(scale + std::sqrt(Sigma) * std::exp(omega));
    const double log_one_minus_rho =
        std::log(std::sqrt(Sigma)) + omega - std::log(scale + std::sqrt(Sigma) * std::exp(omega));
    const Continuous slab = integrate_unimodal(
        [&](double x) { return log_rho + log_normal_pdf(x, 0.0, slab_var) + log_normal_pdf(R, x, Sigma); },
        R * slab_var / (slab_var + Sigma), std::sqrt(Sigma));
    return mix_with_spike(log_one_minus_rho + log_normal_pdf(R, 0.0, Sigma), slab);
}

inline Moments snipe_limit(double Sigma, double R, double omega) {
    const double scale = 1e8 * std::max({1.0, std::sqrt(Sigma), std::abs(R)});
    return spike_and_slab(Sigma, R, omega, scale);
}

}  // namespace oracle
