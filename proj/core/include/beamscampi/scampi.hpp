// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "beamscampi/cosparse_augment.hpp"
#include "beamscampi/report.hpp"
#include "beamscampi/scalar_estimators.hpp"

namespace beamscampi {

enum class PriorKind {
    uniform,             // flat prior on the channel entries
    bernoulli_gaussian,  // sparse Gaussian prior learned by EM
    fixed_bg,            // sparse Gaussian prior with given parameters
};

struct ScampiOptions {
    int t_max = 300;
    double eps = 1e-20;
    double alpha_damp = 0.5;  // noise-variance damping
    double beta_damp = 0.5;   // message damping
    PriorKind prior_kind = PriorKind::uniform;
    double omega = 0.0;

    bool learn_noise = true;
    // Replace per-row noise targets by their mean over the measurement rows,
    // the difference rows, or both blocks.
    enum class Pooling { none, measurement, difference, both };
    Pooling noise_pooling = Pooling::none;
    double fixed_delta = 0.1;         // measurement-row variance when not learning
    std::optional<double> fixed_upsilon;  // difference-row variance; defaults to fixed_delta

    SparseGaussianPrior fixed_prior;  // used by PriorKind::fixed_bg

    // EM schedule. For the first `em_warmup` sweeps the channel entries use
    // the flat prior; the sparse prior is then initialized with rate
    // `em_init_lambda`, zero mean and variance matched to the current
    // estimate, and refreshed before every following sweep.
    int em_warmup = 120;
    double em_init_lambda = 0.99;
    std::optional<SparseGaussianPrior> em_initial_prior;

    double retry_damping = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ScampiState {
    Vector a;            // MN + |E| posterior means
    Vector v;            // MN + |E| posterior variances
    Vector Theta;        // Q + |E|
    Vector Phi;          // Q + |E|
    Vector R;            // MN + |E| pseudo-measurements
    Vector Sigma;        // MN + |E| pseudo-measurement variances
    Vector Delta_check;  // Q + |E| learned noise variances
    SparseGaussianPrior prior;
    bool prior_active = false;  // channel entries use `prior` instead of the flat prior
    int t = 0;
    std::vector<double> tau_trace;
};

/// Raised when a sweep produces a non-finite value; `line` is the step of the
/// iteration (3..14) where it first appeared.
class ScampiDivergence : public std::runtime_error {
public:
    ScampiDivergence(int line, const std::string& what);
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

/// a = 0, v = 0.1, Theta = MN / (10 Q), Phi = 0, Delta_check = 0.1.
ScampiState init_state(const AugmentedSystem& sys, const ScampiOptions& opts);

/// Nonnegative root of D^2 - delta^2 D - delta^2 s = 0.
double bethe_noise_update(double delta, double s);

/// One sweep of the damped AMP iteration (steps 3 to 14). On failure the
/// state is left untouched and ScampiDivergence is thrown.
void scampi_iterate(ScampiState& state, const AugmentedSystem& sys, const ScampiOptions& opts);

/// EM refresh of state.prior from the pseudo-measurements of the previous
/// sweep. Returns false when the update carried no information.
bool em_refresh(ScampiState& state, const AugmentedSystem& sys);

/// Runs until tau <= eps or t_max sweeps. `trace`, when given, receives CSV
/// rows t,tau,delta_mean,upsilon_mean,lambda,a,v, plus nmse when `truth` is given.
EstimationReport run_scampi(const AugmentedSystem& sys, const ScampiOptions& opts,
                            const Vector* truth = nullptr, std::ostream* trace = nullptr);

/// EM-learning variant; requires prior_kind == bernoulli_gaussian.
EstimationReport run_em_scampi(const AugmentedSystem& sys, const ScampiOptions& opts,
                               const Vector* truth = nullptr, std::ostream* trace = nullptr);

}  // namespace beamscampi
