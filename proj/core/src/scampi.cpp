// SPDX-License-Identifier: Apache-2.0
#include "beamscampi/scampi.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace beamscampi {

ScampiDivergence::ScampiDivergence(int line, const std::string& what)
    : std::runtime_error("SCAMPI diverged at step " + std::to_string(line) + ": " + what), line_(line) {}

void ScampiOptions::validate() const {
    if (t_max < 1) {
        throw std::invalid_argument("ScampiOptions: t_max must be >= 1");
    }
    if (!(eps > 0.0)) {
        throw std::invalid_argument("ScampiOptions: eps must be positive");
    }
    if (!(alpha_damp >= 0.0 && alpha_damp < 1.0) || !(beta_damp >= 0.0 && beta_damp < 1.0)) {
        throw std::invalid_argument("ScampiOptions: damping factors must lie in [0, 1)");
    }
    if (!(retry_damping >= 0.0 && retry_damping < 1.0)) {
        throw std::invalid_argument("ScampiOptions: retry_damping must lie in [0, 1)");
    }
    if (!std::isfinite(omega)) {
        throw std::invalid_argument("ScampiOptions: omega must be finite");
    }
    if (!learn_noise && (!(fixed_delta >= 0.0) || (fixed_upsilon && !(*fixed_upsilon >= 0.0)))) {
        throw std::invalid_argument("ScampiOptions: fixed noise variances must be nonnegative");
    }
    if (em_warmup < 0) {
        throw std::invalid_argument("ScampiOptions: em_warmup must be >= 0");
    }
    if (!(em_init_lambda > 0.0 && em_init_lambda <= 1.0)) {
        throw std::invalid_argument("ScampiOptions: em_init_lambda must lie in (0, 1]");
    }
}

ScampiState init_state(const AugmentedSystem& sys, const ScampiOptions& opts) {
    const auto dims = sys.dims();
    ScampiState s;
    s.a = Vector::Zero(dims.cols());
    s.v = Vector::Constant(dims.cols(), 0.1);
    s.Theta = Vector::Constant(dims.rows(), static_cast<double>(dims.mn) / (10.0 * dims.q));
    s.Phi = Vector::Zero(dims.rows());
    s.R = Vector::Zero(dims.cols());
    s.Sigma = Vector::Zero(dims.cols());
    s.Delta_check = Vector::Constant(dims.rows(), 0.1);
    if (!opts.learn_noise) {
        s.Delta_check.head(dims.q).setConstant(opts.fixed_delta);
        s.Delta_check.tail(dims.edges).setConstant(opts.fixed_upsilon.value_or(opts.fixed_delta));
    }
    if (opts.prior_kind == PriorKind::fixed_bg) {
        s.prior = opts.fixed_prior;
        s.prior_active = true;
    }
    return s;
}

double bethe_noise_update(double delta, double s) {
    const double d2 = delta * delta;
    return 0.5 * (d2 + std::abs(delta) * std::sqrt(d2 + 4.0 * s));
}

namespace {

void require_finite(const Vector& x, int line, const char* name) {
    if (!x.allFinite()) {
        throw ScampiDivergence(line, std::string("non-finite ") + name);
    }
}

}  // namespace

void scampi_iterate(ScampiState& state, const AugmentedSystem& sys, const ScampiOptions& opts) {
    const auto dims = sys.dims();
    const Vector& r = sys.observation();
    const double beta = opts.beta_damp;
    const double alpha = opts.alpha_damp;

    const Vector theta_new = sys.apply_squared(state.v);
    require_finite(theta_new, 3, "Theta");

    const Vector phi_new =
        sys.apply(state.a) -
        theta_new.cwiseProduct((r - state.Phi).cwiseQuotient(state.Delta_check + state.Theta));
    require_finite(phi_new, 4, "Phi");

    const Vector Phi = beta * state.Phi + (1.0 - beta) * phi_new;
    const Vector Theta = beta * state.Theta + (1.0 - beta) * theta_new;
    require_finite(Phi, 5, "damped Phi");
    require_finite(Theta, 6, "damped Theta");

    const Vector g = (state.Delta_check + Theta).cwiseInverse();
    const Vector Sigma = sys.apply_squared_transpose(g).cwiseInverse();
    require_finite(Sigma, 8, "Sigma");
    if ((Sigma.array() <= 0.0).any()) {
        throw ScampiDivergence(8, "nonpositive Sigma");
    }
    const Vector R = Sigma.cwiseProduct(sys.apply_transpose((r - Phi).cwiseProduct(g))) + state.a;
    require_finite(R, 7, "R");

    Vector a(dims.cols());
    Vector v(dims.cols());
    for (int i = 0; i < dims.mn; ++i) {
        const PosteriorMoments m = state.prior_active
                                       ? bernoulli_gaussian_moments(Sigma[i], R[i], state.prior)
                                       : uniform_moments(Sigma[i], R[i]);
        a[i] = m.fa;
        v[i] = m.fv;
    }
    for (int i = dims.mn; i < dims.cols(); ++i) {
        const PosteriorMoments m = snipe_moments(Sigma[i], R[i], opts.omega);
        a[i] = m.fa;
        v[i] = m.fv;
    }
    require_finite(a, 9, "a");
    require_finite(v, 10, "v");

    Vector Delta_check = state.Delta_check;
    if (opts.learn_noise) {
        const Vector delta = r - sys.apply(a);
        require_finite(delta, 11, "delta");
        const Vector spread = sys.apply_squared(v);
        Vector target(dims.rows());
        for (int mu = 0; mu < dims.rows(); ++mu) {
            target[mu] = bethe_noise_update(delta[mu], spread[mu]);
        }
        require_finite(target, 12, "noise target");
        using Pooling = ScampiOptions::Pooling;
        if (opts.noise_pooling == Pooling::measurement || opts.noise_pooling == Pooling::both) {
            target.head(dims.q).setConstant(target.head(dims.q).mean());
        }
        if ((opts.noise_pooling == Pooling::difference || opts.noise_pooling == Pooling::both) && dims.edges > 0) {
            target.tail(dims.edges).setConstant(target.tail(dims.edges).mean());
        }
        Delta_check = alpha * state.Delta_check + (1.0 - alpha) * target;
        require_finite(Delta_check, 13, "Delta_check");
    }

    const double tau = (a - state.a).squaredNorm() / static_cast<double>(dims.mn);
    if (!std::isfinite(tau)) {
        throw ScampiDivergence(14, "non-finite tau");
    }

    state.Phi = Phi;
    state.Theta = Theta;
    state.Sigma = Sigma;
    state.R = R;
    state.a = std::move(a);
    state.v = std::move(v);
    state.Delta_check = std::move(Delta_check);
    state.tau_trace.push_back(tau);
    ++state.t;
}

bool em_refresh(ScampiState& state, const AugmentedSystem& sys) {
    const int mn = sys.dims().mn;
    Vector pis(mn);
    Vector gammas(mn);
    Vector nus(mn);
    for (int i = 0; i < mn; ++i) {
        const EmPosterior q = em_posterior_quantities(state.Sigma[i], state.R[i], state.prior);
        pis[i] = q.pi;
        gammas[i] = q.gamma;
        nus[i] = q.nu;
    }
    const EmUpdateResult upd = em_update(pis, gammas, nus, state.prior);
    state.prior = upd.prior;
    return upd.informative;
}

namespace {

void initialize_em_prior(ScampiState& state, const AugmentedSystem& sys, const ScampiOptions& opts) {
    if (opts.em_initial_prior) {
        state.prior = *opts.em_initial_prior;
    } else {
        const auto dims = sys.dims();
        double energy = 0.0;
        if (state.t > 0) {
            energy = state.a.head(dims.mn).squaredNorm() / dims.mn;
        } else {
            energy = sys.observation().head(dims.q).squaredNorm() / dims.q;
        }
        state.prior.lambda = opts.em_init_lambda;
        state.prior.a = 0.0;
        state.prior.v = std::max(energy / opts.em_init_lambda, kVarianceFloor);
    }
    state.prior_active = true;
}

NoiseSummary summarize_noise(const ScampiState& state, const AugmentedDims& dims) {
    NoiseSummary out;
    out.delta_mean = state.Delta_check.head(dims.q).mean();
    out.upsilon_mean = dims.edges > 0 ? state.Delta_check.tail(dims.edges).mean() : 0.0;
    return out;
}

void write_trace_row(std::ostream& out, const ScampiState& state, const AugmentedDims& dims,
                     const Vector* truth) {
    const NoiseSummary noise = summarize_noise(state, dims);
    out << state.t << ',' << state.tau_trace.back() << ',' << noise.delta_mean << ','
        << noise.upsilon_mean << ',';
    if (state.prior_active) {
        out << state.prior.lambda << ',' << state.prior.a << ',' << state.prior.v;
    } else {
        out << ",,";
    }
    if (truth != nullptr) {
        out << ',' << compute_nmse(state.a.head(dims.mn), *truth);
    }
    out << '\n';
}

EstimationReport run_loop(const AugmentedSystem& sys, const ScampiOptions& opts, const Vector* truth,
                          std::ostream* trace, bool learn_prior) {
    opts.validate();
    const auto dims = sys.dims();
    if (truth != nullptr && truth->size() != dims.mn) {
        throw std::invalid_argument("run_scampi: truth length does not match MN");
    }
    ScampiState state = init_state(sys, opts);
    EstimationReport report;
    if (trace != nullptr) {
        *trace << "t,tau,delta_mean,upsilon_mean,lambda,a,v" << (truth != nullptr ? ",nmse\n" : "\n");
    }

    ScampiOptions heavy = opts;
    heavy.alpha_damp = std::max(opts.alpha_damp, opts.retry_damping);
    heavy.beta_damp = std::max(opts.beta_damp, opts.retry_damping);

    while (state.t < opts.t_max) {
        if (learn_prior && state.t >= opts.em_warmup) {
            if (!state.prior_active) {
                initialize_em_prior(state, sys, opts);
            }
            if (state.t > 0 && !em_refresh(state, sys)) {
                report.degenerate = true;
            }
            report.prior_trace.push_back(state.prior);
        }
        try {
            scampi_iterate(state, sys, opts);
        } catch (const ScampiDivergence&) {
            ++report.retries;
            scampi_iterate(state, sys, heavy);
        }
        if (trace != nullptr) {
            write_trace_row(*trace, state, dims, truth);
        }
        if (state.tau_trace.back() <= opts.eps) {
            report.converged = true;
            break;
        }
    }

    report.h_est = state.a.head(dims.mn);
    report.d_est = state.a.tail(dims.edges);
    report.iterations = state.t;
    report.tau_trace = state.tau_trace;
    report.learned_noise_summary = summarize_noise(state, dims);
    if (state.prior_active) {
        report.learned_prior = state.prior;
    }
    if (truth != nullptr) {
        report.nmse = compute_nmse(report.h_est, *truth);
    }
    return report;
}

}  // namespace

EstimationReport run_scampi(const AugmentedSystem& sys, const ScampiOptions& opts, const Vector* truth,
                            std::ostream* trace) {
    return run_loop(sys, opts, truth, trace, opts.prior_kind == PriorKind::bernoulli_gaussian);
}

EstimationReport run_em_scampi(const AugmentedSystem& sys, const ScampiOptions& opts, const Vector* truth,
                               std::ostream* trace) {
    if (opts.prior_kind != PriorKind::bernoulli_gaussian) {
        throw std::invalid_argument("run_em_scampi: prior_kind must be bernoulli_gaussian");
    }
    return run_loop(sys, opts, truth, trace, true);
}

}  // namespace beamscampi
