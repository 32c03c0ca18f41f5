// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "beamscampi/baselines.hpp"
#include "beamscampi/lens_channel.hpp"
#include "beamscampi/scampi.hpp"

using namespace beamscampi;

namespace {

struct Instance {
    MultipathChannel channel;
    SelectionNetwork net;
    Measurement meas;
};

Instance make_instance(int rows, int cols, int q, double snr_db, std::uint64_t seed) {
    LensConfig cfg;
    cfg.rows = rows;
    cfg.cols = cols;
    Rng rng(mix_seed(seed));
    Instance inst;
    inst.channel = sample_channel(rng, 3, cfg);
    inst.net = build_hadamard_selection(q, rows * cols, seed + 1);
    inst.meas = measure(inst.net, inst.channel.h, snr_db, rng);
    return inst;
}

Vector random_positive(Rng& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> unif(lo, hi);
    Vector x(n);
    for (int i = 0; i < n; ++i) {
        x[i] = unif(rng);
    }
    return x;
}

}  // namespace

TEST_CASE("initial state") {
    const Instance inst = make_instance(32, 32, 512, 30.0, 1);
    const AugmentedSystem sys = augment(inst.net, build_difference_operator(32, 32), inst.meas);
    const ScampiState s = init_state(sys, {});
    const int edges = 2 * 32 * 31;
    CHECK(s.a.size() == 1024 + edges);
    CHECK(s.v.size() == 1024 + edges);
    CHECK(s.Theta.size() == 512 + edges);
    CHECK(s.Delta_check.size() == 512 + edges);
    CHECK(s.a.isZero(0.0));
    CHECK((s.v.array() == 0.1).all());
    CHECK((s.Theta.array() == 0.2).all());
    CHECK(s.Phi.isZero(0.0));
    CHECK((s.Delta_check.array() == 0.1).all());
    CHECK_FALSE(s.prior_active);

    ScampiOptions fixed;
    fixed.learn_noise = false;
    fixed.fixed_delta = 0.25;
    fixed.fixed_upsilon = 3.0;
    const ScampiState f = init_state(sys, fixed);
    CHECK((f.Delta_check.head(512).array() == 0.25).all());
    CHECK((f.Delta_check.tail(edges).array() == 3.0).all());
}

TEST_CASE("options validation") {
    ScampiOptions o;
    CHECK_NOTHROW(o.validate());
    o.alpha_damp = 1.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = {};
    o.t_max = 0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = {};
    o.em_init_lambda = 0.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = {};
    o.learn_noise = false;
    o.fixed_delta = -1.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
}

TEST_CASE("Bethe noise update solves its quadratic") {
    Rng rng(7);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 10000; ++k) {
        const double delta = gauss(rng) * std::pow(10.0, -3.0 + 6.0 * unit(rng));
        const double s = std::pow(10.0, -6.0 + 12.0 * unit(rng));
        const double D = bethe_noise_update(delta, s);
        CHECK(D >= 0.0);
        const double residual = D * D - delta * delta * D - delta * delta * s;
        const double scale = std::max({1.0, D * D, delta * delta * D, delta * delta * s});
        CHECK(std::abs(residual) < 1e-12 * scale);
    }
    CHECK(bethe_noise_update(0.0, 5.0) == 0.0);
}

TEST_CASE("one sweep") {
    const Instance inst = make_instance(8, 8, 32, std::numeric_limits<double>::infinity(), 3);
    const auto diff = build_difference_operator(8, 8);
    const AugmentedSystem sys = augment(inst.net, diff, inst.meas);
    const int edges = diff.edge_count();

    SUBCASE("consistent noiseless state gives zero learned noise") {
        ScampiOptions o;
        o.alpha_damp = 0.0;
        ScampiState s = init_state(sys, o);
        // Truth as the current mean, exact zero spread: the uniform and SNIPE
        // denoisers are then evaluated around the truth.
        s.a << inst.channel.h, diff.apply(inst.channel.h);
        s.v.setConstant(1e-300);
        s.Theta.setZero();
        s.Phi = sys.apply(s.a);
        s.Delta_check.setConstant(1.0);
        ScampiOptions uniform = o;
        uniform.omega = -700.0;
        scampi_iterate(s, sys, uniform);
        CHECK((s.a - (Vector(sys.dims().cols()) << inst.channel.h, diff.apply(inst.channel.h)).finished())
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
        CHECK(s.Delta_check.maxCoeff() < 1e-12);
    }

    SUBCASE("message damping is an exact convex combination") {
        Rng rng(4);
        ScampiState start = init_state(sys, {});
        start.a = random_positive(rng, sys.dims().cols(), -1.0, 1.0);
        start.v = random_positive(rng, sys.dims().cols(), 0.01, 1.0);
        start.Phi = random_positive(rng, sys.dims().rows(), -1.0, 1.0);

        ScampiOptions undamped;
        undamped.beta_damp = 0.0;
        ScampiState a = start;
        scampi_iterate(a, sys, undamped);

        ScampiOptions damped;
        damped.beta_damp = 0.9;
        ScampiState b = start;
        scampi_iterate(b, sys, damped);
        const Vector expected_phi = 0.9 * start.Phi + 0.1 * a.Phi;
        const Vector expected_theta = 0.9 * start.Theta + 0.1 * a.Theta;
        CHECK((b.Phi - expected_phi).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((b.Theta - expected_theta).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("sweep matches a dense reference") {
        Rng rng(12);
        ScampiState s = init_state(sys, {});
        s.a = random_positive(rng, sys.dims().cols(), -1.0, 1.0);
        s.v = random_positive(rng, sys.dims().cols(), 0.01, 1.0);
        s.Phi = random_positive(rng, sys.dims().rows(), -1.0, 1.0);
        s.Delta_check = random_positive(rng, sys.dims().rows(), 0.05, 0.5);
        const ScampiState before = s;
        ScampiOptions o;
        scampi_iterate(s, sys, o);

        const Matrix W = sys.dense();
        const Matrix W2 = W.cwiseProduct(W);
        const Vector& r = sys.observation();
        const Vector theta_new = W2 * before.v;
        const Vector phi_new = W * before.a - theta_new.cwiseProduct((r - before.Phi).cwiseQuotient(before.Delta_check + before.Theta));
        const Vector Phi = 0.5 * before.Phi + 0.5 * phi_new;
        const Vector Theta = 0.5 * before.Theta + 0.5 * theta_new;
        const Vector g = (before.Delta_check + Theta).cwiseInverse();
        const Vector Sigma = (W2.transpose() * g).cwiseInverse();
        const Vector R = Sigma.cwiseProduct(W.transpose() * (r - Phi).cwiseProduct(g)) + before.a;
        CHECK((s.Sigma - Sigma).cwiseAbs().maxCoeff() < 1e-12 * Sigma.cwiseAbs().maxCoeff());
        CHECK((s.R - R).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + R.cwiseAbs().maxCoeff()));
        for (int i = 0; i < 64; ++i) {
            CHECK(s.a[i] == doctest::Approx(R[i]).epsilon(1e-12));
            CHECK(s.v[i] == doctest::Approx(Sigma[i]).epsilon(1e-12));
        }
        for (int i = 64; i < 64 + edges; ++i) {
            const PosteriorMoments m = snipe_moments(Sigma[i], R[i], 0.0);
            CHECK(s.a[i] == doctest::Approx(m.fa).epsilon(1e-9));
        }
        const Vector delta = r - W * s.a;
        const Vector spread = W2 * s.v;
        for (int mu = 0; mu < sys.dims().rows(); ++mu) {
            const double target = bethe_noise_update(delta[mu], spread[mu]);
            CHECK(s.Delta_check[mu] == doctest::Approx(0.5 * before.Delta_check[mu] + 0.5 * target).epsilon(1e-9));
        }
        CHECK(s.tau_trace.back() == doctest::Approx((s.a - before.a).squaredNorm() / 64.0).epsilon(1e-12));
        CHECK(s.t == 1);
    }

    SUBCASE("non-finite values leave the state untouched") {
        ScampiState s = init_state(sys, {});
        s.Delta_check[0] = std::numeric_limits<double>::quiet_NaN();
        const ScampiState before = s;
        CHECK_THROWS_AS(scampi_iterate(s, sys, {}), ScampiDivergence);
        CHECK(s.t == before.t);
        CHECK(s.a == before.a);
    }
}

TEST_CASE("full-rank high-SNR recovery") {
    // Q = MN: the problem is square and well posed, so the flat-prior run
    // must approach the pseudo-inverse solution.
    const Instance inst = make_instance(8, 8, 64, 80.0, 21);
    const AugmentedSystem sys = augment(inst.net, build_difference_operator(8, 8), inst.meas);
    const EstimationReport rep = run_scampi(sys, {}, &inst.channel.h);
    const Vector pinv = ls_estimate(inst.meas, inst.net).h;
    CHECK(compute_nmse(pinv, inst.channel.h) < 1e-6);
    REQUIRE(rep.nmse.has_value());
    CHECK(*rep.nmse < 1e-4);
}

TEST_CASE("runs are deterministic and keep their invariants") {
    const Instance inst = make_instance(16, 16, 128, 20.0, 5);
    const AugmentedSystem sys = augment(inst.net, build_difference_operator(16, 16), inst.meas);
    ScampiOptions o;
    o.prior_kind = PriorKind::bernoulli_gaussian;
    o.em_warmup = 40;
    o.t_max = 120;
    std::ostringstream trace_a;
    std::ostringstream trace_b;
    const EstimationReport a = run_em_scampi(sys, o, &inst.channel.h, &trace_a);
    const EstimationReport b = run_em_scampi(sys, o, &inst.channel.h, &trace_b);
    CHECK(a.h_est == b.h_est);
    CHECK(a.tau_trace == b.tau_trace);
    CHECK(trace_a.str() == trace_b.str());
    CHECK(trace_a.str().rfind("t,tau,delta_mean,upsilon_mean,lambda,a,v,nmse\n", 0) == 0);
    CHECK(a.iterations == 120);
    REQUIRE(a.learned_prior.has_value());
    CHECK(a.learned_prior->lambda > 0.0);
    CHECK(a.learned_prior->lambda < 1.0);
    CHECK(a.prior_trace.size() == 80);
    for (double tau : a.tau_trace) {
        CHECK(std::isfinite(tau));
    }

    // Per-sweep invariants through the public iteration.
    ScampiState s = init_state(sys, o);
    for (int t = 0; t < 60; ++t) {
        scampi_iterate(s, sys, o);
        CHECK((s.v.array() >= 0.0).all());
        CHECK((s.Sigma.array() > 0.0).all());
        CHECK((s.Delta_check.array() >= 0.0).all());
    }

    ScampiOptions wrong;
    CHECK_THROWS_AS(run_em_scampi(sys, wrong), std::invalid_argument);
}

TEST_CASE("a run stops once tau drops below eps") {
    const Instance inst = make_instance(8, 8, 32, 30.0, 9);
    const AugmentedSystem sys = augment(inst.net, build_difference_operator(8, 8), inst.meas);
    ScampiOptions o;
    o.eps = 1e-3;
    const EstimationReport rep = run_scampi(sys, o);
    CHECK(rep.converged);
    CHECK(rep.iterations < o.t_max);
    CHECK(rep.tau_trace.back() <= o.eps);
    CHECK_FALSE(rep.nmse.has_value());
}

TEST_CASE("a matched sparse prior with known noise beats the flat prior") {
    // Bernoulli-Gaussian truth; the fixed prior is the generating law.
    const SparseGaussianPrior truth{0.1, 0.0, 1.0};
    const int trials = 20;
    double sparse = 0.0;
    double flat = 0.0;
    int wins = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(mix_seed(500 + t));
        std::bernoulli_distribution active(truth.lambda);
        std::normal_distribution<double> slab(truth.a, std::sqrt(truth.v));
        Vector h(256);
        for (double& x : h) {
            x = active(rng) ? slab(rng) : 0.0;
        }
        const auto net = build_hadamard_selection(128, 256, 600 + t);
        const Measurement meas = measure(net, h, 30.0, rng);
        const AugmentedSystem sys = augment(net, build_difference_operator(16, 16), meas);
        ScampiOptions o;
        o.prior_kind = PriorKind::fixed_bg;
        o.fixed_prior = truth;
        o.learn_noise = false;
        o.fixed_delta = meas.Delta;
        const double with_prior = *run_scampi(sys, o, &h).nmse;
        ScampiOptions u;
        u.learn_noise = false;
        u.fixed_delta = meas.Delta;
        const double without = *run_scampi(sys, u, &h).nmse;
        sparse += with_prior / trials;
        flat += without / trials;
        wins += with_prior < without ? 1 : 0;
    }
    CHECK(sparse < flat);
    CHECK(wins >= 15);
}

TEST_CASE("known noise is no worse than three times learned noise at high SNR") {
    double learned = 0.0;
    double known = 0.0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
        const Instance inst = make_instance(16, 16, 128, 30.0, 100 + t);
        const AugmentedSystem sys = augment(inst.net, build_difference_operator(16, 16), inst.meas);
        ScampiOptions o;
        o.t_max = 150;
        learned += *run_scampi(sys, o, &inst.channel.h).nmse;
        o.learn_noise = false;
        o.fixed_delta = inst.meas.Delta;
        known += *run_scampi(sys, o, &inst.channel.h).nmse;
    }
    CHECK(known <= 3.0 * learned);
}
