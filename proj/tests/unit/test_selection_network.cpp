// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "beamscampi/selection_network.hpp"

using namespace beamscampi;

namespace {

Vector random_vector(Rng& rng, int n) {
    std::normal_distribution<double> gauss;
    Vector x(n);
    for (int i = 0; i < n; ++i) {
        x[i] = gauss(rng);
    }
    return x;
}

// Sylvester Hadamard entry by the bit-parity rule, independent of fwht.
int hadamard(int row, int col) {
    int parity = 0;
    for (unsigned bits = static_cast<unsigned>(row & col); bits != 0; bits &= bits - 1) {
        parity ^= 1;
    }
    return parity ? -1 : 1;
}

}  // namespace

TEST_CASE("fwht matches the dense Sylvester matrix") {
    Rng rng(2);
    for (int n : {1, 2, 8, 64}) {
        const Vector x = random_vector(rng, n);
        Vector y = x;
        fwht(y.data(), static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double expected = 0.0;
            for (int j = 0; j < n; ++j) {
                expected += hadamard(i, j) * x[j];
            }
            CHECK(y[i] == doctest::Approx(expected).epsilon(1e-13));
        }
    }
}

TEST_CASE("full network is orthogonal with +-1 entries") {
    const auto net = build_hadamard_selection(64, 64, 5);
    const Matrix W = net.dense();
    CHECK((W * W.transpose() - Matrix::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-13);
    for (int q = 0; q < 64; ++q) {
        for (int j = 0; j < 64; ++j) {
            CHECK(std::abs(net.entry(q, j)) == 1);
        }
    }
}

TEST_CASE("partial networks keep orthonormal rows and a projection Gram matrix") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto net = build_hadamard_selection(20, 64, seed);
        const Matrix W = net.dense();
        CHECK((W * W.transpose() - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-13);
        for (int q = 0; q < 20; ++q) {
            for (int j = 0; j < 64; ++j) {
                CHECK(W(q, j) * W(q, j) == doctest::Approx(1.0 / 64.0));
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W.transpose() * W);
        int ones = 0;
        for (double lambda : eig.eigenvalues()) {
            const bool zero = std::abs(lambda) < 1e-12;
            const bool one = std::abs(lambda - 1.0) < 1e-12;
            CHECK((zero || one));
            ones += one ? 1 : 0;
        }
        CHECK(ones == 20);
    }
    const auto a = build_hadamard_selection(20, 64, 1);
    const auto b = build_hadamard_selection(20, 64, 2);
    CHECK(a.row_selection() != b.row_selection());
}

TEST_CASE("non power of two sizes pad the transform") {
    const auto net = build_hadamard_selection(7, 20, 9);
    CHECK(net.order() == 32);
    std::set<int> cols(net.column_map().begin(), net.column_map().end());
    CHECK(cols.size() == 20);
    const Matrix W = net.dense();
    for (int q = 0; q < 7; ++q) {
        CHECK(W.row(q).squaredNorm() == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(build_hadamard_selection(0, 20, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_hadamard_selection(21, 20, 1), std::invalid_argument);
}

TEST_CASE("fast products agree with the dense matrix") {
    Rng rng(17);
    for (double p : {0.0, 0.1, 0.5}) {
        auto net = build_hadamard_selection(24, 48, 3);
        net = reduce_phase_shifters(net, p, 11);
        const Matrix W = net.dense();
        const Matrix W2 = W.cwiseProduct(W);
        const Vector x = random_vector(rng, 48);
        const Vector y = random_vector(rng, 24);
        CHECK((net.apply(x) - W * x).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((net.apply_transpose(y) - W.transpose() * y).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((net.apply_squared(x) - W2 * x).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((net.apply_squared_transpose(y) - W2.transpose() * y).cwiseAbs().maxCoeff() < 1e-12);
    }
    const auto net = build_hadamard_selection(4, 8, 1);
    CHECK_THROWS_AS((void)net.apply(Vector::Zero(7)), std::invalid_argument);
    CHECK_THROWS_AS((void)net.apply_transpose(Vector::Zero(8)), std::invalid_argument);
}

TEST_CASE("phase-shifter reduction") {
    const auto full = build_hadamard_selection(25, 40, 4);

    SUBCASE("p = 0 leaves the network unchanged") {
        const auto same = reduce_phase_shifters(full, 0.0, 1);
        CHECK(same.disconnected_count() == 0);
        CHECK(same.dense() == full.dense());
    }

    SUBCASE("exact count, ascending, reproducible") {
        const auto reduced = reduce_phase_shifters(full, 0.1, 99);
        CHECK(reduced.disconnected_count() == 100);
        const auto& off = reduced.disconnected();
        CHECK(std::is_sorted(off.begin(), off.end()));
        CHECK(std::adjacent_find(off.begin(), off.end()) == off.end());
        const Matrix W = reduced.dense();
        CHECK((W.array() == 0.0).count() == 100);
        CHECK(reduce_phase_shifters(full, 0.1, 99).disconnected() == off);
        CHECK(reduce_phase_shifters(reduced, 0.1, 99).disconnected() == off);
        CHECK(reduce_phase_shifters(full, 0.1, 98).disconnected() != off);
    }

    SUBCASE("floor of p Q MN") {
        CHECK(reduce_phase_shifters(full, 0.3333, 1).disconnected_count() == 333);
        CHECK_THROWS_AS(reduce_phase_shifters(full, 1.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(reduce_phase_shifters(full, -0.1, 1), std::invalid_argument);
    }
}

TEST_CASE("measurement") {
    const auto net = build_hadamard_selection(16, 32, 8);
    Rng gen(1);
    const Vector h = random_vector(gen, 32);

    SUBCASE("noiseless") {
        Rng rng(3);
        const Measurement m = measure(net, h, std::numeric_limits<double>::infinity(), rng);
        CHECK(m.Delta == 0.0);
        CHECK(m.r == net.apply(h));
    }

    SUBCASE("deterministic and linear at fixed noise") {
        Rng a(5);
        Rng b(5);
        const Measurement x = measure(net, h, 10.0, a);
        const Measurement y = measure(net, h, 10.0, b);
        CHECK(x.r == y.r);
        const double expected = net.apply(h).squaredNorm() / (16 * 10.0);
        CHECK(x.Delta == doctest::Approx(expected).epsilon(1e-14));

        // Same noise draw, signal doubled and SNR raised by 20 log10(2) dB:
        // Delta scales by 4 / 4 = 1, so r must be linear in h.
        Rng c(5);
        const Measurement z = measure(net, 2.0 * h, 10.0 + 20.0 * std::log10(2.0), c);
        CHECK(z.Delta == doctest::Approx(x.Delta).epsilon(1e-12));
        const Vector noise = x.r - net.apply(h);
        CHECK((z.r - (2.0 * net.apply(h) + noise)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("empirical noise variance") {
        Rng rng(21);
        const Vector clean = net.apply(h);
        double sum = 0.0;
        double delta = 0.0;
        const int trials = 10000;
        for (int t = 0; t < trials; ++t) {
            const Measurement m = measure(net, h, 0.0, rng);
            sum += (m.r - clean).squaredNorm();
            delta = m.Delta;
        }
        CHECK(sum / (trials * 16.0) == doctest::Approx(delta).epsilon(0.05));
    }

    SUBCASE("errors") {
        Rng rng(1);
        CHECK_THROWS_AS(measure(net, Vector::Zero(32), 10.0, rng), std::invalid_argument);
        CHECK_THROWS_AS(measure(net, Vector::Ones(31), 10.0, rng), std::invalid_argument);
    }
}

TEST_CASE("descriptor regenerates the network") {
    const auto net = reduce_phase_shifters(build_hadamard_selection(30, 50, 1234), 0.2, 77);
    std::stringstream ss;
    write_descriptor(ss, describe(net));
    const NetworkDescriptor desc = read_descriptor(ss);
    CHECK(desc.seed == 1234);
    CHECK(desc.reduction_seed == 77);
    CHECK(desc.p == 0.2);
    const auto back = regenerate(desc);
    CHECK(back.dense() == net.dense());

    std::stringstream csv;
    write_network_csv(csv, net);
    std::string first;
    std::getline(csv, first);
    CHECK(std::count(first.begin(), first.end(), ',') == 49);

    std::stringstream bad("colour=blue\n");
    CHECK_THROWS_AS(read_descriptor(bad), std::runtime_error);
}
