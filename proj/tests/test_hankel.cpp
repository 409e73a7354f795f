#include "doctest.h"

#include "ddmpc/hankel.hpp"
#include "ddmpc/plant.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace ddmpc;

TEST_CASE("scalar hankel of depth two") {
    const HankelMatrix h = build_hankel(Sequence::scalar({1, 2, 3, 4}), 2);
    Matrix expected(2, 3);
    expected << 1, 2, 3, 2, 3, 4;
    CHECK(h.entries() == expected);
    CHECK(h.rows() == 2);
    CHECK(h.cols() == 3);
}

TEST_CASE("depth equal to length gives the stacked sequence") {
    const Sequence s = Sequence::scalar({3, -1, 4, 1, 5});
    const HankelMatrix h = build_hankel(s, 5);
    REQUIRE(h.cols() == 1);
    CHECK(Vector(h.entries().col(0)) == s.stacked());
}

TEST_CASE("two-channel hankel") {
    Matrix samples(2, 3);
    samples << 1, 0, 1, 0, 1, 1;
    const HankelMatrix h = build_hankel(Sequence(samples), 2);
    Matrix expected(4, 2);
    expected << 1, 0, 0, 1, 0, 1, 1, 1;
    CHECK(h.entries() == expected);
}

TEST_CASE("depth beyond length is rejected") {
    const Sequence s = Sequence::scalar({1, 2, 3});
    CHECK_THROWS_AS(build_hankel(s, 4), DepthExceedsLength);
    CHECK_THROWS_AS(build_hankel(s, 0), std::invalid_argument);
}

TEST_CASE("block shift structure") {
    std::mt19937_64 rng(7);
    const Sequence s = testing::uniform_sequence(rng, 3, 20, -1.0, 1.0);
    const HankelMatrix h = build_hankel(s, 6);
    for (Index i = 0; i < 6; ++i) {
        for (Index j = 0; j < h.cols(); ++j) {
            CHECK(h.block(i, j) == s.at(i + j));
            if (i > 0 && j + 1 < h.cols()) CHECK(h.block(i, j) == h.block(i - 1, j + 1));
        }
    }
}

TEST_CASE("hankel_entries agrees with the matrix type") {
    std::mt19937_64 rng(8);
    const Sequence s = testing::uniform_sequence(rng, 2, 30, 0.0, 1.0);
    CHECK(hankel_entries(s.samples(), 7) == build_hankel(s, 7).entries());
}

TEST_CASE("constant sequence is not persistently exciting of order two") {
    const PeReport r = persistence_order_check(Sequence::scalar(std::vector<double>(10, 2.5)), 2);
    CHECK_FALSE(r.is_pe);
    CHECK(r.computed_rank == 1);
    CHECK(r.required_rank == 2);
}

TEST_CASE("periodic pulse train is persistently exciting of order two") {
    std::vector<double> v;
    for (int k = 0; k < 12; ++k) v.push_back(k % 3 == 0 ? 1.0 : 0.0);
    const PeReport r = persistence_order_check(Sequence::scalar(v), 2);
    CHECK(r.is_pe);
    CHECK(r.computed_rank == 2);
    CHECK(r.reason.empty());
}

TEST_CASE("too few samples are reported with a reason") {
    std::mt19937_64 rng(3);
    const Sequence s = testing::uniform_sequence(rng, 2, 10, 0.0, 1.0);
    const PeReport r = persistence_order_check(s, 4);  // needs 3*4-1 = 11
    CHECK_FALSE(r.is_pe);
    CHECK_FALSE(r.reason.empty());
}

TEST_CASE("uniform excitation on [20,30]^2 is persistently exciting of order L+2n") {
    std::mt19937_64 rng(2024);
    int failures = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Sequence u = testing::uniform_sequence(rng, 2, 150, 20.0, 30.0);
        const PeReport r = persistence_order_check(u, 35 + 2 * 3);
        if (!r.is_pe) ++failures;
        CHECK(r.smallest_retained_singular_value > 1e-3 * r.largest_singular_value);
    }
    CHECK(failures == 0);
}

TEST_CASE("persistence of excitation is monotone in the order") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Sequence u = testing::uniform_sequence(rng, 2, 40, -1.0, 1.0);
        bool previous = true;
        for (Index order = 1; order <= 14; ++order) {
            const bool pe = persistence_order_check(u, order).is_pe;
            if (!previous) CHECK_FALSE(pe);
            previous = pe;
        }
        CHECK(persistence_order_check(u, 13).is_pe);
    }
}

TEST_CASE("rank is invariant under column permutation") {
    std::mt19937_64 rng(19);
    const Sequence u = testing::uniform_sequence(rng, 2, 30, -1.0, 1.0);
    const Matrix h = build_hankel(u, 5).entries();
    std::vector<Index> perm(static_cast<std::size_t>(h.cols()));
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Index>(i);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix shuffled(h.rows(), h.cols());
    for (Index j = 0; j < h.cols(); ++j) shuffled.col(j) = h.col(perm[static_cast<std::size_t>(j)]);
    Eigen::BDCSVD<Matrix> a(h), b(shuffled);
    CHECK((a.singularValues() - b.singularValues()).norm() <= 1e-12 * a.singularValues()(0));
    CHECK(a.rank() == b.rank());
}

namespace {

struct Dataset {
    LtiSystem sys;
    Sequence u;
    Sequence y;
};

Dataset make_dataset(std::uint64_t seed, Index n, Index m, Index p, Index N) {
    const RandomLti lti = random_lti(n, m, p, 0.95, seed);
    std::mt19937_64 rng(seed + 1000);
    const Sequence u = testing::uniform_sequence(rng, m, N, -1.0, 1.0);
    Vector x0(n);
    for (Index i = 0; i < n; ++i) x0(i) = std::uniform_real_distribution<double>(-1, 1)(rng);
    const LtiTrajectory tr = lti.system.simulate(x0, u);
    return {lti.system, u, tr.outputs};
}

}  // namespace

TEST_CASE("window of the data validates as a trajectory") {
    const Dataset d = make_dataset(5, 3, 2, 2, 60);
    const TrajectoryCheck c = validate_trajectory(d.u, d.y, d.u.window(10, 8), d.y.window(10, 8));
    CHECK(c.is_trajectory);
    CHECK(c.residual < 1e-10);
}

TEST_CASE("fresh simulated trajectory lies in the data span") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Index n = 1 + static_cast<Index>(seed % 4);
        const Index L = 6;
        const Index N = (2 + 1) * (L + n) + 20;
        const Dataset d = make_dataset(seed, n, 2, 2, N);
        REQUIRE(persistence_order_check(d.u, L + n).is_pe);
        std::mt19937_64 rng(seed + 77);
        const Sequence ut = testing::uniform_sequence(rng, 2, L, -3.0, 3.0);
        Vector x0(n);
        for (Index i = 0; i < n; ++i) x0(i) = std::normal_distribution<double>(0, 2)(rng);
        const LtiTrajectory tr = d.sys.simulate(x0, ut);
        const TrajectoryCheck c = validate_trajectory(d.u, d.y, ut, tr.outputs);
        CHECK(c.is_trajectory);
        CHECK(c.residual < 1e-8);
        // alpha reproduces the test trajectory
        const Matrix hu = build_hankel(d.u, L).entries();
        CHECK((hu * c.alpha - ut.stacked()).norm() < 1e-7 * (1.0 + ut.stacked().norm()));
    }
}

TEST_CASE("perturbed output is rejected") {
    const Dataset d = make_dataset(21, 2, 1, 1, 60);
    const Sequence ut = d.u.window(20, 10);
    Matrix yt = d.y.window(20, 10).samples();
    yt(0, 4) += 1.0;
    const TrajectoryCheck c = validate_trajectory(d.u, d.y, ut, Sequence(yt));
    CHECK_FALSE(c.is_trajectory);
    CHECK(c.residual > 1e-3);
}

TEST_CASE("synthesized trajectories are realizable by the state-space model") {
    for (std::uint64_t seed = 30; seed < 40; ++seed) {
        const Index n = 1 + static_cast<Index>(seed % 4);
        const Index L = 7;
        const Dataset d = make_dataset(seed, n, 2, 1, 3 * (L + n) + 15);
        std::mt19937_64 rng(seed);
        const Matrix hu = build_hankel(d.u, L).entries();
        const Matrix hy = build_hankel(d.y, L).entries();
        Vector alpha(hu.cols());
        for (Index i = 0; i < alpha.size(); ++i) alpha(i) = std::normal_distribution<double>(0, 1)(rng);
        const Sequence us = Sequence::from_stacked(hu * alpha, 2);
        const Sequence ys = Sequence::from_stacked(hy * alpha, 1);
        double residual = 0.0;
        testing::realize_initial_state(d.sys, us, ys, residual);
        CHECK(residual < 1e-6);
    }
}

TEST_CASE("dimension mismatch is rejected") {
    const Dataset d = make_dataset(3, 2, 2, 1, 40);
    std::mt19937_64 rng(1);
    const Sequence bad = testing::uniform_sequence(rng, 3, 5, 0.0, 1.0);
    CHECK_THROWS_AS(validate_trajectory(d.u, d.y, bad, d.y.window(0, 5)), DimensionError);
    CHECK_THROWS_AS(validate_trajectory(d.u, d.y, d.u.window(0, 5), d.y.window(0, 6)), DimensionError);
}
