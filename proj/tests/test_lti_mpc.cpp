#include "doctest.h"

#include "ddmpc/lti_mpc.hpp"
#include "ddmpc/plant.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace ddmpc;

namespace {

struct Instance {
    LtiSystem sys;
    DataBuffer data;
    LtiControllerConfig cfg;
    Vector xs;
};

Instance make_instance(std::uint64_t seed, Index n, Index m, Index p, Index L, Index N, double box = 3.0) {
    const RandomLti lti = random_lti(n, m, p, 0.95, seed);
    std::mt19937_64 rng(seed * 31 + 7);
    const Sequence u = testing::uniform_sequence(rng, m, N, -1.0, 1.0);
    Vector x0 = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) x0(i) = std::uniform_real_distribution<double>(-1, 1)(rng);
    const LtiTrajectory tr = lti.system.simulate(x0, u);

    Instance inst{lti.system, DataBuffer{u, tr.outputs}, {}, {}};
    Vector us(m);
    for (Index i = 0; i < m; ++i) us(i) = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    const auto [xs, ys] = lti.system.steady_state(us);
    inst.xs = xs;
    inst.cfg.L = L;
    inst.cfg.n = n;
    inst.cfg.Q = Matrix::Identity(p, p);
    inst.cfg.R = 0.1 * Matrix::Identity(m, m);
    inst.cfg.u_setpoint = us;
    inst.cfg.y_setpoint = ys;
    inst.cfg.input_box = Box::uniform(m, -box, box);
    inst.cfg.output_box = Box::unbounded(p);
    return inst;
}

// Runs n steps with small random inputs from a random state to fill the past window.
struct Warmup {
    Vector x;
    PastWindow past;
};

Warmup warm_up(const Instance& inst, std::uint64_t seed, double x_scale = 1.0) {
    std::mt19937_64 rng(seed);
    const Index n = inst.sys.n();
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = x_scale * std::uniform_real_distribution<double>(-1, 1)(rng);
    PastWindow past(inst.cfg.n, inst.sys.m(), inst.sys.p());
    for (Index k = 0; k < inst.cfg.n; ++k) {
        Vector u(inst.sys.m());
        for (Index i = 0; i < u.size(); ++i) u(i) = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
        past.push(u, inst.sys.output(x, u));
        x = inst.sys.next_state(x, u);
    }
    return {x, past};
}

}  // namespace

TEST_CASE("decision vector dimensions") {
    Instance inst = make_instance(1, 2, 1, 1, 8, 60);
    const Warmup w = warm_up(inst, 2);
    const QpProblem nom = assemble_nominal_qp(inst.cfg, inst.data, w.past);
    const Index n_alpha = 60 - 8 - 2 + 1;
    CHECK(nominal_alpha_dim(60, 8, 2) == n_alpha);
    CHECK(nom.num_variables() == n_alpha + (1 + 1) * (8 + 2));
    inst.cfg.lambda_alpha = 0.1;
    inst.cfg.lambda_sigma = 1000;
    inst.cfg.eps_bar = 0.01;
    const QpProblem rob = assemble_robust_qp(inst.cfg, inst.data, w.past);
    CHECK(rob.num_variables() - nom.num_variables() == 1 * (8 + 2));
}

TEST_CASE("resting at the setpoint costs nothing") {
    const Instance inst = make_instance(3, 3, 2, 2, 12, 120);
    PastWindow past(3, 2, 2);
    for (int k = 0; k < 3; ++k) past.push(inst.cfg.u_setpoint, inst.cfg.y_setpoint);
    NominalDdMpc ctrl(inst.cfg, inst.data);
    ctrl.past() = past;
    const OpenLoopSolution sol = ctrl.solve_open_loop();
    CHECK(std::abs(sol.objective) < 1e-8);
    for (Index k = 0; k < inst.cfg.L; ++k) CHECK((sol.input(k, 2) - inst.cfg.u_setpoint).norm() < 1e-6);
    CHECK((ctrl.compute() - inst.cfg.u_setpoint).norm() < 1e-6);
}

TEST_CASE("data-driven optimum equals the model-based optimum") {
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
        const Index n = 1 + static_cast<Index>(seed % 3);
        const Index m = 1 + static_cast<Index>(seed % 2);
        const Instance inst = make_instance(seed, n, m, 1 + static_cast<Index>((seed / 2) % 2), 12, 40 + (m + 1) * 20);
        const Warmup w = warm_up(inst, seed + 100);
        NominalDdMpc ctrl(inst.cfg, inst.data);
        REQUIRE(ctrl.data_pe().is_pe);
        ctrl.past() = w.past;
        const OpenLoopSolution sol = ctrl.solve_open_loop();
        const Vector x_now = testing::reconstruct_state(inst.sys, w.past.inputs(), w.past.outputs());
        CHECK((x_now - w.x).norm() < 1e-8);
        const testing::ModelMpcResult ref =
            testing::model_based_mpc(inst.sys, x_now, inst.cfg.L, n, inst.cfg.Q, inst.cfg.R, inst.cfg.u_setpoint,
                                     inst.cfg.y_setpoint, inst.cfg.input_box, inst.cfg.output_box);
        REQUIRE(ref.feasible);
        CHECK((sol.u_bar - ref.u_bar).lpNorm<Eigen::Infinity>() < 1e-6);
        CHECK((sol.y_bar - ref.y_bar).lpNorm<Eigen::Infinity>() < 1e-6);
        CHECK(std::abs(sol.objective - ref.objective) < 1e-6 * (1.0 + std::abs(ref.objective)));
    }
}

TEST_CASE("active input constraints match the model-based optimum") {
    Instance inst = make_instance(21, 2, 1, 1, 15, 80);
    inst.cfg.input_box = Box::unbounded(1);
    const Warmup w = warm_up(inst, 5, 3.0);
    NominalDdMpc free_ctrl(inst.cfg, inst.data);
    free_ctrl.past() = w.past;
    // Shrink the box so that the unconstrained optimum is clipped.
    const double reach = (free_ctrl.solve_open_loop().u_bar.array() - inst.cfg.u_setpoint(0)).abs().maxCoeff();
    inst.cfg.input_box = Box::uniform(1, inst.cfg.u_setpoint(0) - 0.7 * reach, inst.cfg.u_setpoint(0) + 0.7 * reach);
    NominalDdMpc ctrl(inst.cfg, inst.data);
    ctrl.past() = w.past;
    const OpenLoopSolution sol = ctrl.solve_open_loop();
    const testing::ModelMpcResult ref = testing::model_based_mpc(
        inst.sys, w.x, inst.cfg.L, 2, inst.cfg.Q, inst.cfg.R, inst.cfg.u_setpoint, inst.cfg.y_setpoint,
        inst.cfg.input_box, inst.cfg.output_box);
    REQUIRE(ref.feasible);
    CHECK((sol.u_bar - ref.u_bar).lpNorm<Eigen::Infinity>() < 1e-6);
    // at least one input bound is active
    CHECK(((sol.u_bar.array() - inst.cfg.input_box.upper(0)).abs().minCoeff() < 1e-9 ||
           (sol.u_bar.array() - inst.cfg.input_box.lower(0)).abs().minCoeff() < 1e-9));
}

TEST_CASE("nominal closed loop converges and predictions are exact") {
    const Instance inst = make_instance(40, 2, 1, 1, 10, 60);
    Warmup w = warm_up(inst, 41);
    NominalDdMpc ctrl(inst.cfg, inst.data);
    ctrl.past() = w.past;
    Vector x = w.x;
    double error = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Vector u = ctrl.compute();
        const OpenLoopSolution& sol = *ctrl.last_solution();
        // n-step-ahead outputs follow the prediction exactly
        Vector xp = x;
        for (Index k = 0; k < inst.cfg.n; ++k) {
            const Vector uk = sol.input(k, 1);
            CHECK((inst.sys.output(xp, uk) - sol.y_bar.segment(k, 1)).norm() < 1e-6);
            xp = inst.sys.next_state(xp, uk);
        }
        const Vector y = inst.sys.output(x, u);
        error = (y - inst.cfg.y_setpoint).norm();
        ctrl.observe(u, y);
        x = inst.sys.next_state(x, u);
    }
    CHECK(error < 1e-4);
}

TEST_CASE("irrecoverable output constraint is reported at t = 0") {
    Instance inst = make_instance(50, 2, 1, 1, 8, 60);
    inst.sys.D.setZero();
    const LtiTrajectory tr = inst.sys.simulate(Vector::Zero(2), inst.data.u);
    inst.data.y = tr.outputs;
    inst.cfg.y_setpoint = inst.sys.steady_state(inst.cfg.u_setpoint).second;
    const Warmup w = warm_up(inst, 8, 2.0);
    // y_0 = C x_0 is fixed by the past; exclude it from the output box.
    const double y0 = (inst.sys.C * w.x)(0);
    inst.cfg.output_box = y0 > inst.cfg.y_setpoint(0) ? Box::uniform(1, -1e3, y0 - 0.01) : Box::uniform(1, y0 + 0.01, 1e3);
    REQUIRE(inst.cfg.output_box.contains(inst.cfg.y_setpoint));
    NominalDdMpc ctrl(inst.cfg, inst.data);
    ctrl.past() = w.past;
    CHECK_THROWS_AS(ctrl.compute(), ControllerInfeasible);
}

TEST_CASE("recursive feasibility and constraint satisfaction") {
    for (std::uint64_t seed = 60; seed < 64; ++seed) {
        Instance inst = make_instance(seed, 2, 1, 1, 12, 70);
        const Vector ys = inst.cfg.y_setpoint;
        inst.cfg.input_box = Box::uniform(1, inst.cfg.u_setpoint(0) - 1.0, inst.cfg.u_setpoint(0) + 1.0);
        inst.cfg.output_box = Box::uniform(1, ys(0) - 3.0, ys(0) + 3.0);
        const Warmup w = warm_up(inst, seed);
        NominalDdMpc ctrl(inst.cfg, inst.data);
        ctrl.past() = w.past;
        Vector x = w.x;
        for (int t = 0; t < 100; ++t) {
            Vector u;
            REQUIRE_NOTHROW(u = ctrl.compute());
            const Vector y = inst.sys.output(x, u);
            CHECK(inst.cfg.input_box.contains(u, 1e-8));
            CHECK(inst.cfg.output_box.contains(y, 1e-6));
            ctrl.observe(u, y);
            x = inst.sys.next_state(x, u);
        }
    }
}

TEST_CASE("robust controller with vanishing noise bound matches the nominal one") {
    Instance inst = make_instance(70, 2, 1, 1, 10, 70);
    inst.cfg.input_box = Box::unbounded(1);
    const Warmup w = warm_up(inst, 71);
    NominalDdMpc nominal(inst.cfg, inst.data);
    nominal.past() = w.past;
    const OpenLoopSolution ref = nominal.solve_open_loop();

    inst.cfg.lambda_alpha = 0.1;
    inst.cfg.lambda_sigma = 1000.0;
    std::vector<double> gaps;
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-9}) {
        inst.cfg.eps_bar = eps;
        RobustDdMpc robust(inst.cfg, inst.data);
        robust.past() = w.past;
        const OpenLoopSolution sol = robust.solve_open_loop();
        gaps.push_back((sol.u_bar - ref.u_bar).lpNorm<Eigen::Infinity>());
        if (eps <= 1e-6) CHECK(sol.sigma.norm() <= 1e-4);
    }
    CHECK(gaps[3] < 1e-4);
    CHECK(gaps[0] > gaps[1]);
    CHECK(gaps[1] > gaps[2]);
}

TEST_CASE("slack vanishes on exact data") {
    Instance inst = make_instance(72, 3, 2, 2, 10, 100);
    inst.cfg.lambda_alpha = 1e-3;
    inst.cfg.lambda_sigma = 1e4;
    inst.cfg.eps_bar = 1e-3;
    const Warmup w = warm_up(inst, 73);
    RobustDdMpc robust(inst.cfg, inst.data);
    robust.past() = w.past;
    const OpenLoopSolution sol = robust.solve_open_loop();
    CHECK(sol.sigma.size() == 2 * (10 + 3));
    CHECK(sol.sigma.norm() <= 1e-4);
}

TEST_CASE("robust controller re-solves every n steps") {
    Instance inst = make_instance(80, 3, 1, 1, 12, 80);
    inst.cfg.lambda_alpha = 1e-3;
    inst.cfg.lambda_sigma = 1e3;
    inst.cfg.eps_bar = 1e-3;
    const Warmup w = warm_up(inst, 81);
    RobustDdMpc robust(inst.cfg, inst.data);
    robust.past() = w.past;
    Vector x = w.x;
    int solves = 0;
    for (int t = 0; t < 12; ++t) {
        const Vector u = robust.compute();
        if (robust.last_step().solved) {
            ++solves;
            CHECK(t % 3 == 0);
            const OpenLoopSolution& sol = *robust.last_solution();
            CHECK((u - sol.input(0, 1)).norm() == 0.0);
        }
        const Vector y = inst.sys.output(x, u);
        robust.observe(u, y);
        x = inst.sys.next_state(x, u);
    }
    CHECK(solves == 4);
}

TEST_CASE("configuration validation") {
    Instance inst = make_instance(90, 2, 1, 1, 8, 60);
    LtiControllerConfig bad = inst.cfg;
    bad.L = 1;
    CHECK_THROWS_AS(NominalDdMpc(bad, inst.data), ConfigError);
    bad = inst.cfg;
    bad.L = 3;  // L >= n but not L >= 2n
    bad.lambda_alpha = bad.lambda_sigma = bad.eps_bar = 1.0;
    CHECK_NOTHROW(NominalDdMpc(bad, inst.data));
    CHECK_THROWS_AS(RobustDdMpc(bad, inst.data), ConfigError);
    bad = inst.cfg;
    bad.Q = -Matrix::Identity(1, 1);
    CHECK_THROWS_AS(NominalDdMpc(bad, inst.data), ConfigError);
    bad = inst.cfg;
    bad.eps_bar = 0.0;
    bad.lambda_alpha = bad.lambda_sigma = 1.0;
    CHECK_THROWS_AS(RobustDdMpc(bad, inst.data), ConfigError);
}
