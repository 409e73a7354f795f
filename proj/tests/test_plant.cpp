#include "doctest.h"

#include "ddmpc/plant.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <functional>

using namespace ddmpc;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

// Bisection on a decreasing scalar function.
double bisect(const std::function<double(double)>& fn, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (fn(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Equilibrium from the row balances, solved tank by tank with bisection.
Vector root_finder_equilibrium(const FourTankParams& p, const Vector& u) {
    auto sq = [&](double x) { return std::sqrt(2.0 * p.g * x); };
    Vector x(4);
    x(2) = bisect([&](double v) { return (1 - p.gamma2) * u(1) - p.a3 * sq(v); }, 0.0, 1e4);
    x(3) = bisect([&](double v) { return (1 - p.gamma1) * u(0) - p.a4 * sq(v); }, 0.0, 1e4);
    x(0) = bisect([&](double v) { return p.a3 * sq(x(2)) + p.gamma1 * u(0) - p.a1 * sq(v); }, 0.0, 1e4);
    x(1) = bisect([&](double v) { return p.a4 * sq(x(3)) + p.gamma2 * u(1) - p.a2 * sq(v); }, 0.0, 1e4);
    return x;
}

}  // namespace

TEST_CASE("dynamics from empty tanks") {
    const FourTankParams p;
    const Vector dx = continuous_dynamics(p, Vector::Zero(4), vec2(20, 20));
    CHECK(dx(0) == doctest::Approx(0.15914).epsilon(1e-4));
    CHECK(dx(1) == doctest::Approx(0.15914).epsilon(1e-4));
    CHECK(dx(2) == doctest::Approx(0.42448).epsilon(1e-4));
    CHECK(dx(3) == doctest::Approx(0.42448).epsilon(1e-4));
    CHECK(std::abs(dx(0) - 0.4 * 20 / 50.27) < 1e-12);
    CHECK(continuous_dynamics(p, Vector::Zero(4), Vector::Zero(2)).isZero(0.0));
}

TEST_CASE("negative levels are rejected") {
    Vector x = Vector::Ones(4);
    x(2) = -0.1;
    CHECK_THROWS_AS(continuous_dynamics(FourTankParams{}, x, vec2(1, 1)), NegativeLevelError);
}

TEST_CASE("euler step") {
    const FourTankParams p;
    const Vector x1 = euler_step(p, Vector::Zero(4), vec2(20, 20), 1.5);
    Vector expected(4);
    expected << 0.23871, 0.23871, 0.63672, 0.63672;
    CHECK((x1 - expected).lpNorm<Eigen::Infinity>() < 1e-5);
    CHECK(euler_step(p, Vector::Zero(4), Vector::Zero(2), 1.5).isZero(0.0));

    Vector x(4);
    x << 10, 12, 3, 4;
    const Vector u = vec2(25, 22);
    const Vector next = euler_step(p, x, u, 1.5);
    CHECK(((next - x) / 1.5 - continuous_dynamics(p, x, u)).norm() < 1e-12);
}

TEST_CASE("euler step clamps at zero") {
    const FourTankParams p;
    Vector x(4);
    x << 1e-4, 1e-4, 1e-4, 1e-4;
    const Vector next = euler_step(p, x, Vector::Zero(2), 1.5);
    CHECK((next.array() >= 0.0).all());
}

TEST_CASE("equilibrium matches the root-finder and zeroes every row") {
    const FourTankParams p;
    for (const Vector& u : {vec2(20, 20), vec2(30, 22), vec2(25.5, 28.1), vec2(59, 1)}) {
        const Vector x = four_tank_equilibrium(p, u);
        CHECK((x - root_finder_equilibrium(p, u)).lpNorm<Eigen::Infinity>() < 1e-8);
        CHECK(continuous_dynamics(p, x, u).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("long simulation converges to the equilibrium") {
    const FourTankParams p;
    const Vector u = vec2(27, 23);
    Vector x = Vector::Zero(4);
    for (int k = 0; k < 20000; ++k) x = euler_step(p, x, u, 1.5);
    CHECK((x - root_finder_equilibrium(p, u)).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("levels fill monotonically from empty tanks") {
    const FourTankParams p;
    const Vector u = vec2(24, 26);
    const Vector xs = four_tank_equilibrium(p, u);
    Vector x = Vector::Zero(4);
    for (int k = 0; k < 3000; ++k) {
        const Vector next = euler_step(p, x, u, 1.5);
        // until within one Euler step of the equilibrium
        if (((xs - x).array().abs() > (next - x).array().abs()).all()) CHECK((next.array() >= x.array()).all());
        x = next;
    }
}

TEST_CASE("clamping never triggers above 0.1 cm") {
    const FourTankParams p;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> in(0.0, 60.0);
    Vector x(4);
    x << 12, 14, 5, 6;
    for (int k = 0; k < 2000; ++k) {
        const Vector u = vec2(in(rng), in(rng));
        const Vector raw = x + 1.5 * continuous_dynamics(p, x, u);
        const Vector next = euler_step(p, x, u, 1.5);
        if ((x.array() > 0.1).all()) CHECK(same_values(raw, next));
        x = next;
    }
}

TEST_CASE("uniform measurement noise statistics") {
    NoiseModel noise = NoiseModel::uniform_inf(0.01, 99);
    double max_abs = 0.0;
    double sum_abs = 0.0;
    const int count = 100000;
    for (int i = 0; i < count; ++i) {
        const Vector e = noise.sample(1);
        max_abs = std::max(max_abs, std::abs(e(0)));
        sum_abs += std::abs(e(0));
    }
    CHECK(max_abs <= 0.01);
    CHECK(sum_abs / count == doctest::Approx(0.005).epsilon(0.05));
}

TEST_CASE("measurement with and without noise") {
    Vector x(4);
    x << 1, 2, 3, 4;
    NoiseModel none = NoiseModel::none();
    CHECK(measure(x, none) == vec2(1, 2));
    NoiseModel a = NoiseModel::uniform_inf(0.1, 5);
    NoiseModel b = NoiseModel::uniform_inf(0.1, 5);
    for (int i = 0; i < 10; ++i) CHECK(same_values(measure(x, a), measure(x, b)));
}

TEST_CASE("random LTI systems are minimal and stable") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Index n = 1 + static_cast<Index>(seed % 4);
        const Index m = 1 + static_cast<Index>(seed % 2);
        const Index p = 1 + static_cast<Index>((seed / 2) % 2);
        const RandomLti r = random_lti(n, m, p, 0.95, seed);
        CHECK(r.certificate.spectral_radius <= 0.95 + 1e-12);
        // PBH test at each eigenvalue, computed independently of the certificate.
        const Eigen::ComplexEigenSolver<Matrix> es(r.system.A);
        for (Index i = 0; i < n; ++i) {
            const std::complex<double> lambda = es.eigenvalues()(i);
            Eigen::MatrixXcd ctrb(n, n + m);
            ctrb << lambda * Eigen::MatrixXcd::Identity(n, n) - r.system.A.cast<std::complex<double>>(),
                r.system.B.cast<std::complex<double>>();
            Eigen::MatrixXcd obsv(n + p, n);
            obsv << lambda * Eigen::MatrixXcd::Identity(n, n) - r.system.A.cast<std::complex<double>>(),
                r.system.C.cast<std::complex<double>>();
            CHECK(Eigen::JacobiSVD<Eigen::MatrixXcd>(ctrb).singularValues()(n - 1) > 1e-8);
            CHECK(Eigen::JacobiSVD<Eigen::MatrixXcd>(obsv).singularValues()(n - 1) > 1e-8);
        }
    }
}

TEST_CASE("random LTI is deterministic in the seed") {
    const RandomLti a = random_lti(3, 2, 2, 0.9, 17);
    const RandomLti b = random_lti(3, 2, 2, 0.9, 17);
    CHECK(same_values(a.system.A, b.system.A));
    CHECK(same_values(a.system.B, b.system.B));
    CHECK(same_values(a.system.C, b.system.C));
    CHECK(same_values(a.system.D, b.system.D));
}

TEST_CASE("scalar random LTI") {
    const RandomLti r = random_lti(1, 1, 1, 0.9, 2);
    CHECK(r.certificate.minimal(1));
    CHECK(r.system.B(0, 0) != 0.0);
    CHECK(r.system.C(0, 0) != 0.0);
}

TEST_CASE("LTI simulation matches the recursion bitwise") {
    const RandomLti r = random_lti(3, 2, 1, 0.9, 8);
    std::mt19937_64 rng(1);
    const Sequence u = testing::uniform_sequence(rng, 2, 50, -1, 1);
    const Vector x0 = Vector::Ones(3);
    const LtiTrajectory tr = r.system.simulate(x0, u);
    Vector x = x0;
    for (Index k = 0; k < 50; ++k) {
        CHECK(same_values(tr.states.col(k), x));
        CHECK(same_values(tr.outputs.at(k), Vector(r.system.C * x + r.system.D * u.at(k))));
        x = r.system.A * x + r.system.B * u.at(k);
    }
    CHECK(same_values(tr.states.col(50), x));
}

TEST_CASE("perturbed parameters") {
    const FourTankParams p;
    CHECK(perturbed_four_tank(p, 0.0, 3) == p);
    const FourTankParams a = perturbed_four_tank(p, 0.2, 11);
    const FourTankParams b = perturbed_four_tank(p, 0.2, 11);
    CHECK(a == b);
    CHECK_FALSE(a == p);
    CHECK(a.A1 >= 0.8 * p.A1);
    CHECK(a.A1 <= 1.2 * p.A1);
    CHECK(a.gamma1 > 0.0);
    CHECK(a.gamma1 < 1.0);
    CHECK_NOTHROW(a.validate());
    CHECK_THROWS(perturbed_four_tank(p, 0.6, 1));
}

TEST_CASE("linearization matches finite differences") {
    const FourTankParams p;
    const Vector u = vec2(25, 25);
    const Vector xs = four_tank_equilibrium(p, u);
    const LtiSystem lin = linearize_four_tank(p, xs, u, 1.5);
    const double h = 1e-6;
    for (Index j = 0; j < 4; ++j) {
        Vector xp = xs;
        xp(j) += h;
        Vector xm = xs;
        xm(j) -= h;
        const Vector col = (euler_step(p, xp, u, 1.5) - euler_step(p, xm, u, 1.5)) / (2 * h);
        CHECK((col - lin.A.col(j)).norm() < 1e-6);
    }
}

TEST_CASE("plant objects") {
    FourTankPlant plant(FourTankParams{}, Vector::Zero(4), 1.5, 1, NoiseModel::none());
    CHECK(plant.measure(vec2(20, 20)).isZero(0.0));
    plant.advance(vec2(20, 20));
    CHECK((plant.state() - euler_step(FourTankParams{}, Vector::Zero(4), vec2(20, 20), 1.5)).norm() == 0.0);
    CHECK_THROWS(FourTankPlant(FourTankParams{}, Vector::Zero(3), 1.5, 1, NoiseModel::none()));
}
