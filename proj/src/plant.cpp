#include "ddmpc/plant.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace ddmpc {

void FourTankParams::validate() const {
    for (double v : {A1, A2, A3, A4, a1, a2, a3, a4, g}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("four-tank parameters must be positive");
    }
    if (!(gamma1 > 0.0 && gamma1 < 1.0) || !(gamma2 > 0.0 && gamma2 < 1.0)) {
        throw ConfigError("four-tank flow splits must lie in (0, 1)");
    }
}

Vector continuous_dynamics(const FourTankParams& p, const Vector& x, const Vector& u) {
    require_dims(x.size() == 4 && u.size() == 2, "continuous_dynamics: expects 4 levels and 2 inputs");
    if ((x.array() < 0.0).any()) throw NegativeLevelError("continuous_dynamics: negative water level");
    const double two_g = 2.0 * p.g;
    const double q1 = std::sqrt(two_g * x(0));
    const double q2 = std::sqrt(two_g * x(1));
    const double q3 = std::sqrt(two_g * x(2));
    const double q4 = std::sqrt(two_g * x(3));
    Vector dx(4);
    dx(0) = -p.a1 / p.A1 * q1 + p.a3 / p.A1 * q3 + p.gamma1 / p.A1 * u(0);
    dx(1) = -p.a2 / p.A2 * q2 + p.a4 / p.A2 * q4 + p.gamma2 / p.A2 * u(1);
    dx(2) = -p.a3 / p.A3 * q3 + (1.0 - p.gamma2) / p.A3 * u(1);
    dx(3) = -p.a4 / p.A4 * q4 + (1.0 - p.gamma1) / p.A4 * u(0);
    return dx;
}

Vector euler_step(const FourTankParams& p, const Vector& x, const Vector& u, double Ts, int substeps) {
    if (!(Ts > 0.0)) throw std::invalid_argument("euler_step: Ts must be positive");
    if (substeps < 1) throw std::invalid_argument("euler_step: substeps must be at least 1");
    const double h = Ts / substeps;
    Vector next = x.cwiseMax(0.0);
    for (int i = 0; i < substeps; ++i) {
        next = (next + h * continuous_dynamics(p, next, u)).cwiseMax(0.0);
    }
    return next;
}

Vector four_tank_output(const Vector& x) {
    require_dims(x.size() == 4, "four_tank_output: expects 4 levels");
    return x.head(2);
}

Vector four_tank_equilibrium(const FourTankParams& p, const Vector& u) {
    require_dims(u.size() == 2, "four_tank_equilibrium: expects 2 inputs");
    if ((u.array() < 0.0).any()) throw std::invalid_argument("four_tank_equilibrium: negative pump flow");
    const double two_g = 2.0 * p.g;
    auto level = [two_g](double outflow, double orifice) {
        const double v = outflow / orifice;
        return v * v / two_g;
    };
    Vector x(4);
    x(2) = level((1.0 - p.gamma2) * u(1), p.a3);
    x(3) = level((1.0 - p.gamma1) * u(0), p.a4);
    x(0) = level((1.0 - p.gamma2) * u(1) + p.gamma1 * u(0), p.a1);
    x(1) = level((1.0 - p.gamma1) * u(0) + p.gamma2 * u(1), p.a2);
    return x;
}

FourTankParams perturbed_four_tank(const FourTankParams& p, double spread, std::uint64_t seed) {
    if (!(spread >= 0.0 && spread <= 0.5)) throw std::invalid_argument("perturbed_four_tank: spread must be in [0, 0.5]");
    if (spread == 0.0) return p;
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> factor(1.0 - spread, 1.0 + spread);
    FourTankParams out = p;
    // g is left unperturbed.
    for (double* v : {&out.A1, &out.A2, &out.A3, &out.A4, &out.a1, &out.a2, &out.a3, &out.a4, &out.gamma1, &out.gamma2}) {
        *v *= factor(engine);
    }
    out.gamma1 = std::clamp(out.gamma1, 0.05, 0.95);
    out.gamma2 = std::clamp(out.gamma2, 0.05, 0.95);
    return out;
}

NoiseModel NoiseModel::uniform_inf(double eps_bar, std::uint64_t seed) {
    if (!(eps_bar >= 0.0)) throw std::invalid_argument("NoiseModel: eps_bar must be non-negative");
    NoiseModel n;
    n.kind_ = NoiseKind::UniformInf;
    n.eps_bar_ = eps_bar;
    n.seed_ = seed;
    n.engine_.seed(seed);
    return n;
}

Vector NoiseModel::sample(Index dim) {
    Vector e = Vector::Zero(dim);
    if (kind_ == NoiseKind::None || eps_bar_ == 0.0) return e;
    std::uniform_real_distribution<double> dist(-eps_bar_, eps_bar_);
    for (Index i = 0; i < dim; ++i) e(i) = dist(engine_);
    return e;
}

Vector measure(const Vector& x, NoiseModel& noise) {
    Vector y = four_tank_output(x);
    return y + noise.sample(y.size());
}

void LtiSystem::validate() const {
    const Index nx = A.rows();
    require_dims(nx >= 1 && A.cols() == nx, "LtiSystem: A must be square");
    require_dims(B.rows() == nx && B.cols() >= 1, "LtiSystem: B must have n rows");
    require_dims(C.cols() == nx && C.rows() >= 1, "LtiSystem: C must have n columns");
    require_dims(D.rows() == C.rows() && D.cols() == B.cols(), "LtiSystem: D must be p x m");
}

LtiTrajectory LtiSystem::simulate(const Vector& x0, const Sequence& u) const {
    require_dims(x0.size() == n() && u.dim() == m(), "LtiSystem::simulate: dimension mismatch");
    const Index N = u.length();
    Matrix states(n(), N + 1);
    Matrix outputs(p(), N);
    states.col(0) = x0;
    for (Index k = 0; k < N; ++k) {
        const Vector uk = u.samples().col(k);
        outputs.col(k) = C * states.col(k) + D * uk;
        states.col(k + 1) = A * states.col(k) + B * uk;
    }
    return LtiTrajectory{std::move(states), Sequence(std::move(outputs))};
}

std::pair<Vector, Vector> LtiSystem::steady_state(const Vector& u) const {
    const Matrix I = Matrix::Identity(n(), n());
    Vector x = (I - A).partialPivLu().solve(B * u);
    Vector y = C * x + D * u;
    return {std::move(x), std::move(y)};
}

namespace {

struct RankInfo {
    Index rank = 0;
    // sigma_n / sigma_1 over the n leading singular values (the matrices may be wide or tall).
    double conditioning = 0.0;
};

RankInfo rank_info(const Matrix& m, Index n, double tol) {
    const Vector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
    RankInfo info;
    if (sv.size() == 0 || sv(0) == 0.0) return info;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol * sv(0)) ++info.rank;
    }
    info.conditioning = sv(std::min(n, sv.size()) - 1) / sv(0);
    return info;
}

}  // namespace

LtiCertificate certify(const LtiSystem& sys, double rank_tolerance) {
    sys.validate();
    const Index n = sys.n();
    Matrix ctrb(n, n * sys.m());
    Matrix obsv(n * sys.p(), n);
    Matrix Ak = Matrix::Identity(n, n);
    for (Index k = 0; k < n; ++k) {
        ctrb.middleCols(k * sys.m(), sys.m()) = Ak * sys.B;
        obsv.middleRows(k * sys.p(), sys.p()) = sys.C * Ak;
        Ak = sys.A * Ak;
    }
    const RankInfo c = rank_info(ctrb, n, rank_tolerance);
    const RankInfo o = rank_info(obsv, n, rank_tolerance);
    LtiCertificate cert;
    cert.controllability_rank = c.rank;
    cert.observability_rank = o.rank;
    cert.controllability_conditioning = c.conditioning;
    cert.observability_conditioning = o.conditioning;
    cert.spectral_radius = sys.A.eigenvalues().cwiseAbs().maxCoeff();
    return cert;
}

RandomLti random_lti(Index n, Index m, Index p, double spectral_radius_max, std::uint64_t seed, int max_attempts,
                     double min_conditioning) {
    if (n < 1 || m < 1 || p < 1) throw std::invalid_argument("random_lti: dimensions must be at least 1");
    if (!(spectral_radius_max > 0.0)) throw std::invalid_argument("random_lti: spectral radius bound must be positive");
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> radius(0.5, 1.0);
    auto gaussian = [&](Index r, Index c) {
        Matrix M(r, c);
        for (Index j = 0; j < c; ++j) {
            for (Index i = 0; i < r; ++i) M(i, j) = normal(engine);
        }
        return M;
    };
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        LtiSystem sys;
        sys.A = gaussian(n, n);
        const double rho = sys.A.eigenvalues().cwiseAbs().maxCoeff();
        const double target = spectral_radius_max * radius(engine);
        if (rho > 0.0) sys.A *= target / rho;
        sys.B = gaussian(n, m);
        sys.C = gaussian(p, n);
        sys.D = gaussian(p, m);
        const LtiCertificate cert = certify(sys);
        if (cert.minimal(n) && cert.spectral_radius <= spectral_radius_max * (1.0 + 1e-12) &&
            cert.controllability_conditioning >= min_conditioning &&
            cert.observability_conditioning >= min_conditioning) {
            return RandomLti{std::move(sys), cert, attempt};
        }
    }
    throw SamplingFailure("random_lti: no minimal system found within the attempt budget");
}

LtiSystem linearize_four_tank(const FourTankParams& p, const Vector& x_eq, const Vector& u_eq, double Ts) {
    require_dims(x_eq.size() == 4 && u_eq.size() == 2, "linearize_four_tank: expects 4 levels and 2 inputs");
    if ((x_eq.array() <= 0.0).any()) throw std::invalid_argument("linearize_four_tank: levels must be positive");
    auto dq = [&](double x) { return std::sqrt(p.g / (2.0 * x)); };
    Matrix J = Matrix::Zero(4, 4);
    J(0, 0) = -p.a1 / p.A1 * dq(x_eq(0));
    J(0, 2) = p.a3 / p.A1 * dq(x_eq(2));
    J(1, 1) = -p.a2 / p.A2 * dq(x_eq(1));
    J(1, 3) = p.a4 / p.A2 * dq(x_eq(3));
    J(2, 2) = -p.a3 / p.A3 * dq(x_eq(2));
    J(3, 3) = -p.a4 / p.A4 * dq(x_eq(3));
    Matrix Ju = Matrix::Zero(4, 2);
    Ju(0, 0) = p.gamma1 / p.A1;
    Ju(1, 1) = p.gamma2 / p.A2;
    Ju(2, 1) = (1.0 - p.gamma2) / p.A3;
    Ju(3, 0) = (1.0 - p.gamma1) / p.A4;
    LtiSystem sys;
    sys.A = Matrix::Identity(4, 4) + Ts * J;
    sys.B = Ts * Ju;
    sys.C = Matrix::Zero(2, 4);
    sys.C(0, 0) = 1.0;
    sys.C(1, 1) = 1.0;
    sys.D = Matrix::Zero(2, 2);
    return sys;
}

FourTankPlant::FourTankPlant(FourTankParams params, Vector x0, double Ts, int substeps, NoiseModel noise)
    : params_(params), x_(std::move(x0)), Ts_(Ts), substeps_(substeps), noise_(std::move(noise)) {
    params_.validate();
    require_dims(x_.size() == 4, "FourTankPlant: initial state must have 4 levels");
    if ((x_.array() < 0.0).any()) throw std::invalid_argument("FourTankPlant: negative initial level");
    if (!(Ts_ > 0.0) || substeps_ < 1) throw std::invalid_argument("FourTankPlant: invalid sampling");
}

Vector FourTankPlant::measure(const Vector& /*u*/) { return ddmpc::measure(x_, noise_); }

void FourTankPlant::advance(const Vector& u) { x_ = euler_step(params_, x_, u, Ts_, substeps_); }

LtiPlant::LtiPlant(LtiSystem sys, Vector x0, NoiseModel noise)
    : sys_(std::move(sys)), x_(std::move(x0)), noise_(std::move(noise)) {
    sys_.validate();
    require_dims(x_.size() == sys_.n(), "LtiPlant: initial state dimension");
}

Vector LtiPlant::measure(const Vector& u) { return sys_.output(x_, u) + noise_.sample(sys_.p()); }

void LtiPlant::advance(const Vector& u) { x_ = sys_.next_state(x_, u); }

}  // namespace ddmpc
