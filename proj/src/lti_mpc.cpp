#include "ddmpc/lti_mpc.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace ddmpc {

namespace {

void require_spd(const Matrix& M, Index dim, const std::string& name) {
    if (M.rows() != dim || M.cols() != dim) throw ConfigError(name + " must be " + std::to_string(dim) + " x " + std::to_string(dim));
    if (!is_symmetric_positive_definite(M)) throw ConfigError(name + " must be symmetric positive definite");
}

// Offsets of the blocks of the LTI decision vector.
struct Layout {
    Index m, p, n, L, depth;
    Index n_alpha, n_sigma;
    Index alpha, sigma, u, y, total;

    Layout(const LtiControllerConfig& cfg, Index N, bool robust)
        : m(cfg.m()), p(cfg.p()), n(cfg.n), L(cfg.L), depth(cfg.L + cfg.n) {
        n_alpha = nominal_alpha_dim(N, L, n);
        n_sigma = robust ? p * depth : 0;
        alpha = 0;
        sigma = n_alpha;
        u = sigma + n_sigma;
        y = u + m * depth;
        total = y + p * depth;
    }
    // k runs from -n to L-1.
    Index u_at(Index k) const { return u + (k + n) * m; }
    Index y_at(Index k) const { return y + (k + n) * p; }
};

void check_inputs(const LtiControllerConfig& cfg, const DataBuffer& data, const PastWindow& past) {
    require_dims(data.u.dim() == cfg.m() && data.y.dim() == cfg.p(), "LTI controller: data dimensions differ from config");
    require_dims(data.u.length() == data.y.length(), "LTI controller: data input/output lengths differ");
    require_dims(past.horizon() == cfg.n && past.inputs().rows() == cfg.m() && past.outputs().rows() == cfg.p(),
                 "LTI controller: past window does not match config");
    if (!past.full()) throw std::logic_error("LTI controller: past window not yet full");
    if (data.length() < cfg.L + cfg.n) throw ConfigError("LTI controller: data shorter than L + n");
}

QpProblem assemble(const LtiControllerConfig& cfg, const DataBuffer& data, const PastWindow& past, bool robust) {
    check_inputs(cfg, data, past);
    const Layout lay(cfg, data.length(), robust);
    const Index m = lay.m, p = lay.p, n = lay.n, L = lay.L, D = lay.depth;

    Matrix H = Matrix::Zero(lay.total, lay.total);
    Vector f = Vector::Zero(lay.total);
    for (Index k = 0; k < L; ++k) {
        H.block(lay.u_at(k), lay.u_at(k), m, m) = 2.0 * cfg.R;
        H.block(lay.y_at(k), lay.y_at(k), p, p) = 2.0 * cfg.Q;
        f.segment(lay.u_at(k), m) = -2.0 * cfg.R * cfg.u_setpoint;
        f.segment(lay.y_at(k), p) = -2.0 * cfg.Q * cfg.y_setpoint;
    }
    if (robust) {
        H.diagonal().segment(lay.alpha, lay.n_alpha).setConstant(2.0 * cfg.lambda_alpha * cfg.eps_bar);
        H.diagonal().segment(lay.sigma, lay.n_sigma).setConstant(2.0 * cfg.lambda_sigma / cfg.eps_bar);
    }

    const Index rows = m * D + p * D + 2 * n * (m + p);
    Matrix A = Matrix::Zero(rows, lay.total);
    Vector b = Vector::Zero(rows);
    // Hankel prediction model, with the slack on the output rows in the robust case.
    A.block(0, lay.alpha, m * D, lay.n_alpha) = hankel_entries(data.u.samples(), D);
    A.block(0, lay.u, m * D, m * D) = -Matrix::Identity(m * D, m * D);
    A.block(m * D, lay.alpha, p * D, lay.n_alpha) = hankel_entries(data.y.samples(), D);
    A.block(m * D, lay.y, p * D, p * D) = -Matrix::Identity(p * D, p * D);
    if (robust) A.block(m * D, lay.sigma, p * D, p * D) = -Matrix::Identity(p * D, p * D);
    Index row = (m + p) * D;
    // Past window.
    for (Index k = -n; k < 0; ++k) {
        A.block(row, lay.u_at(k), m, m).setIdentity();
        b.segment(row, m) = past.inputs().col(k + n);
        row += m;
        A.block(row, lay.y_at(k), p, p).setIdentity();
        b.segment(row, p) = past.outputs().col(k + n);
        row += p;
    }
    // Terminal equality on the last n steps.
    for (Index k = L - n; k < L; ++k) {
        A.block(row, lay.u_at(k), m, m).setIdentity();
        b.segment(row, m) = cfg.u_setpoint;
        row += m;
        A.block(row, lay.y_at(k), p, p).setIdentity();
        b.segment(row, p) = cfg.y_setpoint;
        row += p;
    }

    Vector lower = Vector::Constant(lay.total, -std::numeric_limits<double>::infinity());
    Vector upper = Vector::Constant(lay.total, std::numeric_limits<double>::infinity());
    for (Index k = 0; k < L; ++k) {
        lower.segment(lay.u_at(k), m) = cfg.input_box.lower;
        upper.segment(lay.u_at(k), m) = cfg.input_box.upper;
        if (!robust) {
            lower.segment(lay.y_at(k), p) = cfg.output_box.lower;
            upper.segment(lay.y_at(k), p) = cfg.output_box.upper;
        }
    }
    return QpProblem(std::move(H), std::move(f), std::move(A), std::move(b), std::move(lower), std::move(upper));
}

// Moves every block one step towards the front, repeating the last block.
Vector shift_blocks(const Vector& v, Index block, Index steps) {
    Vector out = v;
    const Index count = v.size() / block;
    for (Index k = 0; k < count; ++k) out.segment(k * block, block) = v.segment(std::min(k + steps, count - 1) * block, block);
    return out;
}

}  // namespace

void LtiControllerConfig::validate(bool robust) const {
    if (n < 1) throw ConfigError("n must be at least 1");
    if (robust ? L < 2 * n : L < n) throw ConfigError(robust ? "robust controller requires L >= 2n" : "nominal controller requires L >= n");
    if (R.rows() < 1 || Q.rows() < 1) throw ConfigError("Q and R must be non-empty");
    require_spd(Q, Q.rows(), "Q");
    require_spd(R, R.rows(), "R");
    if (u_setpoint.size() != m() || y_setpoint.size() != p()) throw ConfigError("setpoint dimensions do not match Q/R");
    if (input_box.dim() != m()) throw ConfigError("input box dimension does not match R");
    input_box.validate("input box");
    if (!robust) {
        if (output_box.dim() != p()) throw ConfigError("output box dimension does not match Q");
        output_box.validate("output box");
    }
    if (robust && !(lambda_alpha > 0.0 && lambda_sigma > 0.0 && eps_bar > 0.0)) {
        throw ConfigError("robust controller requires positive lambda_alpha, lambda_sigma and eps_bar");
    }
}

Index nominal_alpha_dim(Index N, Index L, Index n) { return N - (L + n) + 1; }

QpProblem assemble_nominal_qp(const LtiControllerConfig& cfg, const DataBuffer& data, const PastWindow& past) {
    return assemble(cfg, data, past, false);
}

QpProblem assemble_robust_qp(const LtiControllerConfig& cfg, const DataBuffer& data, const PastWindow& past) {
    return assemble(cfg, data, past, true);
}

double initial_window_distance(const DataBuffer& data, const PastWindow& past, Index L) {
    const Index n = past.horizon();
    const Index cols = nominal_alpha_dim(data.length(), L, n);
    const Matrix hu = hankel_entries(data.u.samples(), n).leftCols(cols);
    const Matrix hy = hankel_entries(data.y.samples(), n).leftCols(cols);
    Matrix H(hu.rows() + hy.rows(), cols);
    H << hu, hy;
    Vector w(H.rows());
    w << past.inputs().reshaped(), past.outputs().reshaped();
    const Vector alpha = H.completeOrthogonalDecomposition().solve(w);
    const double scale = w.norm();
    const double res = (H * alpha - w).norm();
    return scale > 0.0 ? res / scale : res;
}

LtiDdMpcBase::LtiDdMpcBase(LtiControllerConfig cfg, DataBuffer data, bool robust, QpSettings settings)
    : cfg_(std::move(cfg)),
      data_(std::move(data)),
      robust_(robust),
      past_(std::max<Index>(cfg_.n, 1), std::max<Index>(cfg_.m(), 1), std::max<Index>(cfg_.p(), 1)),
      solver_(settings) {
    cfg_.validate(robust_);
    require_dims(data_.u.dim() == cfg_.m() && data_.y.dim() == cfg_.p(), "LTI controller: data dimensions differ from config");
    require_dims(data_.u.length() == data_.y.length(), "LTI controller: data input/output lengths differ");
    if (data_.length() < cfg_.L + cfg_.n) throw ConfigError("LTI controller: data shorter than L + n");
    data_pe_ = persistence_order_check(data_.u, cfg_.L + 2 * cfg_.n);
    if (!data_pe_.is_pe) {
        std::cerr << "warning: input data is not persistently exciting of order " << data_pe_.order << " (rank "
                  << data_pe_.computed_rank << " of " << data_pe_.required_rank << ")\n";
    }
    info_.pe_min_sv = data_pe_.smallest_retained_singular_value;
}

OpenLoopSolution LtiDdMpcBase::solve_open_loop() {
    const QpProblem qp = assemble(cfg_, data_, past_, robust_);
    const Layout lay(cfg_, data_.length(), robust_);
    QpSolution sol;
    if (!qp.has_bounds()) {
        try {
            sol = solve_equality_only(qp.H(), qp.f(), qp.A_eq(), qp.b_eq());
        } catch (const SingularKktError& e) {
            throw ControllerInfeasible(std::string("LTI controller QP infeasible: ") + e.what(),
                                       initial_window_distance(data_, past_, cfg_.L));
        }
    } else {
        QpWarmStart warm;
        const QpWarmStart* warm_ptr = nullptr;
        if (last_) {
            // Shift the previous prediction by the number of steps applied since.
            const Index steps = robust_ ? cfg_.n : 1;
            const Vector& z = last_->qp.z;
            warm.z = z;
            warm.z.segment(lay.alpha, lay.n_alpha).setZero();
            warm.z.segment(lay.alpha + std::min(steps, lay.n_alpha), lay.n_alpha - std::min(steps, lay.n_alpha)) =
                z.segment(lay.alpha, lay.n_alpha - std::min(steps, lay.n_alpha));
            warm.z.segment(lay.u, lay.m * lay.depth) = shift_blocks(z.segment(lay.u, lay.m * lay.depth), lay.m, steps);
            warm.z.segment(lay.y, lay.p * lay.depth) = shift_blocks(z.segment(lay.y, lay.p * lay.depth), lay.p, steps);
            warm_ptr = &warm;
        }
        sol = solver_.solve(qp, warm_ptr);
        if (sol.status == QpStatus::PrimalInfeasible) {
            throw ControllerInfeasible("LTI controller QP infeasible", initial_window_distance(data_, past_, cfg_.L));
        }
    }

    OpenLoopSolution out;
    out.alpha = sol.z.segment(lay.alpha, lay.n_alpha);
    out.sigma = robust_ ? Vector(sol.z.segment(lay.sigma, lay.n_sigma)) : Vector::Zero(lay.p * lay.depth);
    out.u_bar = sol.z.segment(lay.u_at(0), lay.m * lay.L);
    out.y_bar = sol.z.segment(lay.y_at(0), lay.p * lay.L);
    const double constant = static_cast<double>(lay.L) *
                            (cfg_.u_setpoint.dot(cfg_.R * cfg_.u_setpoint) + cfg_.y_setpoint.dot(cfg_.Q * cfg_.y_setpoint));
    out.objective = sol.objective + constant;
    out.qp = std::move(sol);

    info_.objective = out.objective;
    info_.alpha_norm = out.alpha.norm();
    info_.sigma_norm = out.sigma.norm();
    info_.qp_iterations = out.qp.iterations;
    info_.qp_status = out.qp.status;
    info_.solved = true;
    last_ = out;
    return out;
}

NominalDdMpc::NominalDdMpc(LtiControllerConfig cfg, DataBuffer data, QpSettings settings)
    : LtiDdMpcBase(std::move(cfg), std::move(data), false, settings) {}

Vector NominalDdMpc::compute() { return solve_open_loop().input(0, cfg_.m()); }

Vector NominalDdMpc::step(const Vector& u_prev, const Vector& y_prev) {
    observe(u_prev, y_prev);
    return compute();
}

RobustDdMpc::RobustDdMpc(LtiControllerConfig cfg, DataBuffer data, QpSettings settings)
    : LtiDdMpcBase(std::move(cfg), std::move(data), true, settings) {}

Vector RobustDdMpc::compute() {
    if (plan_.empty()) {
        const OpenLoopSolution sol = solve_open_loop();
        for (Index k = 0; k < cfg_.n; ++k) plan_.push_back(sol.input(k, cfg_.m()));
    } else {
        info_.solved = false;
        info_.qp_iterations = 0;
    }
    Vector u = plan_.front();
    plan_.pop_front();
    return u;
}

}  // namespace ddmpc
