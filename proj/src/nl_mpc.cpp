#include "ddmpc/nl_mpc.hpp"

#include <cmath>
#include <limits>

namespace ddmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_spd(const Matrix& M, Index dim, const std::string& name) {
    if (M.rows() != dim || M.cols() != dim) throw ConfigError(name + " must be " + std::to_string(dim) + " x " + std::to_string(dim));
    if (!is_symmetric_positive_definite(M)) throw ConfigError(name + " must be symmetric positive definite");
}

struct Layout {
    Index m, p, n, L, depth, n_alpha;
    Index alpha, sigma, u, y, us, ys, total;

    explicit Layout(const NlControllerConfig& cfg)
        : m(cfg.m()), p(cfg.p()), n(cfg.n), L(cfg.L), depth(cfg.depth()), n_alpha(cfg.alpha_dim()) {
        alpha = 0;
        sigma = n_alpha;
        u = sigma + p * depth;
        y = u + m * depth;
        us = y + p * depth;
        ys = us + m;
        total = ys + p;
    }
    // k runs from -n to L.
    Index u_at(Index k) const { return u + (k + n) * m; }
    Index y_at(Index k) const { return y + (k + n) * p; }
};

Vector shift_blocks(const Vector& v, Index block) {
    Vector out = v;
    const Index count = v.size() / block;
    if (count > 1) out.head((count - 1) * block) = v.tail((count - 1) * block);
    return out;
}

}  // namespace

void NlControllerConfig::validate() const {
    if (n < 1 || L < 1) throw ConfigError("L and n must be at least 1");
    if (L < n) throw ConfigError("nonlinear controller requires L >= n");
    if (R.rows() < 1 || Q.rows() < 1) throw ConfigError("Q and R must be non-empty");
    require_spd(Q, Q.rows(), "Q");
    require_spd(R, R.rows(), "R");
    require_spd(S, Q.rows(), "S");
    if (N < (m() + 1) * depth() - 1) {
        throw ConfigError("data window N = " + std::to_string(N) + " is shorter than (m+1)(L+n+1)-1 = " +
                          std::to_string((m() + 1) * depth() - 1));
    }
    if (!(lambda_alpha > 0.0) || !(lambda_sigma > 0.0)) throw ConfigError("lambda_alpha and lambda_sigma must be positive");
    if (y_target.size() != p()) throw ConfigError("y_target dimension does not match Q");
    if (input_box.dim() != m() || setpoint_box.dim() != m()) throw ConfigError("input/setpoint box dimension does not match R");
    input_box.validate("input box");
    setpoint_box.validate("setpoint box");
    if (!input_box.strictly_contains(setpoint_box)) throw ConfigError("setpoint box must lie strictly inside the input box");
}

SlidingWindow::SlidingWindow(Index capacity, Index m, Index p)
    : capacity_(capacity), u_(Matrix::Zero(m, capacity)), y_(Matrix::Zero(p, capacity)) {
    if (capacity < 1 || m < 1 || p < 1) throw std::invalid_argument("SlidingWindow: dimensions must be positive");
}

void SlidingWindow::push(const Vector& u, const Vector& y) {
    require_dims(u.size() == u_.rows() && y.size() == y_.rows(), "SlidingWindow::push: dimension mismatch");
    const Index slot = (head_ + size_) % capacity_;
    u_.col(slot) = u;
    y_.col(slot) = y;
    if (size_ < capacity_) {
        ++size_;
    } else {
        head_ = (head_ + 1) % capacity_;
    }
}

Matrix SlidingWindow::ordered(const Matrix& ring) const {
    Matrix out(ring.rows(), size_);
    for (Index k = 0; k < size_; ++k) out.col(k) = ring.col((head_ + k) % capacity_);
    return out;
}

QpProblem assemble_nl_qp(const NlControllerConfig& cfg, const SlidingWindow& window, const PastWindow& past) {
    if (!window.full() || window.size() != cfg.N) throw std::logic_error("nonlinear controller: data window not full");
    if (!past.full()) throw std::logic_error("nonlinear controller: past window not full");
    require_dims(past.horizon() == cfg.n && past.inputs().rows() == cfg.m() && past.outputs().rows() == cfg.p(),
                 "nonlinear controller: past window does not match config");
    const Layout lay(cfg);
    const Index m = lay.m, p = lay.p, n = lay.n, L = lay.L, D = lay.depth;

    Matrix H = Matrix::Zero(lay.total, lay.total);
    Vector f = Vector::Zero(lay.total);
    H.diagonal().segment(lay.alpha, lay.n_alpha).setConstant(2.0 * cfg.lambda_alpha);
    H.diagonal().segment(lay.sigma, p * D).setConstant(2.0 * cfg.lambda_sigma);
    const Matrix R2 = 2.0 * cfg.R;
    const Matrix Q2 = 2.0 * cfg.Q;
    for (Index k = 0; k <= L; ++k) {
        const Index iu = lay.u_at(k);
        const Index iy = lay.y_at(k);
        H.block(iu, iu, m, m) += R2;
        H.block(iu, lay.us, m, m) -= R2;
        H.block(lay.us, iu, m, m) -= R2;
        H.block(lay.us, lay.us, m, m) += R2;
        H.block(iy, iy, p, p) += Q2;
        H.block(iy, lay.ys, p, p) -= Q2;
        H.block(lay.ys, iy, p, p) -= Q2;
        H.block(lay.ys, lay.ys, p, p) += Q2;
    }
    H.block(lay.ys, lay.ys, p, p) += 2.0 * cfg.S;
    f.segment(lay.ys, p) = -2.0 * cfg.S * cfg.y_target;

    const Index rows = (m + p) * D + n * (m + p) + (n + 1) * (m + p) + 1;
    Matrix A = Matrix::Zero(rows, lay.total);
    Vector b = Vector::Zero(rows);
    A.block(0, lay.alpha, m * D, lay.n_alpha) = hankel_entries(window.inputs(), D);
    A.block(0, lay.u, m * D, m * D) = -Matrix::Identity(m * D, m * D);
    A.block(m * D, lay.alpha, p * D, lay.n_alpha) = hankel_entries(window.outputs(), D);
    A.block(m * D, lay.y, p * D, p * D) = -Matrix::Identity(p * D, p * D);
    A.block(m * D, lay.sigma, p * D, p * D) = -Matrix::Identity(p * D, p * D);
    Index row = (m + p) * D;
    for (Index k = -n; k < 0; ++k) {
        A.block(row, lay.u_at(k), m, m).setIdentity();
        b.segment(row, m) = past.inputs().col(k + n);
        row += m;
        A.block(row, lay.y_at(k), p, p).setIdentity();
        b.segment(row, p) = past.outputs().col(k + n);
        row += p;
    }
    // Terminal window pinned to the artificial equilibrium.
    for (Index k = L - n; k <= L; ++k) {
        A.block(row, lay.u_at(k), m, m).setIdentity();
        A.block(row, lay.us, m, m) = -Matrix::Identity(m, m);
        row += m;
        A.block(row, lay.y_at(k), p, p).setIdentity();
        A.block(row, lay.ys, p, p) = -Matrix::Identity(p, p);
        row += p;
    }
    A.block(row, lay.alpha, 1, lay.n_alpha).setOnes();
    b(row) = 1.0;

    Vector lower = Vector::Constant(lay.total, -kInf);
    Vector upper = Vector::Constant(lay.total, kInf);
    for (Index k = 0; k <= L; ++k) {
        lower.segment(lay.u_at(k), m) = cfg.input_box.lower;
        upper.segment(lay.u_at(k), m) = cfg.input_box.upper;
    }
    lower.segment(lay.us, m) = cfg.setpoint_box.lower;
    upper.segment(lay.us, m) = cfg.setpoint_box.upper;
    return QpProblem(std::move(H), std::move(f), std::move(A), std::move(b), std::move(lower), std::move(upper));
}

PeReport pe_advisory(const SlidingWindow& window, Index order) {
    if (window.size() == 0) throw std::logic_error("pe_advisory: empty window");
    return persistence_order_check(Sequence(window.inputs()), order);
}

NlDdMpc::NlDdMpc(NlControllerConfig cfg, QpSettings settings)
    : cfg_(std::move(cfg)),
      window_(std::max<Index>(cfg_.N, 1), std::max<Index>(cfg_.m(), 1), std::max<Index>(cfg_.p(), 1)),
      past_(std::max<Index>(cfg_.n, 1), std::max<Index>(cfg_.m(), 1), std::max<Index>(cfg_.p(), 1)),
      solver_(settings) {
    cfg_.validate();
}

void NlDdMpc::observe(const Vector& u, const Vector& y) {
    past_.push(u, y);
    if (cfg_.update_data || !window_.full()) window_.push(u, y);
}

void NlDdMpc::set_target(const Vector& y_target) {
    require_dims(y_target.size() == cfg_.p(), "NlDdMpc::set_target: dimension mismatch");
    cfg_.y_target = y_target;
}

NlOpenLoopSolution NlDdMpc::solve_open_loop() {
    const QpProblem qp = assemble_nl_qp(cfg_, window_, past_);
    const Layout lay(cfg_);
    pe_ = pe_advisory(window_, cfg_.depth());

    QpWarmStart warm;
    const QpWarmStart* warm_ptr = nullptr;
    if (last_) {
        const Vector& z = last_->qp.z;
        warm.z = z;
        // alpha is kept as is: the data window slides by the same step as the prediction.
        warm.z.segment(lay.sigma, lay.p * lay.depth) = shift_blocks(z.segment(lay.sigma, lay.p * lay.depth), lay.p);
        warm.z.segment(lay.u, lay.m * lay.depth) = shift_blocks(z.segment(lay.u, lay.m * lay.depth), lay.m);
        warm.z.segment(lay.y, lay.p * lay.depth) = shift_blocks(z.segment(lay.y, lay.p * lay.depth), lay.p);
        warm_ptr = &warm;
    }
    QpSolution sol = solver_.solve(qp, warm_ptr);
    if (sol.status == QpStatus::PrimalInfeasible) {
        throw ControllerInfeasible("nonlinear controller QP infeasible", 0.0);
    }

    NlOpenLoopSolution out;
    out.alpha = sol.z.segment(lay.alpha, lay.n_alpha);
    out.sigma = sol.z.segment(lay.sigma, lay.p * lay.depth);
    out.u_bar = sol.z.segment(lay.u_at(0), lay.m * (lay.L + 1));
    out.y_bar = sol.z.segment(lay.y_at(0), lay.p * (lay.L + 1));
    out.u_s = sol.z.segment(lay.us, lay.m);
    out.y_s = sol.z.segment(lay.ys, lay.p);
    out.objective = sol.objective + cfg_.y_target.dot(cfg_.S * cfg_.y_target);
    out.qp = std::move(sol);

    info_.objective = out.objective;
    info_.alpha_norm = out.alpha.norm();
    info_.sigma_norm = out.sigma.norm();
    info_.u_setpoint = out.u_s;
    info_.y_setpoint = out.y_s;
    info_.pe_min_sv = pe_.smallest_retained_singular_value;
    info_.qp_iterations = out.qp.iterations;
    info_.qp_status = out.qp.status;
    info_.solved = true;
    last_ = out;
    return out;
}

Vector NlDdMpc::compute() {
    const NlOpenLoopSolution sol = solve_open_loop();
    Vector u = sol.input(0, cfg_.m());
    if (sol.qp.status != QpStatus::Optimal) u = cfg_.input_box.clamp(u);
    return u;
}

}  // namespace ddmpc
