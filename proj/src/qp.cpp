#include "ddmpc/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace ddmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinScaling = 1e-4;
constexpr double kMaxScaling = 1e4;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEqRhoFactor = 1e3;
constexpr double kPolishDelta = 1e-9;
constexpr int kRefineIterations = 8;

double inf_norm(const Vector& v) { return v.size() > 0 ? v.lpNorm<Eigen::Infinity>() : 0.0; }

double limit_scaling(double norm) {
    if (!(norm >= kMinScaling)) return 1.0;
    return std::min(norm, kMaxScaling);
}

enum class Bound : std::int8_t { Free = 0, Lower = -1, Upper = 1, Fixed = 2 };
using ActiveSet = std::vector<Bound>;

// Problem data after Ruiz equilibration:
//   P = c D P0 D,  q = c D q0,  A = E_eq A0 D,  b = E_eq b0,
// and box row i (variable box_index[i]) reads lb_i <= g_i x_j <= ub_i with g_i = E_box_i D_j.
struct ScaledQp {
    Matrix P;
    Vector q;
    Matrix A;
    Vector b;
    std::vector<Index> box_index;
    Vector g;
    Vector lb;
    Vector ub;
    Vector D;
    Vector E_eq;
    Vector E_box;
    double c = 1.0;
};

ScaledQp equilibrate(const QpProblem& p, double regularization, int iterations) {
    const Index n = p.num_variables();
    const Index me = p.num_equalities();
    ScaledQp s;
    s.P = p.H();
    s.P.diagonal().array() += regularization;
    s.A = p.A_eq();
    for (Index j = 0; j < n; ++j) {
        if (std::isfinite(p.lower()(j)) || std::isfinite(p.upper()(j))) s.box_index.push_back(j);
    }
    const Index nb = static_cast<Index>(s.box_index.size());
    s.g = Vector::Ones(nb);
    s.D = Vector::Ones(n);
    s.E_eq = Vector::Ones(me);
    s.E_box = Vector::Ones(nb);

    Vector q = p.f();
    Vector box_col_norm(n);
    for (int it = 0; it < iterations; ++it) {
        box_col_norm.setZero();
        for (Index i = 0; i < nb; ++i) box_col_norm(s.box_index[i]) = std::abs(s.g(i));
        Vector dD(n);
        for (Index j = 0; j < n; ++j) {
            double norm = s.P.col(j).cwiseAbs().maxCoeff();
            if (me > 0) norm = std::max(norm, s.A.col(j).cwiseAbs().maxCoeff());
            norm = std::max(norm, box_col_norm(j));
            dD(j) = 1.0 / std::sqrt(limit_scaling(norm));
        }
        Vector dE(me);
        for (Index i = 0; i < me; ++i) dE(i) = 1.0 / std::sqrt(limit_scaling(s.A.row(i).cwiseAbs().maxCoeff()));
        Vector dB(nb);
        for (Index i = 0; i < nb; ++i) dB(i) = 1.0 / std::sqrt(limit_scaling(std::abs(s.g(i))));

        s.P = dD.asDiagonal() * s.P * dD.asDiagonal();
        s.A = dE.asDiagonal() * s.A * dD.asDiagonal();
        for (Index i = 0; i < nb; ++i) s.g(i) *= dB(i) * dD(s.box_index[i]);
        q = dD.cwiseProduct(q);
        s.D.array() *= dD.array();
        s.E_eq.array() *= dE.array();
        s.E_box.array() *= dB.array();

        // Cost scaling.
        double mean_col = 0.0;
        for (Index j = 0; j < n; ++j) mean_col += s.P.col(j).cwiseAbs().maxCoeff();
        mean_col /= static_cast<double>(n);
        const double gamma = 1.0 / limit_scaling(std::max(mean_col, inf_norm(q)));
        s.P *= gamma;
        q *= gamma;
        s.c *= gamma;
    }
    s.q = q;
    s.b = s.E_eq.cwiseProduct(p.b_eq());
    s.lb.resize(nb);
    s.ub.resize(nb);
    for (Index i = 0; i < nb; ++i) {
        const Index j = s.box_index[i];
        s.lb(i) = s.E_box(i) * p.lower()(j);
        s.ub(i) = s.E_box(i) * p.upper()(j);
    }
    return s;
}

struct KktSolve {
    Vector x;
    Vector y;
    double residual = kInf;
};

// Solves [P A'; A 0][x; y] = [-q; b] through the quasi-definite system with
// -delta on the constraint block and +delta on P, refined against the exact KKT.
KktSolve solve_kkt(const Matrix& P, const Vector& q, const Matrix& A, const Vector& b, double delta) {
    const Index n = P.rows();
    const Index m = A.rows();
    Matrix K0(n + m, n + m);
    K0.topLeftCorner(n, n) = P;
    K0.topRightCorner(n, m) = A.transpose();
    K0.bottomLeftCorner(m, n) = A;
    K0.bottomRightCorner(m, m).setZero();
    Vector rhs(n + m);
    rhs << -q, b;

    const double scale = std::max(1.0, K0.cwiseAbs().maxCoeff());
    const double d = delta * scale;
    Matrix Kd = K0;
    Kd.diagonal().head(n).array() += d;
    Kd.diagonal().tail(m).array() -= d;

    const double target = 1e-15 * scale * std::max(1.0, inf_norm(rhs));
    auto refine = [&](const auto& factor) {
        Vector sol = factor.solve(rhs);
        double res = kInf;
        for (int it = 0; it < kRefineIterations; ++it) {
            const Vector r = rhs - K0 * sol;
            res = inf_norm(r);
            if (!std::isfinite(res) || res <= target) break;
            sol += factor.solve(r);
        }
        res = inf_norm(rhs - K0 * sol);
        return std::pair<Vector, double>(std::move(sol), res);
    };

    KktSolve out;
    Eigen::LDLT<Matrix> ldlt(Kd);
    auto [sol, res] = refine(ldlt);
    if (!std::isfinite(res) || res > 1e-9 * scale * std::max(1.0, inf_norm(rhs))) {
        Eigen::PartialPivLU<Matrix> lu(Kd);
        auto [sol_lu, res_lu] = refine(lu);
        if (std::isfinite(res_lu) && !(res_lu >= res)) {
            sol = std::move(sol_lu);
            res = res_lu;
        }
    }
    // Refinement stalls when K0 has eigenvalues below delta; factor K0 itself.
    if (!std::isfinite(res) || res > 1e-9 * scale * std::max(1.0, inf_norm(rhs))) {
        Eigen::PartialPivLU<Matrix> lu(K0);
        auto [sol_lu, res_lu] = refine(lu);
        if (std::isfinite(res_lu) && !(res_lu >= res)) {
            sol = std::move(sol_lu);
            res = res_lu;
        }
    }
    out.x = sol.head(n);
    out.y = sol.tail(m);
    out.residual = res;
    return out;
}

struct Tolerances {
    double primal;
    double dual;
};

// Unscaled residuals of a scaled iterate.
struct Residuals {
    double primal = kInf;
    double dual = kInf;
    Tolerances tol{0.0, 0.0};
    bool converged() const { return primal <= tol.primal && dual <= tol.dual; }
};

class AdmmRun {
 public:
    AdmmRun(const QpProblem& problem, const QpSettings& settings)
        : problem_(problem), settings_(settings), s_(equilibrate(problem, settings.regularization,
                                                               settings.scaling_iterations)) {
        n_ = problem.num_variables();
        me_ = problem.num_equalities();
        nb_ = static_cast<Index>(s_.box_index.size());
        AtA_ = s_.A.transpose() * s_.A;
        x_ = Vector::Zero(n_);
        z_b_ = Vector::Zero(nb_);
        y_e_ = Vector::Zero(me_);
        y_b_ = Vector::Zero(nb_);
        rho_ = settings.rho;
    }

    QpSolution run(const QpWarmStart* warm) {
        if (warm != nullptr) apply_warm_start(*warm);
        project_box();

        // A direct attempt with the warm (or empty) active set often finishes receding-horizon problems.
        if (settings_.polish) {
            ActiveSet guess = active_set();
            if (auto sol = polish(guess)) return finish(*sol, 0);
            last_failed_ = guess;
        }

        factorize();
        ActiveSet previous_guess;
        Vector y_e_prev = y_e_;
        Vector y_b_prev = y_b_;
        const double a = settings_.relaxation;
        int k = 1;
        for (; k <= settings_.max_iter; ++k) {
            const bool check = (k % settings_.check_interval) == 0 || k == settings_.max_iter;
            if (check) {
                y_e_prev = y_e_;
                y_b_prev = y_b_;
            }
            const double re = kEqRhoFactor * rho_;
            Vector rhs = settings_.sigma * x_ - s_.q;
            if (me_ > 0) rhs.noalias() += s_.A.transpose() * (re * s_.b - y_e_);
            for (Index i = 0; i < nb_; ++i) rhs(s_.box_index[i]) += s_.g(i) * (rho_ * z_b_(i) - y_b_(i));
            const Vector xt = llt_.solve(rhs);

            x_ = a * xt + (1.0 - a) * x_;
            if (me_ > 0) {
                const Vector zt_e = s_.A * xt;
                y_e_.noalias() += re * (a * zt_e + (1.0 - a) * s_.b - s_.b);
            }
            for (Index i = 0; i < nb_; ++i) {
                const double zh = a * s_.g(i) * xt(s_.box_index[i]) + (1.0 - a) * z_b_(i);
                const double zn = std::clamp(zh + y_b_(i) / rho_, s_.lb(i), s_.ub(i));
                y_b_(i) += rho_ * (zh - zn);
                z_b_(i) = zn;
            }

            if (!check) continue;

            Residuals res = residuals(x_, y_e_, y_b_, z_b_);
            if (!std::isfinite(res.primal) || !std::isfinite(res.dual)) break;
            if (res.converged()) {
                if (settings_.polish) {
                    if (auto sol = polish(active_set())) return finish(*sol, k);
                }
                return finish(admm_solution(res, QpStatus::Optimal), k);
            }
            if (primal_infeasible(y_e_ - y_e_prev, y_b_ - y_b_prev)) {
                return finish(admm_solution(res, QpStatus::PrimalInfeasible), k);
            }
            if (settings_.polish) {
                ActiveSet guess = active_set();
                const bool stable = guess == previous_guess;
                const bool close = res.primal <= 1e4 * res.tol.primal && res.dual <= 1e4 * res.tol.dual;
                if ((stable || close) && guess != last_failed_) {
                    if (auto sol = polish(guess)) return finish(*sol, k);
                    last_failed_ = guess;
                }
                previous_guess = std::move(guess);
            }
            if (settings_.adaptive_rho) adapt_rho();
        }
        k = std::min(k, settings_.max_iter);

        Residuals res = residuals(x_, y_e_, y_b_, z_b_);
        QpStatus status = QpStatus::MaxIterations;
        if (equalities_inconsistent()) status = QpStatus::PrimalInfeasible;
        return finish(admm_solution(res, status), k);
    }

 private:
    void apply_warm_start(const QpWarmStart& w) {
        if (w.z.size() == n_) x_ = w.z.cwiseQuotient(s_.D);
        if (w.eq_multipliers.size() == me_) y_e_ = s_.c * w.eq_multipliers.cwiseQuotient(s_.E_eq);
        if (w.box_multipliers.size() == n_) {
            for (Index i = 0; i < nb_; ++i) y_b_(i) = s_.c * w.box_multipliers(s_.box_index[i]) / s_.E_box(i);
        }
    }

    void project_box() {
        for (Index i = 0; i < nb_; ++i) z_b_(i) = std::clamp(s_.g(i) * x_(s_.box_index[i]), s_.lb(i), s_.ub(i));
    }

    void factorize() {
        Matrix K = s_.P + (kEqRhoFactor * rho_) * AtA_;
        K.diagonal().array() += settings_.sigma;
        for (Index i = 0; i < nb_; ++i) K(s_.box_index[i], s_.box_index[i]) += rho_ * s_.g(i) * s_.g(i);
        llt_.compute(K);
    }

    ActiveSet active_set() const {
        ActiveSet set(static_cast<std::size_t>(nb_), Bound::Free);
        for (Index i = 0; i < nb_; ++i) {
            auto& b = set[static_cast<std::size_t>(i)];
            if (s_.lb(i) == s_.ub(i)) {
                b = Bound::Fixed;
            } else if (z_b_(i) - s_.lb(i) < -y_b_(i)) {
                b = Bound::Lower;
            } else if (s_.ub(i) - z_b_(i) < y_b_(i)) {
                b = Bound::Upper;
            }
        }
        return set;
    }

    Vector stationarity(const Vector& x, const Vector& y_e, const Vector& y_b) const {
        Vector grad = s_.P * x + s_.q;
        if (me_ > 0) grad.noalias() += s_.A.transpose() * y_e;
        for (Index i = 0; i < nb_; ++i) grad(s_.box_index[i]) += s_.g(i) * y_b(i);
        return grad;
    }

    Residuals residuals(const Vector& x, const Vector& y_e, const Vector& y_b, const Vector& z_b) const {
        Residuals r;
        const Vector ax = me_ > 0 ? Vector(s_.A * x) : Vector();
        double prim = 0.0;
        double prim_norm = 0.0;
        if (me_ > 0) {
            prim = inf_norm((ax - s_.b).cwiseQuotient(s_.E_eq));
            prim_norm = std::max(inf_norm(ax.cwiseQuotient(s_.E_eq)), inf_norm(s_.b.cwiseQuotient(s_.E_eq)));
        }
        for (Index i = 0; i < nb_; ++i) {
            const double xu = s_.g(i) * x(s_.box_index[i]) / s_.E_box(i);
            const double zu = z_b(i) / s_.E_box(i);
            prim = std::max(prim, std::abs(xu - zu));
            prim_norm = std::max({prim_norm, std::abs(xu), std::abs(zu)});
        }
        const Vector dinv_c = s_.D.cwiseInverse() / s_.c;
        const Vector px = s_.P * x;
        Vector aty = Vector::Zero(n_);
        if (me_ > 0) aty.noalias() += s_.A.transpose() * y_e;
        for (Index i = 0; i < nb_; ++i) aty(s_.box_index[i]) += s_.g(i) * y_b(i);
        const double dual = inf_norm((px + s_.q + aty).cwiseProduct(dinv_c));
        const double dual_norm = std::max(
            {inf_norm(px.cwiseProduct(dinv_c)), inf_norm(aty.cwiseProduct(dinv_c)), inf_norm(s_.q.cwiseProduct(dinv_c))});
        r.primal = prim;
        r.dual = dual;
        r.tol.primal = settings_.abs_tol + settings_.rel_tol * prim_norm;
        r.tol.dual = settings_.abs_tol + settings_.rel_tol * dual_norm;
        return r;
    }

    struct Candidate {
        Vector x;
        Vector y_e;
        Vector y_b;
        Vector z_b;
        Residuals res;
        bool polished = false;
        QpStatus status = QpStatus::Optimal;
    };

    // Fixes the guessed active bounds, solves the remaining equality-constrained
    // problem directly, and accepts the result only if it satisfies the KKT
    // conditions of the full problem to tolerance.
    std::optional<Candidate> polish(const ActiveSet& set) const {
        std::vector<Index> free_vars;
        std::vector<Index> fixed_vars;
        Vector x = Vector::Zero(n_);
        std::vector<bool> is_fixed(static_cast<std::size_t>(n_), false);
        for (Index i = 0; i < nb_; ++i) {
            const Bound b = set[static_cast<std::size_t>(i)];
            if (b == Bound::Free) continue;
            const Index j = s_.box_index[i];
            const double bound = (b == Bound::Lower || b == Bound::Fixed) ? s_.lb(i) : s_.ub(i);
            x(j) = bound / s_.g(i);
            is_fixed[static_cast<std::size_t>(j)] = true;
        }
        for (Index j = 0; j < n_; ++j) {
            (is_fixed[static_cast<std::size_t>(j)] ? fixed_vars : free_vars).push_back(j);
        }
        const Index nf = static_cast<Index>(free_vars.size());
        Vector y_e = Vector::Zero(me_);
        if (nf > 0) {
            const Vector xF = x(fixed_vars);
            const Matrix Pff = s_.P(free_vars, free_vars);
            Vector qf = s_.q(free_vars);
            Vector bf = s_.b;
            if (!fixed_vars.empty()) {
                qf.noalias() += s_.P(free_vars, fixed_vars) * xF;
                if (me_ > 0) bf.noalias() -= s_.A(Eigen::all, fixed_vars) * xF;
            }
            const Matrix Af = me_ > 0 ? Matrix(s_.A(Eigen::all, free_vars)) : Matrix(0, nf);
            KktSolve kkt = solve_kkt(Pff, qf, Af, bf, kPolishDelta);
            if (!kkt.x.allFinite() || !kkt.y.allFinite()) return std::nullopt;
            x(free_vars) = kkt.x;
            y_e = kkt.y;
        } else if (me_ > 0) {
            // Every variable pinned; multipliers from least squares on the stationarity rows.
            const Vector grad = s_.P * x + s_.q;
            y_e = s_.A.transpose().completeOrthogonalDecomposition().solve(-grad);
        }

        Vector grad = s_.P * x + s_.q;
        if (me_ > 0) grad.noalias() += s_.A.transpose() * y_e;
        Vector y_b = Vector::Zero(nb_);
        Vector z_b(nb_);
        for (Index i = 0; i < nb_; ++i) {
            const Index j = s_.box_index[i];
            z_b(i) = std::clamp(s_.g(i) * x(j), s_.lb(i), s_.ub(i));
            if (set[static_cast<std::size_t>(i)] != Bound::Free) y_b(i) = -grad(j) / s_.g(i);
        }
        Candidate c;
        c.res = residuals(x, y_e, y_b, z_b);
        if (!c.res.converged()) return std::nullopt;
        // Multiplier signs, measured in the unscaled dual units.
        for (Index i = 0; i < nb_; ++i) {
            const double mu = s_.E_box(i) * y_b(i) / s_.c;
            const Bound b = set[static_cast<std::size_t>(i)];
            if (b == Bound::Lower && mu > c.res.tol.dual) return std::nullopt;
            if (b == Bound::Upper && mu < -c.res.tol.dual) return std::nullopt;
        }
        c.x = std::move(x);
        c.y_e = std::move(y_e);
        c.y_b = std::move(y_b);
        c.z_b = std::move(z_b);
        c.polished = true;
        return c;
    }

    Candidate admm_solution(const Residuals& res, QpStatus status) const {
        Candidate c;
        c.x = x_;
        c.y_e = y_e_;
        c.y_b = y_b_;
        c.z_b = z_b_;
        c.res = res;
        c.status = status;
        return c;
    }

    QpSolution finish(const Candidate& c, int iterations) const {
        QpSolution out;
        out.z = s_.D.cwiseProduct(c.x);
        out.eq_multipliers = s_.E_eq.cwiseProduct(c.y_e) / s_.c;
        out.box_multipliers = Vector::Zero(n_);
        for (Index i = 0; i < nb_; ++i) out.box_multipliers(s_.box_index[i]) = s_.E_box(i) * c.y_b(i) / s_.c;
        out.status = c.status;
        out.iterations = iterations;
        out.primal_residual = c.res.primal;
        out.dual_residual = c.res.dual;
        out.objective = problem_.objective(out.z);
        out.polished = c.polished;
        return out;
    }

    // Certificate: a dual direction dy with A'dy ~ 0 and negative support value.
    bool primal_infeasible(const Vector& dy_e, const Vector& dy_b) const {
        const Vector dyu_e = s_.E_eq.cwiseProduct(dy_e);
        const Vector dyu_b = s_.E_box.cwiseProduct(dy_b);
        const double norm = std::max(inf_norm(dyu_e), inf_norm(dyu_b));
        if (!(norm > 1e-12)) return false;
        const double tol = settings_.infeasibility_tol * norm;

        Vector aty = Vector::Zero(n_);
        if (me_ > 0) aty.noalias() += s_.A.transpose() * dy_e;
        for (Index i = 0; i < nb_; ++i) aty(s_.box_index[i]) += s_.g(i) * dy_b(i);
        if (inf_norm(aty.cwiseQuotient(s_.D)) > tol) return false;

        double support = me_ > 0 ? problem_.b_eq().dot(dyu_e) : 0.0;
        for (Index i = 0; i < nb_; ++i) {
            const Index j = s_.box_index[i];
            const double d = dyu_b(i);
            if (d > tol) {
                if (!std::isfinite(problem_.upper()(j))) return false;
                support += problem_.upper()(j) * d;
            } else if (d < -tol) {
                if (!std::isfinite(problem_.lower()(j))) return false;
                support += problem_.lower()(j) * d;
            }
        }
        return support < -tol;
    }

    bool equalities_inconsistent() const {
        if (me_ == 0) return false;
        const Vector z = problem_.A_eq().completeOrthogonalDecomposition().solve(problem_.b_eq());
        const double res = inf_norm(problem_.A_eq() * z - problem_.b_eq());
        return res > 1e3 * (settings_.abs_tol + settings_.rel_tol * inf_norm(problem_.b_eq()));
    }

    void adapt_rho() {
        const Vector ax = me_ > 0 ? Vector(s_.A * x_) : Vector();
        double prim = me_ > 0 ? inf_norm(ax - s_.b) : 0.0;
        double prim_norm = me_ > 0 ? std::max(inf_norm(ax), inf_norm(s_.b)) : 0.0;
        for (Index i = 0; i < nb_; ++i) {
            const double gx = s_.g(i) * x_(s_.box_index[i]);
            prim = std::max(prim, std::abs(gx - z_b_(i)));
            prim_norm = std::max({prim_norm, std::abs(gx), std::abs(z_b_(i))});
        }
        const Vector px = s_.P * x_;
        Vector aty = Vector::Zero(n_);
        if (me_ > 0) aty.noalias() += s_.A.transpose() * y_e_;
        for (Index i = 0; i < nb_; ++i) aty(s_.box_index[i]) += s_.g(i) * y_b_(i);
        const double dual = inf_norm(px + s_.q + aty);
        const double dual_norm = std::max({inf_norm(px), inf_norm(aty), inf_norm(s_.q)});
        const double eps = 1e-30;
        const double ratio = (prim / (prim_norm + eps)) / (dual / (dual_norm + eps) + eps);
        if (!std::isfinite(ratio) || ratio <= 0.0) return;
        const double candidate = std::clamp(rho_ * std::sqrt(ratio), kRhoMin, kRhoMax);
        if (candidate > 5.0 * rho_ || candidate < 0.2 * rho_) {
            rho_ = candidate;
            factorize();
        }
    }

    const QpProblem& problem_;
    const QpSettings& settings_;
    ScaledQp s_;
    Index n_ = 0;
    Index me_ = 0;
    Index nb_ = 0;
    Matrix AtA_;
    Eigen::LLT<Matrix> llt_;
    Vector x_;
    Vector z_b_;
    Vector y_e_;
    Vector y_b_;
    double rho_ = 0.1;
    ActiveSet last_failed_;
};

}  // namespace

std::string to_string(QpStatus status) {
    switch (status) {
        case QpStatus::Optimal:
            return "optimal";
        case QpStatus::PrimalInfeasible:
            return "primal_infeasible";
        case QpStatus::MaxIterations:
            return "max_iterations";
    }
    return "unknown";
}

QpProblem::QpProblem(Matrix H, Vector f, Matrix A_eq, Vector b_eq, Vector lower, Vector upper)
    : H_(std::move(H)),
      f_(std::move(f)),
      A_eq_(std::move(A_eq)),
      b_eq_(std::move(b_eq)),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
    const Index n = f_.size();
    require_dims(n >= 1, "QpProblem: at least one variable required");
    require_dims(H_.rows() == n && H_.cols() == n, "QpProblem: H must be n x n");
    require_dims(A_eq_.cols() == n || A_eq_.rows() == 0, "QpProblem: A_eq must have n columns");
    if (A_eq_.rows() == 0) A_eq_.resize(0, n);
    require_dims(A_eq_.rows() == b_eq_.size(), "QpProblem: A_eq and b_eq row counts differ");
    require_dims(lower_.size() == n && upper_.size() == n, "QpProblem: bounds must have n entries");
    if ((lower_.array() > upper_.array()).any()) throw std::invalid_argument("QpProblem: lower > upper");
    if (!H_.allFinite() || !f_.allFinite() || !A_eq_.allFinite() || !b_eq_.allFinite()) {
        throw std::invalid_argument("QpProblem: non-finite problem data");
    }
    H_ = 0.5 * (H_ + H_.transpose()).eval();
}

QpProblem::QpProblem(Matrix H, Vector f, Matrix A_eq, Vector b_eq)
    : QpProblem(std::move(H), f, std::move(A_eq), std::move(b_eq), Vector::Constant(f.size(), -kInf),
                Vector::Constant(f.size(), kInf)) {}

bool QpProblem::has_bounds() const {
    return lower_.array().isFinite().any() || upper_.array().isFinite().any();
}

QpProblem QpProblem::scaled_cost(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("QpProblem::scaled_cost: factor must be positive");
    return QpProblem(factor * H_, factor * f_, A_eq_, b_eq_, lower_, upper_);
}

SingularKktError::SingularKktError(Index defect, double res)
    : std::runtime_error("KKT system is singular (equality rank defect " + std::to_string(defect) +
                         ", residual " + std::to_string(res) + ")"),
      rank_defect(defect),
      residual(res) {}

QpSolver::QpSolver(QpSettings settings) : settings_(settings) {
    if (settings_.check_interval < 1) settings_.check_interval = 1;
    if (settings_.max_iter < 1) settings_.max_iter = 1;
}

QpSolution QpSolver::solve(const QpProblem& problem, const QpWarmStart* warm_start) {
    AdmmRun run(problem, settings_);
    return run.run(warm_start);
}

QpSolution solve(const QpProblem& problem, const QpSettings& settings) {
    QpSolver solver(settings);
    return solver.solve(problem);
}

QpSolution solve_equality_only(const Matrix& H, const Vector& f, const Matrix& A_eq, const Vector& b_eq,
                               double regularization) {
    const Index n = f.size();
    require_dims(H.rows() == n && H.cols() == n, "solve_equality_only: H must be n x n");
    require_dims(A_eq.rows() == b_eq.size() && (A_eq.cols() == n || A_eq.rows() == 0),
                 "solve_equality_only: A_eq/b_eq dimensions");
    const Matrix A = A_eq.rows() == 0 ? Matrix(0, n) : A_eq;
    Matrix P = 0.5 * (H + H.transpose());
    P.diagonal().array() += regularization;

    const ScaledQp sc = equilibrate(QpProblem(H, f, A, b_eq), regularization, QpSettings{}.scaling_iterations);
    KktSolve kkt = solve_kkt(sc.P, sc.q, sc.A, sc.b, kPolishDelta);
    kkt.x = sc.D.cwiseProduct(kkt.x);
    kkt.y = sc.E_eq.cwiseProduct(kkt.y) / sc.c;
    const double scale = std::max({1.0, inf_norm(b_eq), inf_norm(f)});
    const double primal = A.rows() > 0 ? inf_norm(A * kkt.x - b_eq) : 0.0;
    const Vector grad = P * kkt.x + f + A.transpose() * kkt.y;
    const double dual = inf_norm(grad);
    if (!kkt.x.allFinite() || primal > 1e-8 * scale || dual > 1e-8 * scale) {
        Index defect = 0;
        if (A.rows() > 0) {
            Eigen::ColPivHouseholderQR<Matrix> qr(A);
            qr.setThreshold(1e-10);
            defect = A.rows() - qr.rank();
        }
        throw SingularKktError(defect, std::max(primal, dual));
    }
    QpSolution out;
    out.z = kkt.x;
    out.eq_multipliers = kkt.y;
    out.box_multipliers = Vector::Zero(n);
    out.status = QpStatus::Optimal;
    out.primal_residual = primal;
    out.dual_residual = dual;
    out.objective = 0.5 * kkt.x.dot(H * kkt.x) + f.dot(kkt.x);
    out.polished = true;
    return out;
}

}  // namespace ddmpc
