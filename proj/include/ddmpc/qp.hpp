#pragma once

#include "ddmpc/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddmpc {

enum class QpStatus { Optimal, PrimalInfeasible, MaxIterations };

std::string to_string(QpStatus status);

struct QpSettings {
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    int max_iter = 20000;
    // Ridge added to the Hessian diagonal so PSD-only problems stay solvable.
    double regularization = 1e-10;

    // ADMM internals.
    double rho = 0.1;
    double sigma = 1e-6;
    double relaxation = 1.6;
    int scaling_iterations = 10;
    int check_interval = 25;
    bool adaptive_rho = true;
    // Active-set refinement of ADMM iterates through a direct KKT solve.
    bool polish = true;
    double infeasibility_tol = 1e-7;
};

/// Dense convex QP
///
///   minimize   1/2 z' H z + f' z
///   subject to A_eq z = b_eq,  lower <= z <= upper.
///
/// H is symmetrized on construction. Infinite bounds are allowed.
class QpProblem {
 public:
    QpProblem(Matrix H, Vector f, Matrix A_eq, Vector b_eq, Vector lower, Vector upper);
    /// No bounds.
    QpProblem(Matrix H, Vector f, Matrix A_eq, Vector b_eq);

    const Matrix& H() const { return H_; }
    const Vector& f() const { return f_; }
    const Matrix& A_eq() const { return A_eq_; }
    const Vector& b_eq() const { return b_eq_; }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

    Index num_variables() const { return f_.size(); }
    Index num_equalities() const { return b_eq_.size(); }
    bool has_bounds() const;

    double objective(const Vector& z) const { return 0.5 * z.dot(H_ * z) + f_.dot(z); }

    /// Same problem with H and f multiplied by `factor` > 0.
    QpProblem scaled_cost(double factor) const;

 private:
    Matrix H_;
    Vector f_;
    Matrix A_eq_;
    Vector b_eq_;
    Vector lower_;
    Vector upper_;
};

/// Primal/dual pair. Multipliers follow the sign convention
///   H z + f + A_eq' eq_multipliers + box_multipliers = 0,
/// with box_multipliers_i > 0 at an active upper bound and < 0 at a lower one.
struct QpSolution {
    Vector z;
    Vector eq_multipliers;
    Vector box_multipliers;
    QpStatus status = QpStatus::MaxIterations;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0;
    bool polished = false;
};

struct QpWarmStart {
    Vector z;
    Vector eq_multipliers;
    Vector box_multipliers;
};

/// Raised by the direct equality path when the KKT system has no solution.
class SingularKktError : public std::runtime_error {
 public:
    SingularKktError(Index rank_defect, double residual);
    Index rank_defect;
    double residual;
};

/// Operator-splitting (ADMM) QP solver with a factorized reduced KKT system
/// and active-set polishing.
///
/// Holds per-call workspace only. One instance may be reused across
/// sequential calls; do not share an instance between threads.
class QpSolver {
 public:
    explicit QpSolver(QpSettings settings = {});

    QpSolution solve(const QpProblem& problem, const QpWarmStart* warm_start = nullptr);

    const QpSettings& settings() const { return settings_; }

 private:
    QpSettings settings_;
};

QpSolution solve(const QpProblem& problem, const QpSettings& settings = {});

/// Direct solve of the equality-constrained KKT system (no bounds).
///
/// Redundant but consistent equality rows are tolerated. Throws
/// SingularKktError when the equations cannot be satisfied.
QpSolution solve_equality_only(const Matrix& H, const Vector& f, const Matrix& A_eq, const Vector& b_eq,
                               double regularization = QpSettings{}.regularization);

}  // namespace ddmpc
