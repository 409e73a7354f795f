#pragma once

#include "ddmpc/qp.hpp"
#include "ddmpc/sequence.hpp"

#include <optional>
#include <string>

namespace ddmpc {

/// Raised when a controller QP has no feasible point.
class ControllerInfeasible : public std::runtime_error {
 public:
    ControllerInfeasible(const std::string& what, double initial_window_distance);
    // Relative least-squares distance of the current past window from the
    // span of the data (0 when the window itself is consistent).
    double initial_window_distance;
};

/// Last n input/output measurements, oldest first.
class PastWindow {
 public:
    PastWindow(Index n, Index m, Index p);

    void push(const Vector& u, const Vector& y);
    bool full() const { return count_ >= n_; }
    Index size() const { return std::min(count_, n_); }
    Index horizon() const { return n_; }

    /// m x n and p x n; columns oldest first. Requires full().
    const Matrix& inputs() const { return u_; }
    const Matrix& outputs() const { return y_; }

 private:
    Index n_;
    Index count_ = 0;
    Matrix u_;
    Matrix y_;
};

/// Per-step diagnostics common to all controllers.
struct StepInfo {
    double objective = 0.0;
    double alpha_norm = 0.0;
    double sigma_norm = 0.0;
    std::optional<Vector> u_setpoint;  // artificial setpoint, nonlinear controller only
    std::optional<Vector> y_setpoint;
    double pe_min_sv = 0.0;  // NaN when not computed
    int qp_iterations = 0;
    QpStatus qp_status = QpStatus::Optimal;
    bool solved = false;  // false when the input came from a stored plan
};

/// Receding-horizon controller driven by the experiment runner.
///
/// The runner calls observe(u_t, y_t) after every plant step and compute()
/// whenever it needs the next input.
class Controller {
 public:
    virtual ~Controller() = default;
    virtual void observe(const Vector& u, const Vector& y) = 0;
    virtual Vector compute() = 0;
    virtual const StepInfo& last_step() const = 0;
    virtual Index input_dim() const = 0;
    virtual Index output_dim() const = 0;
};

}  // namespace ddmpc
