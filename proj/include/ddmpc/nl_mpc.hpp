#pragma once

#include "ddmpc/controller.hpp"
#include "ddmpc/hankel.hpp"

namespace ddmpc {

/// Tuning of the nonlinear data-driven controller with artificial setpoint.
struct NlControllerConfig {
    Index N = 0;  // sliding data-window length
    Index L = 0;  // predictions cover k = 0..L
    Index n = 0;  // assumed order, past-window length
    Matrix Q;
    Matrix R;
    Matrix S;
    double lambda_alpha = 0.0;
    double lambda_sigma = 0.0;
    Vector y_target;
    Box input_box;
    Box setpoint_box;  // admissible artificial inputs, strictly inside input_box
    // false freezes the data window once it is full.
    bool update_data = true;

    Index m() const { return R.rows(); }
    Index p() const { return Q.rows(); }
    Index depth() const { return L + n + 1; }
    Index alpha_dim() const { return N - depth() + 1; }

    void validate() const;
};

/// Ring buffer of the most recent input/output pairs.
class SlidingWindow {
 public:
    SlidingWindow(Index capacity, Index m, Index p);

    void push(const Vector& u, const Vector& y);
    Index size() const { return size_; }
    Index capacity() const { return capacity_; }
    bool full() const { return size_ == capacity_; }

    /// m x size() and p x size(), oldest first.
    Matrix inputs() const { return ordered(u_); }
    Matrix outputs() const { return ordered(y_); }

 private:
    Matrix ordered(const Matrix& ring) const;

    Index capacity_;
    Index size_ = 0;
    Index head_ = 0;  // slot of the oldest sample
    Matrix u_;
    Matrix y_;
};

struct NlOpenLoopSolution {
    Vector u_bar;  // m*(L+1), k = 0..L
    Vector y_bar;  // p*(L+1)
    Vector alpha;
    Vector sigma;  // p*(L+n+1)
    Vector u_s;    // artificial equilibrium
    Vector y_s;
    double objective = 0.0;
    QpSolution qp;

    Vector input(Index k, Index m) const { return u_bar.segment(k * m, m); }
};

/// Decision vector (alpha, sigma, u_bar[-n..L], y_bar[-n..L], u_s, y_s).
QpProblem assemble_nl_qp(const NlControllerConfig& cfg, const SlidingWindow& window, const PastWindow& past);

/// Persistence of excitation of the window's inputs.
PeReport pe_advisory(const SlidingWindow& window, Index order);

class NlDdMpc final : public Controller {
 public:
    explicit NlDdMpc(NlControllerConfig cfg, QpSettings settings = {});

    void observe(const Vector& u, const Vector& y) override;
    /// Requires a full window. Solves and returns the first predicted input.
    Vector compute() override;
    const StepInfo& last_step() const override { return info_; }
    Index input_dim() const override { return cfg_.m(); }
    Index output_dim() const override { return cfg_.p(); }

    void set_target(const Vector& y_target);
    bool ready() const { return window_.full() && past_.full(); }

    const NlControllerConfig& config() const { return cfg_; }
    const SlidingWindow& window() const { return window_; }
    const PastWindow& past() const { return past_; }
    const std::optional<NlOpenLoopSolution>& last_solution() const { return last_; }
    const PeReport& last_pe() const { return pe_; }

    NlOpenLoopSolution solve_open_loop();

 private:
    NlControllerConfig cfg_;
    SlidingWindow window_;
    PastWindow past_;
    QpSolver solver_;
    std::optional<NlOpenLoopSolution> last_;
    PeReport pe_;
    StepInfo info_;
};

}  // namespace ddmpc
