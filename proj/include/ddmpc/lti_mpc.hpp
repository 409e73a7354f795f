#pragma once

#include "ddmpc/controller.hpp"
#include "ddmpc/hankel.hpp"

#include <deque>

namespace ddmpc {

/// Tuning of the nominal and robust LTI controllers.
struct LtiControllerConfig {
    Index L = 0;  // prediction horizon
    Index n = 0;  // assumed system order, also the past-window length
    Matrix Q;
    Matrix R;
    Vector u_setpoint;
    Vector y_setpoint;
    Box input_box;
    Box output_box;  // ignored by the robust controller
    // Robust controller only.
    double lambda_alpha = 0.0;
    double lambda_sigma = 0.0;
    double eps_bar = 0.0;

    Index m() const { return R.rows(); }
    Index p() const { return Q.rows(); }

    /// Throws ConfigError. `robust` additionally requires L >= 2n and positive
    /// lambda_alpha, lambda_sigma, eps_bar.
    void validate(bool robust) const;
};

/// Offline input/output data.
struct DataBuffer {
    Sequence u;
    Sequence y;

    Index length() const { return u.length(); }
};

struct OpenLoopSolution {
    Vector u_bar;  // m*L, k = 0..L-1
    Vector y_bar;  // p*L
    Vector alpha;
    Vector sigma;  // p*(L+n), zero for the nominal controller
    double objective = 0.0;
    QpSolution qp;

    Vector input(Index k, Index m) const { return u_bar.segment(k * m, m); }
};

/// Column count of the depth-(L+n) Hankel matrix, i.e. the length of alpha.
Index nominal_alpha_dim(Index N, Index L, Index n);

/// Decision vector (alpha, u_bar[-n..L-1], y_bar[-n..L-1]) for the nominal
/// problem. Boxes apply to steps 0..L-1.
QpProblem assemble_nominal_qp(const LtiControllerConfig& cfg, const DataBuffer& data, const PastWindow& past);

/// Decision vector (alpha, sigma, u_bar, y_bar); sigma relaxes every output
/// row. Only input bounds are imposed.
QpProblem assemble_robust_qp(const LtiControllerConfig& cfg, const DataBuffer& data, const PastWindow& past);

/// Least-squares distance of the past window from the data span (relative).
double initial_window_distance(const DataBuffer& data, const PastWindow& past, Index L);

/// Shared machinery for both LTI controllers.
class LtiDdMpcBase : public Controller {
 public:
    void observe(const Vector& u, const Vector& y) override { past_.push(u, y); }
    const StepInfo& last_step() const override { return info_; }
    Index input_dim() const override { return cfg_.m(); }
    Index output_dim() const override { return cfg_.p(); }

    const LtiControllerConfig& config() const { return cfg_; }
    const DataBuffer& data() const { return data_; }
    const PastWindow& past() const { return past_; }
    PastWindow& past() { return past_; }
    /// Persistence of excitation of the data at order L+2n.
    const PeReport& data_pe() const { return data_pe_; }
    const std::optional<OpenLoopSolution>& last_solution() const { return last_; }

    /// Solves the open-loop problem for the current past window.
    OpenLoopSolution solve_open_loop();

 protected:
    LtiDdMpcBase(LtiControllerConfig cfg, DataBuffer data, bool robust, QpSettings settings);

    LtiControllerConfig cfg_;
    DataBuffer data_;
    bool robust_;
    PastWindow past_;
    PeReport data_pe_;
    QpSolver solver_;
    std::optional<OpenLoopSolution> last_;
    StepInfo info_;
};

/// Nominal scheme: solve every step, apply the first predicted input.
class NominalDdMpc final : public LtiDdMpcBase {
 public:
    NominalDdMpc(LtiControllerConfig cfg, DataBuffer data, QpSettings settings = {});

    Vector compute() override;
    /// observe(u_prev, y_prev) followed by compute().
    Vector step(const Vector& u_prev, const Vector& y_prev);
};

/// Robust multi-step scheme: solve every n steps and apply the first n
/// predicted inputs open loop.
class RobustDdMpc final : public LtiDdMpcBase {
 public:
    RobustDdMpc(LtiControllerConfig cfg, DataBuffer data, QpSettings settings = {});

    Vector compute() override;
    Index queued() const { return static_cast<Index>(plan_.size()); }

 private:
    std::deque<Vector> plan_;
};

}  // namespace ddmpc
