#pragma once

#include "ddmpc/config.hpp"

#include <limits>
#include <string>
#include <vector>

namespace ddmpc {

/// Mean final error (cm) below which a four-tank run counts as converged.
inline constexpr double kConvergenceTolerance = 0.5;
/// Number of trailing steps averaged for the final error.
inline constexpr Index kFinalErrorWindow = 50;

struct StepRecord {
    Index t = 0;
    Vector u;
    Vector y;
    Vector x;  // state at time t, before u is applied
    Vector y_target;
    bool controlled = false;  // false during excitation
    double objective = std::numeric_limits<double>::quiet_NaN();
    double alpha_norm = std::numeric_limits<double>::quiet_NaN();
    double sigma_norm = std::numeric_limits<double>::quiet_NaN();
    Vector u_setpoint;  // empty unless the controller reports one
    Vector y_setpoint;
    double pe_min_sv = std::numeric_limits<double>::quiet_NaN();
    int qp_iterations = 0;
    double wall_time = 0.0;  // seconds spent in the controller
};

struct RunSummary {
    double cost = 0.0;  // accumulated while running
    double final_error = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    Index infeasible_events = 0;
    Index solver_warnings = 0;  // QPs that stopped before reaching tolerance
    bool aborted = false;
    std::string abort_reason;
    double controller_seconds = 0.0;
};

struct SimulationLog {
    std::vector<StepRecord> records;
    RunSummary summary;
    bool artificial_setpoint = false;  // nonlinear controller columns present
};

/// Setpoint schedule of a config; LTI controllers get their fixed y_setpoint.
std::vector<SetpointChange> effective_schedule(const ExperimentConfig& cfg);

/// Excitation on steps 0..excitation.steps-1, then the controller up to
/// steps-1. Controller infeasibility is recorded and the previous input is
/// held; plant errors abort the run.
SimulationLog run_experiment(const ExperimentConfig& cfg);

/// sum_{t = t_start}^{t_end} |y_t - y_target(t)|_S^2. An empty window
/// (t_end = t_start - 1) gives 0. Throws std::out_of_range when the window is
/// not covered by the log.
double closed_loop_cost(const SimulationLog& log, const std::vector<SetpointChange>& schedule, const Matrix& S,
                        Index t_start, Index t_end);

/// Mean of |y_t - y_target(t)|_inf over the last `window` controlled steps.
double final_error(const SimulationLog& log, Index window = kFinalErrorWindow);

/// Largest |y_t - y_target(t)|_inf over the last `window` steps.
double final_max_error(const SimulationLog& log, Index window);

}  // namespace ddmpc
