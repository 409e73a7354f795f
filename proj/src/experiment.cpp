#include "ddmpc/experiment.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

namespace ddmpc {

namespace {

std::unique_ptr<Plant> make_plant(const PlantSpec& spec) {
    NoiseModel noise = spec.noise_bound > 0.0 ? NoiseModel::uniform_inf(spec.noise_bound, spec.noise_seed) : NoiseModel::none();
    if (spec.kind == PlantKind::FourTank) {
        return std::make_unique<FourTankPlant>(spec.effective_four_tank(), spec.x0, spec.sample_time, spec.substeps,
                                               std::move(noise));
    }
    return std::make_unique<LtiPlant>(spec.lti, spec.x0, std::move(noise));
}

Box controller_input_box(const ExperimentConfig& cfg) {
    return cfg.controller == ControllerKind::Nonlinear ? cfg.nonlinear.input_box : cfg.lti.input_box;
}

}  // namespace

std::vector<SetpointChange> effective_schedule(const ExperimentConfig& cfg) {
    if (cfg.controller == ControllerKind::Nonlinear) return cfg.schedule;
    return {{0, cfg.lti.y_setpoint}};
}

SimulationLog run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    using Clock = std::chrono::steady_clock;

    SimulationLog log;
    log.artificial_setpoint = cfg.controller == ControllerKind::Nonlinear;
    log.records.reserve(static_cast<std::size_t>(cfg.steps));
    const std::vector<SetpointChange> schedule = effective_schedule(cfg);
    const Index m = cfg.plant.input_dim();
    const Index cost_from = cfg.first_cost_step();

    std::unique_ptr<Plant> plant = make_plant(cfg.plant);
    std::mt19937_64 rng(cfg.excitation.seed);
    std::vector<std::uniform_real_distribution<double>> excitation;
    for (Index i = 0; i < m; ++i) excitation.emplace_back(cfg.excitation.lower(i), cfg.excitation.upper(i));

    std::unique_ptr<Controller> controller;
    NlDdMpc* nonlinear = nullptr;
    if (cfg.controller == ControllerKind::Nonlinear) {
        NlControllerConfig c = cfg.nonlinear;
        c.y_target = schedule.front().y_target;
        auto owned = std::make_unique<NlDdMpc>(c);
        nonlinear = owned.get();
        controller = std::move(owned);
    }
    Matrix data_u(m, cfg.excitation.steps);
    Matrix data_y(cfg.plant.output_dim(), cfg.excitation.steps);
    const Box input_box = controller_input_box(cfg);
    Vector last_input = Vector::Zero(m);
    Vector active_target = schedule.front().y_target;

    for (Index t = 0; t < cfg.steps; ++t) {
        StepRecord rec;
        rec.t = t;
        rec.x = plant->state();
        rec.y_target = target_at(schedule, t);

        Vector u(m);
        if (t < cfg.excitation.steps) {
            for (Index i = 0; i < m; ++i) u(i) = excitation[static_cast<std::size_t>(i)](rng);
        } else {
            if (!controller) {
                DataBuffer data{Sequence(data_u), Sequence(data_y)};
                const LtiControllerConfig& c = cfg.lti;
                if (cfg.controller == ControllerKind::LtiNominal) {
                    controller = std::make_unique<NominalDdMpc>(c, data);
                } else {
                    controller = std::make_unique<RobustDdMpc>(c, data);
                }
                for (Index k = cfg.excitation.steps - c.n; k < cfg.excitation.steps; ++k) {
                    controller->observe(data_u.col(k), data_y.col(k));
                }
            }
            if (nonlinear && !same_values(rec.y_target, active_target)) {
                nonlinear->set_target(rec.y_target);
                active_target = rec.y_target;
            }
            rec.controlled = true;
            const auto start = Clock::now();
            try {
                u = controller->compute();
                const StepInfo& info = controller->last_step();
                if (info.solved) {
                    rec.objective = info.objective;
                    rec.alpha_norm = info.alpha_norm;
                    rec.sigma_norm = info.sigma_norm;
                    rec.pe_min_sv = info.pe_min_sv;
                    rec.qp_iterations = info.qp_iterations;
                    if (info.u_setpoint) rec.u_setpoint = *info.u_setpoint;
                    if (info.y_setpoint) rec.y_setpoint = *info.y_setpoint;
                    if (info.qp_status != QpStatus::Optimal) ++log.summary.solver_warnings;
                }
            } catch (const ControllerInfeasible&) {
                ++log.summary.infeasible_events;
                u = input_box.clamp(last_input);
            }
            rec.wall_time = cfg.record_wall_time ? std::chrono::duration<double>(Clock::now() - start).count() : 0.0;
            log.summary.controller_seconds += rec.wall_time;
        }

        try {
            rec.y = plant->measure(u);
            plant->advance(u);
        } catch (const std::exception& e) {
            log.summary.aborted = true;
            log.summary.abort_reason = std::string("plant error at step ") + std::to_string(t) + ": " + e.what();
            break;
        }
        rec.u = u;
        last_input = u;
        if (t < cfg.excitation.steps) {
            data_u.col(t) = u;
            data_y.col(t) = rec.y;
        }
        if (controller) controller->observe(u, rec.y);
        if (t >= cost_from) {
            const Vector e = rec.y - rec.y_target;
            log.summary.cost += e.dot(cfg.cost_weight * e);
        }
        log.records.push_back(std::move(rec));
    }

    log.summary.final_error = final_error(log);
    log.summary.converged = !log.summary.aborted && std::isfinite(log.summary.final_error) &&
                            log.summary.final_error <= kConvergenceTolerance;
    return log;
}

double closed_loop_cost(const SimulationLog& log, const std::vector<SetpointChange>& schedule, const Matrix& S,
                        Index t_start, Index t_end) {
    if (t_end == t_start - 1) return 0.0;
    if (t_start < 0 || t_end < t_start || t_end >= static_cast<Index>(log.records.size())) {
        throw std::out_of_range("closed_loop_cost: window [" + std::to_string(t_start) + ", " + std::to_string(t_end) +
                                "] not covered by the log");
    }
    double cost = 0.0;
    for (Index t = t_start; t <= t_end; ++t) {
        const StepRecord& rec = log.records[static_cast<std::size_t>(t)];
        require_dims(rec.y.size() == S.rows(), "closed_loop_cost: weight does not match the outputs");
        const Vector e = rec.y - target_at(schedule, rec.t);
        cost += e.dot(S * e);
    }
    return cost;
}

double final_max_error(const SimulationLog& log, Index window) {
    double worst = 0.0;
    Index used = 0;
    for (auto it = log.records.rbegin(); it != log.records.rend() && used < window; ++it) {
        if (!it->controlled) break;
        worst = std::max(worst, (it->y - it->y_target).lpNorm<Eigen::Infinity>());
        ++used;
    }
    return used == 0 ? std::numeric_limits<double>::quiet_NaN() : worst;
}

double final_error(const SimulationLog& log, Index window) {
    double sum = 0.0;
    Index used = 0;
    for (auto it = log.records.rbegin(); it != log.records.rend() && used < window; ++it) {
        if (!it->controlled) break;
        sum += (it->y - it->y_target).lpNorm<Eigen::Infinity>();
        ++used;
    }
    return used == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(used);
}

}  // namespace ddmpc
