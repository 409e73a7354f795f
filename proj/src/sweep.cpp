#include "ddmpc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

namespace ddmpc {

namespace {

Index as_index(const std::string& name, double value) {
    if (value < 1.0 || value != std::floor(value)) throw ConfigError(name + " must be a positive integer");
    return static_cast<Index>(value);
}

}  // namespace

std::vector<std::string> sweep_parameters() { return {"lambda_alpha", "lambda_sigma", "N", "L", "n", "s_bar"}; }

ExperimentConfig with_parameter(const ExperimentConfig& base, const std::string& name, double value) {
    ExperimentConfig cfg = base;
    const bool nonlinear = cfg.controller == ControllerKind::Nonlinear;
    if (name == "lambda_alpha") {
        (nonlinear ? cfg.nonlinear.lambda_alpha : cfg.lti.lambda_alpha) = value;
    } else if (name == "lambda_sigma") {
        (nonlinear ? cfg.nonlinear.lambda_sigma : cfg.lti.lambda_sigma) = value;
    } else if (name == "L") {
        (nonlinear ? cfg.nonlinear.L : cfg.lti.L) = as_index(name, value);
    } else if (name == "n") {
        (nonlinear ? cfg.nonlinear.n : cfg.lti.n) = as_index(name, value);
    } else if (name == "N") {
        if (!nonlinear) throw ConfigError("N applies to the nonlinear controller");
        cfg.nonlinear.N = as_index(name, value);
        cfg.excitation.steps = cfg.nonlinear.N;
    } else if (name == "s_bar") {
        if (!nonlinear) throw ConfigError("s_bar applies to the nonlinear controller");
        cfg.nonlinear.S = value * Matrix::Identity(cfg.nonlinear.S.rows(), cfg.nonlinear.S.cols());
    } else {
        throw ConfigError("unknown sweep parameter '" + name + "'");
    }
    return cfg;
}

ExperimentConfig with_seed(const ExperimentConfig& base, std::uint64_t seed) {
    ExperimentConfig cfg = base;
    cfg.excitation.seed = seed;
    cfg.plant.noise_seed = seed;
    return cfg;
}

std::vector<RunOutcome> run_batch(const std::vector<ExperimentConfig>& configs, unsigned threads) {
    std::vector<RunOutcome> out(configs.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(configs.size(), 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            RunOutcome& r = out[i];
            r.seed = configs[i].excitation.seed;
            try {
                const SimulationLog log = run_experiment(configs[i]);
                r.cost = log.summary.cost;
                r.final_error = log.summary.final_error;
                r.converged = log.summary.converged;
                r.infeasible_events = log.summary.infeasible_events;
                if (log.summary.aborted) r.error = log.summary.abort_reason;
            } catch (const std::exception& e) {
                r.cost = std::numeric_limits<double>::infinity();
                r.final_error = std::numeric_limits<double>::infinity();
                r.converged = false;
                r.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty list");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<SweepPoint> sweep(const ExperimentConfig& base, const std::string& parameter,
                              const std::vector<double>& grid, const SweepOptions& options) {
    if (options.seeds.empty()) throw std::invalid_argument("sweep: no seeds");
    const std::vector<std::string> known = sweep_parameters();
    if (std::find(known.begin(), known.end(), parameter) == known.end()) {
        throw ConfigError("unknown sweep parameter '" + parameter + "'");
    }
    std::vector<ExperimentConfig> configs;
    std::vector<std::string> setup_errors;
    for (double value : grid) {
        for (std::uint64_t seed : options.seeds) {
            configs.push_back(with_seed(base, seed));
            setup_errors.emplace_back();
            try {
                configs.back() = with_seed(with_parameter(base, parameter, value), seed);
            } catch (const std::exception& e) {
                setup_errors.back() = e.what();
            }
        }
    }
    std::vector<ExperimentConfig> runnable;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (setup_errors[i].empty()) {
            runnable.push_back(configs[i]);
            index.push_back(i);
        }
    }
    const std::vector<RunOutcome> done = run_batch(runnable, options.threads);
    std::vector<RunOutcome> all(configs.size());
    for (std::size_t k = 0; k < done.size(); ++k) all[index[k]] = done[k];
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!setup_errors[i].empty()) {
            all[i].seed = configs[i].excitation.seed;
            all[i].cost = std::numeric_limits<double>::infinity();
            all[i].final_error = std::numeric_limits<double>::infinity();
            all[i].error = setup_errors[i];
        }
    }

    std::vector<SweepPoint> points;
    const std::size_t per_point = options.seeds.size();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        SweepPoint point;
        point.value = grid[g];
        std::vector<double> costs, errors;
        for (std::size_t s = 0; s < per_point; ++s) {
            const RunOutcome& r = all[g * per_point + s];
            point.runs.push_back(r);
            costs.push_back(r.cost);
            errors.push_back(r.final_error);
        }
        point.median_cost = median(costs);
        point.median_final_error = median(errors);
        point.good = point.median_cost <= options.cost_threshold;
        point.converged = point.median_final_error <= kConvergenceTolerance;
        points.push_back(std::move(point));
    }
    return points;
}

void write_sweep_csv(const std::string& parameter, const std::vector<SweepPoint>& points, std::ostream& out) {
    out << "parameter,value,seed,J,final_error,converged,error\n";
    for (const SweepPoint& point : points) {
        for (const RunOutcome& r : point.runs) {
            std::string error = r.error;
            std::replace(error.begin(), error.end(), ',', ';');
            std::replace(error.begin(), error.end(), '\n', ' ');
            out << parameter << ',' << point.value << ',' << r.seed << ',' << r.cost << ',' << r.final_error << ','
                << (r.converged ? 1 : 0) << ',' << error << '\n';
        }
    }
}

}  // namespace ddmpc
