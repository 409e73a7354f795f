#include "ddmpc/config.hpp"
#include "ddmpc/csv.hpp"
#include "ddmpc/experiment.hpp"
#include "ddmpc/hankel.hpp"
#include "ddmpc/sweep.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace ddmpc;

namespace {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kControllerFailure = 3, kIo = 4 };

int report_run(const ExperimentConfig& cfg, const SimulationLog& log, const std::string& csv) {
    const RunSummary& s = log.summary;
    std::cout << "config: " << (cfg.name.empty() ? "<unnamed>" : cfg.name) << '\n';
    std::cout << "plant: " << to_string(cfg.plant.kind) << ", controller: " << to_string(cfg.controller) << '\n';
    std::cout << "steps: " << log.records.size() << ", cost window: [" << cfg.first_cost_step() << ", " << cfg.steps - 1
              << "]\n";
    std::cout << std::setprecision(6);
    std::cout << "J = " << s.cost << '\n';
    std::cout << "final error (mean |y - y_target|_inf, last " << kFinalErrorWindow << " steps) = " << s.final_error << '\n';
    std::cout << "converged: " << (s.converged ? "yes" : "no") << '\n';
    std::cout << "infeasible events: " << s.infeasible_events << ", solver warnings: " << s.solver_warnings << '\n';
    std::cout << "controller time: " << s.controller_seconds << " s\n";
    if (!csv.empty()) {
        export_csv(log, csv);
        std::cout << "log written to " << csv << '\n';
    }
    if (s.aborted) {
        std::cerr << "run aborted: " << s.abort_reason << '\n';
        return kControllerFailure;
    }
    return s.infeasible_events > 0 ? kControllerFailure : kOk;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw ConfigError("cannot parse '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

std::vector<double> logspace(const std::string& spec) {
    const std::vector<double> v = parse_list(spec);
    if (v.size() != 3 || !(v[0] > 0.0) || !(v[1] > v[0]) || v[2] < 2 || v[2] != std::floor(v[2])) {
        throw ConfigError("--logspace expects lo,hi,count with 0 < lo < hi and count >= 2");
    }
    std::vector<double> grid;
    const int count = static_cast<int>(v[2]);
    for (int k = 0; k < count; ++k) {
        grid.push_back(std::pow(10.0, std::log10(v[0]) + (std::log10(v[1]) - std::log10(v[0])) * k / (count - 1)));
    }
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven predictive control experiments"};
    app.require_subcommand(1);

    std::string config_name, csv_path;
    long long seed = -1;
    bool print_config = false;
    auto* run = app.add_subcommand("run", "Run an experiment from a builtin name or a YAML file");
    run->add_option("--config,-c", config_name, "Builtin configuration name or YAML path")->required();
    run->add_option("--csv", csv_path, "Write the per-step log to this CSV file");
    run->add_option("--seed", seed, "Override the excitation and noise seed");
    run->add_flag("--print-config", print_config, "Print the resolved configuration and exit");

    std::string param, values, logspace_spec, seeds = "1,2,3", sweep_out;
    unsigned threads = 0;
    auto* sw = app.add_subcommand("sweep", "Closed-loop cost over a parameter grid");
    sw->add_option("--config,-c", config_name, "Base configuration")->default_val("fourtank_nominal");
    sw->add_option("--param,-p", param, "One of lambda_alpha, lambda_sigma, N, L, n, s_bar")->required();
    auto* values_opt = sw->add_option("--values", values, "Comma-separated grid");
    auto* logspace_opt = sw->add_option("--logspace", logspace_spec, "lo,hi,count log-spaced grid");
    values_opt->excludes(logspace_opt);
    sw->add_option("--seeds", seeds, "Comma-separated seeds")->default_val("1,2,3");
    sw->add_option("--threads", threads, "Worker threads (0: all cores)")->default_val(0);
    sw->add_option("--out,-o", sweep_out, "Per-run CSV output");

    std::string data_path, test_path;
    long long order = 0;
    double tolerance = kDefaultRankTolerance;
    auto* pe = app.add_subcommand("check-pe", "Persistence of excitation of the inputs in a data CSV");
    pe->add_option("--data,-d", data_path, "CSV with columns u1.. and y1..")->required();
    pe->add_option("--order", order, "Order to test")->required()->check(CLI::PositiveNumber);
    pe->add_option("--tolerance", tolerance, "Relative singular value threshold")->default_val(kDefaultRankTolerance);

    double traj_tol = kDefaultTrajectoryTolerance;
    auto* vd = app.add_subcommand("validate-data", "Check a trajectory against the span of recorded data");
    vd->add_option("--data,-d", data_path, "Data CSV")->required();
    vd->add_option("--test,-t", test_path, "Trajectory CSV to validate")->required();
    vd->add_option("--tolerance", traj_tol, "Relative residual tolerance")->default_val(kDefaultTrajectoryTolerance);

    auto* demo_nom = app.add_subcommand("demo-lti-nominal", "Nominal controller on the LTI test plant");
    auto* demo_rob = app.add_subcommand("demo-lti-robust", "Robust controller with noisy data on the LTI test plant");
    auto* demo_nl = app.add_subcommand("demo-nonlinear", "Nonlinear controller on the four-tank process");
    for (auto* demo : {demo_nom, demo_rob, demo_nl}) {
        demo->add_option("--csv", csv_path, "Write the per-step log to this CSV file");
        demo->add_option("--seed", seed, "Override the excitation and noise seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*run || *demo_nom || *demo_rob || *demo_nl) {
            std::string name = config_name;
            if (*demo_nom) name = "lti_nominal_demo";
            if (*demo_rob) name = "lti_robust_demo";
            if (*demo_nl) name = "fourtank_nominal";
            ExperimentConfig cfg = resolve_config(name);
            if (seed >= 0) cfg = with_seed(cfg, static_cast<std::uint64_t>(seed));
            if (print_config) {
                std::cout << dump_config(cfg);
                return kOk;
            }
            const std::string csv = csv_path.empty() ? cfg.csv_path : csv_path;
            const SimulationLog log = run_experiment(cfg);
            return report_run(cfg, log, csv);
        }
        if (*sw) {
            const ExperimentConfig base = resolve_config(config_name);
            const std::vector<double> grid = logspace_spec.empty() ? parse_list(values) : logspace(logspace_spec);
            SweepOptions options;
            options.seeds.clear();
            for (double s : parse_list(seeds)) {
                if (s < 0 || s != std::floor(s)) throw ConfigError("seeds must be non-negative integers");
                options.seeds.push_back(static_cast<std::uint64_t>(s));
            }
            options.threads = threads;
            const std::vector<SweepPoint> points = sweep(base, param, grid, options);
            std::cout << std::setprecision(6);
            std::cout << param << ",median_J,median_final_error,good,converged,failed_runs\n";
            for (const SweepPoint& p : points) {
                int failed = 0;
                for (const RunOutcome& r : p.runs) failed += r.error.empty() ? 0 : 1;
                std::cout << p.value << ',' << p.median_cost << ',' << p.median_final_error << ',' << (p.good ? 1 : 0) << ','
                          << (p.converged ? 1 : 0) << ',' << failed << '\n';
            }
            if (!sweep_out.empty()) {
                std::ofstream file(sweep_out);
                if (!file) throw IoError("cannot write " + sweep_out);
                write_sweep_csv(param, points, file);
            }
            return kOk;
        }
        if (*pe) {
            const IoData data = read_io_csv(data_path);
            const PeReport rep = persistence_order_check(data.u, static_cast<Index>(order), tolerance);
            std::cout << std::setprecision(6);
            std::cout << "samples: " << data.u.length() << ", inputs: " << data.u.dim() << '\n';
            std::cout << "order " << rep.order << ": rank " << rep.computed_rank << " of " << rep.required_rank << '\n';
            std::cout << "largest singular value: " << rep.largest_singular_value << '\n';
            std::cout << "smallest retained singular value: " << rep.smallest_retained_singular_value << '\n';
            if (rep.largest_singular_value > 0.0) {
                std::cout << "spread: " << rep.smallest_retained_singular_value / rep.largest_singular_value << '\n';
            }
            std::cout << "persistently exciting: " << (rep.is_pe ? "yes" : "no") << '\n';
            if (!rep.reason.empty()) std::cout << "reason: " << rep.reason << '\n';
            return rep.is_pe ? kOk : kCheckFailed;
        }
        if (*vd) {
            const IoData data = read_io_csv(data_path);
            const IoData test = read_io_csv(test_path);
            const TrajectoryCheck check = validate_trajectory(data.u, data.y, test.u, test.y, traj_tol);
            std::cout << std::setprecision(6);
            std::cout << "relative residual: " << check.residual << '\n';
            std::cout << "trajectory: " << (check.is_trajectory ? "yes" : "no") << '\n';
            return check.is_trajectory ? kOk : kCheckFailed;
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const ControllerInfeasible& e) {
        std::cerr << "controller failure: " << e.what() << '\n';
        return kControllerFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kControllerFailure;
    }
    return kOk;
}
