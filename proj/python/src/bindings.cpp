#include "ddmpc/config.hpp"
#include "ddmpc/csv.hpp"
#include "ddmpc/experiment.hpp"
#include "ddmpc/hankel.hpp"
#include "ddmpc/plant.hpp"
#include "ddmpc/qp.hpp"
#include "ddmpc/sweep.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace ddmpc;

namespace {

// Columns are time steps, rows are channels.
Matrix stack_records(const SimulationLog& log, Vector StepRecord::*field) {
    if (log.records.empty()) return Matrix();
    const Index rows = (log.records.front().*field).size();
    Matrix out(rows, static_cast<Index>(log.records.size()));
    for (std::size_t t = 0; t < log.records.size(); ++t) out.col(static_cast<Index>(t)) = log.records[t].*field;
    return out;
}

Vector scalar_records(const SimulationLog& log, double StepRecord::*field) {
    Vector out(static_cast<Index>(log.records.size()));
    for (std::size_t t = 0; t < log.records.size(); ++t) out(static_cast<Index>(t)) = log.records[t].*field;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Data-driven predictive control core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<ControllerInfeasible>(m, "ControllerInfeasible", PyExc_RuntimeError);

    // Hankel matrices and data checks. Sequences are (channels x samples).
    m.def(
        "hankel", [](const Matrix& samples, Index depth) { return hankel_entries(samples, depth); }, py::arg("samples"),
        py::arg("depth"), "Depth-L block-Hankel matrix of a (channels x samples) array.");

    py::class_<PeReport>(m, "PeReport")
        .def_readonly("order", &PeReport::order)
        .def_readonly("required_rank", &PeReport::required_rank)
        .def_readonly("computed_rank", &PeReport::computed_rank)
        .def_readonly("smallest_retained_singular_value", &PeReport::smallest_retained_singular_value)
        .def_readonly("largest_singular_value", &PeReport::largest_singular_value)
        .def_readonly("is_pe", &PeReport::is_pe)
        .def_readonly("reason", &PeReport::reason);
    m.def(
        "persistence_order_check",
        [](const Matrix& samples, Index order, double tol) { return persistence_order_check(Sequence(samples), order, tol); },
        py::arg("samples"), py::arg("order"), py::arg("rank_tolerance") = kDefaultRankTolerance);

    py::class_<TrajectoryCheck>(m, "TrajectoryCheck")
        .def_readonly("is_trajectory", &TrajectoryCheck::is_trajectory)
        .def_readonly("residual", &TrajectoryCheck::residual)
        .def_readonly("absolute_residual", &TrajectoryCheck::absolute_residual)
        .def_readonly("alpha", &TrajectoryCheck::alpha);
    m.def(
        "validate_trajectory",
        [](const Matrix& u_data, const Matrix& y_data, const Matrix& u_test, const Matrix& y_test, double tol) {
            return validate_trajectory(Sequence(u_data), Sequence(y_data), Sequence(u_test), Sequence(y_test), tol);
        },
        py::arg("u_data"), py::arg("y_data"), py::arg("u_test"), py::arg("y_test"),
        py::arg("tolerance") = kDefaultTrajectoryTolerance);

    // QP solver.
    py::enum_<QpStatus>(m, "QpStatus")
        .value("Optimal", QpStatus::Optimal)
        .value("PrimalInfeasible", QpStatus::PrimalInfeasible)
        .value("MaxIterations", QpStatus::MaxIterations);
    py::class_<QpSolution>(m, "QpSolution")
        .def_readonly("z", &QpSolution::z)
        .def_readonly("eq_multipliers", &QpSolution::eq_multipliers)
        .def_readonly("box_multipliers", &QpSolution::box_multipliers)
        .def_readonly("status", &QpSolution::status)
        .def_readonly("iterations", &QpSolution::iterations)
        .def_readonly("objective", &QpSolution::objective)
        .def_readonly("primal_residual", &QpSolution::primal_residual)
        .def_readonly("dual_residual", &QpSolution::dual_residual);
    m.def(
        "solve_qp",
        [](const Matrix& H, const Vector& f, std::optional<Matrix> A_eq, std::optional<Vector> b_eq,
           std::optional<Vector> lower, std::optional<Vector> upper) {
            const Index n = f.size();
            const Matrix A = A_eq.value_or(Matrix(0, n));
            const Vector b = b_eq.value_or(Vector(0));
            const Vector lo = lower.value_or(Vector::Constant(n, -std::numeric_limits<double>::infinity()));
            const Vector hi = upper.value_or(Vector::Constant(n, std::numeric_limits<double>::infinity()));
            return solve(QpProblem(H, f, A, b, lo, hi));
        },
        py::arg("H"), py::arg("f"), py::arg("A_eq") = py::none(), py::arg("b_eq") = py::none(),
        py::arg("lower") = py::none(), py::arg("upper") = py::none(),
        "minimize 1/2 z'Hz + f'z subject to A_eq z = b_eq, lower <= z <= upper.");

    // Plants.
    py::class_<FourTankParams>(m, "FourTankParams")
        .def(py::init<>())
        .def_readwrite("A1", &FourTankParams::A1)
        .def_readwrite("A2", &FourTankParams::A2)
        .def_readwrite("A3", &FourTankParams::A3)
        .def_readwrite("A4", &FourTankParams::A4)
        .def_readwrite("a1", &FourTankParams::a1)
        .def_readwrite("a2", &FourTankParams::a2)
        .def_readwrite("a3", &FourTankParams::a3)
        .def_readwrite("a4", &FourTankParams::a4)
        .def_readwrite("gamma1", &FourTankParams::gamma1)
        .def_readwrite("gamma2", &FourTankParams::gamma2)
        .def_readwrite("g", &FourTankParams::g);
    m.def("four_tank_step", &euler_step, py::arg("params"), py::arg("x"), py::arg("u"), py::arg("sample_time") = 1.5,
          py::arg("substeps") = 1);
    m.def("four_tank_equilibrium", &four_tank_equilibrium, py::arg("params"), py::arg("u"));
    m.def("perturbed_four_tank", &perturbed_four_tank, py::arg("params"), py::arg("spread"), py::arg("seed"));

    py::class_<LtiSystem>(m, "LtiSystem")
        .def(py::init([](Matrix A, Matrix B, Matrix C, std::optional<Matrix> D) {
                 LtiSystem s{A, B, C, D.value_or(Matrix::Zero(C.rows(), B.cols()))};
                 s.validate();
                 return s;
             }),
             py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D") = py::none())
        .def_readonly("A", &LtiSystem::A)
        .def_readonly("B", &LtiSystem::B)
        .def_readonly("C", &LtiSystem::C)
        .def_readonly("D", &LtiSystem::D)
        .def(
            "simulate",
            [](const LtiSystem& s, const Vector& x0, const Matrix& u) {
                const LtiTrajectory tr = s.simulate(x0, Sequence(u));
                return py::make_tuple(tr.states, tr.outputs.samples());
            },
            py::arg("x0"), py::arg("u"), "Returns (states n x (N+1), outputs p x N).");

    // Experiments.
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("name", &ExperimentConfig::name)
        .def_readwrite("steps", &ExperimentConfig::steps)
        .def_property_readonly("cost_weight", [](const ExperimentConfig& c) { return c.cost_weight; })
        .def("first_cost_step", &ExperimentConfig::first_cost_step)
        .def("to_yaml", [](const ExperimentConfig& c) { return dump_config(c); })
        .def("with_parameter", &with_parameter, py::arg("name"), py::arg("value"))
        .def("with_seed", &with_seed, py::arg("seed"))
        .def("validate", &ExperimentConfig::validate)
        .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; });
    m.def("builtin_config_names", &builtin_config_names);
    m.def("builtin_config", &builtin_config, py::arg("name"));
    m.def("load_config", &resolve_config, py::arg("name_or_path"), "Builtin name or YAML path.");
    m.def("parse_config", &parse_config, py::arg("yaml"));

    py::class_<RunSummary>(m, "RunSummary")
        .def_readonly("cost", &RunSummary::cost)
        .def_readonly("final_error", &RunSummary::final_error)
        .def_readonly("converged", &RunSummary::converged)
        .def_readonly("infeasible_events", &RunSummary::infeasible_events)
        .def_readonly("solver_warnings", &RunSummary::solver_warnings)
        .def_readonly("aborted", &RunSummary::aborted)
        .def_readonly("abort_reason", &RunSummary::abort_reason)
        .def_readonly("controller_seconds", &RunSummary::controller_seconds);

    py::class_<SimulationLog>(m, "SimulationLog")
        .def_readonly("summary", &SimulationLog::summary)
        .def("__len__", [](const SimulationLog& l) { return l.records.size(); })
        .def_property_readonly("u", [](const SimulationLog& l) { return stack_records(l, &StepRecord::u); })
        .def_property_readonly("y", [](const SimulationLog& l) { return stack_records(l, &StepRecord::y); })
        .def_property_readonly("x", [](const SimulationLog& l) { return stack_records(l, &StepRecord::x); })
        .def_property_readonly("y_target", [](const SimulationLog& l) { return stack_records(l, &StepRecord::y_target); })
        .def_property_readonly("objective", [](const SimulationLog& l) { return scalar_records(l, &StepRecord::objective); })
        .def("write_csv", &export_csv, py::arg("path"));

    m.def(
        "run_experiment",
        [](const ExperimentConfig& cfg) {
            py::gil_scoped_release release;
            return run_experiment(cfg);
        },
        py::arg("config"));
    m.def(
        "closed_loop_cost",
        [](const SimulationLog& log, const ExperimentConfig& cfg, std::optional<Index> t_start, std::optional<Index> t_end) {
            return closed_loop_cost(log, effective_schedule(cfg), cfg.cost_weight, t_start.value_or(cfg.first_cost_step()),
                                    t_end.value_or(static_cast<Index>(log.records.size()) - 1));
        },
        py::arg("log"), py::arg("config"), py::arg("t_start") = py::none(), py::arg("t_end") = py::none());
}
