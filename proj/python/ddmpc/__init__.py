"""Data-driven predictive control: Hankel data models, QP solver, controllers and experiments."""

from ._core import (
    ConfigError,
    ControllerInfeasible,
    ExperimentConfig,
    FourTankParams,
    IoError,
    LtiSystem,
    PeReport,
    QpSolution,
    QpStatus,
    RunSummary,
    SimulationLog,
    TrajectoryCheck,
    builtin_config,
    builtin_config_names,
    closed_loop_cost,
    four_tank_equilibrium,
    four_tank_step,
    hankel,
    load_config,
    parse_config,
    persistence_order_check,
    perturbed_four_tank,
    run_experiment,
    solve_qp,
    validate_trajectory,
)

__all__ = [name for name in dir() if not name.startswith("_")]
