"""Finite-difference blow-up solver for u_t = u_xx + a|u|^(p-1)u - b|u_x|^q on (-1, 1)."""

from .driver import (
    BlowupReport,
    RunResult,
    StepRecord,
    build_report,
    compare_damping,
    estimate_blowup_time,
    fit_blowup_rate,
    guaranteed_growth_ratio,
    run,
)
from .mesh import Grid, MeshControl, adapt_space_step, adapt_time_step, build_grid, regrid
from .problem import (
    InitialData,
    ParameterError,
    PDEParams,
    build_sine_profile,
    check_assumptions,
    discrete_energy,
    validate_params,
)
from .scheme import State, advance_step, solve_tridiagonal

__all__ = [
    "BlowupReport", "RunResult", "StepRecord", "build_report", "compare_damping",
    "estimate_blowup_time", "fit_blowup_rate", "guaranteed_growth_ratio", "run",
    "Grid", "MeshControl", "adapt_space_step", "adapt_time_step", "build_grid", "regrid",
    "InitialData", "ParameterError", "PDEParams", "build_sine_profile",
    "check_assumptions", "discrete_energy", "validate_params",
    "State", "advance_step", "solve_tridiagonal",
]
