"""One semi-implicit time step of the finite-difference scheme.

For interior nodes j = 1..N the update is

    (u_j' - u_j)/tau_n = (u_{j+1}' - 2u_j' + u_{j-1}')/h_n^2 + a u_j^p
                         - b/(2h_n)^q |u_{j+1} - u_{j-1}|^(q-1) |u_{j+1}' - u_{j-1}'|

(primes at the new level). The remaining absolute value is resolved with the
sign of the old central difference, which for symmetric, unimodal data gives
the tridiagonal system

    -(lam + s_j al_j) u_{j-1}' + (1 + 2 lam) u_j' - (lam - s_j al_j) u_{j+1}' = u_j + tau_n a u_j^p

with s_j = +1 left of the midpoint, -1 right of it and 0 at it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .mesh import Grid, MeshControl, adapt_space_step, adapt_time_step, build_grid, regrid
from .problem import PDEParams

INVARIANT_RTOL = 1e-12


class SchemeInvariantError(RuntimeError):
    """A property the scheme provably preserves was violated (internal defect)."""


class ResolutionExhausted(RuntimeError):
    """The adaptive time step fell below the configured floor."""


def _neumaier_add(s: float, c: float, x: float) -> tuple[float, float]:
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


@dataclass(frozen=True)
class State:
    """Solution at time level n: node values u_0..u_{N+1} on ``grid``.

    Time is held as a compensated pair (``t_sum``, ``t_carry``); ``t`` is
    their sum. The step sizes span many orders of magnitude, so plain
    accumulation would lose the small late steps.
    """

    n: int
    grid: Grid
    values: np.ndarray
    t_sum: float = 0.0
    t_carry: float = field(default=0.0, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.K + 1,):
            raise ValueError(
                f"state has {values.size} values but grid has {self.grid.K + 1} nodes"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def t(self) -> float:
        return self.t_sum + self.t_carry

    @property
    def M(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def midpoint_value(self) -> float:
        return float(self.values[self.grid.m])

    @classmethod
    def initial(cls, data, grid: Grid) -> "State":
        u = np.array(data(grid.nodes), dtype=float)
        u[0] = u[-1] = 0.0
        return cls(0, grid, u)


@dataclass(frozen=True)
class TridiagonalSystem:
    """Interior system Q U' = V.

    ``lower[i]`` and ``upper[i]`` are the full stencil coefficients of row i;
    ``lower[0]`` and ``upper[-1]`` multiply the Dirichlet boundary values and
    are therefore not entries of Q, but they are kept so every row can be
    checked for the same dominance margin.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray
    lam: float

    @property
    def sub(self) -> np.ndarray:
        return self.lower[1:]

    @property
    def super(self) -> np.ndarray:
        return self.upper[:-1]

    def dominance_margin(self) -> np.ndarray:
        return np.abs(self.diag) - np.abs(self.lower) - np.abs(self.upper)

    def to_dense(self) -> np.ndarray:
        n = self.diag.size
        Q = np.diag(self.diag)
        Q[np.arange(1, n), np.arange(n - 1)] = self.sub
        Q[np.arange(n - 1), np.arange(1, n)] = self.super
        return Q


def gradient_coefficients(state: State, tau_n: float, params: PDEParams) -> np.ndarray:
    """alpha_i = b tau_n/(2h)^q |u_{i+1} - u_{i-1}|^(q-1), i = 1..N.

    For q = 1 the power is taken as 1 where the difference is nonzero and the
    coefficient is 0 where it vanishes.
    """
    u = state.values
    h = state.grid.h
    d = np.abs(u[2:] - u[:-2])
    scale = params.b * tau_n / (2.0 * h) ** params.q
    if params.q == 1.0:
        return np.where(d > 0.0, scale, 0.0)
    return scale * d ** (params.q - 1.0)


def assemble_system(
    state: State, tau_n: float, alpha: np.ndarray, params: PDEParams
) -> TridiagonalSystem:
    u = state.values
    lam = tau_n / state.grid.h**2
    if np.any(alpha > lam * (1.0 + INVARIANT_RTOL)):
        i = int(np.argmax(alpha - lam))
        raise SchemeInvariantError(
            f"gradient coefficient exceeds lambda_n at row {i + 1}: "
            f"alpha = {alpha[i]!r}, lambda_n = {lam!r}"
        )
    s = np.sign(u[2:] - u[:-2])
    lower = -lam - s * alpha
    upper = -lam + s * alpha
    diag = np.full(alpha.size, 1.0 + 2.0 * lam)
    interior = np.maximum(u[1:-1], 0.0)
    rhs = u[1:-1] + tau_n * params.a * interior**params.p
    return TridiagonalSystem(lower, diag, upper, rhs, lam)


@njit(cache=True)
def _thomas(lower, diag, upper, rhs):
    n = rhs.size
    c = np.empty(n)
    d = np.empty(n)
    x = np.empty(n)
    beta = diag[0]
    if beta == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    c[0] = upper[0] / beta
    d[0] = rhs[0] / beta
    for i in range(1, n):
        beta = diag[i] - lower[i] * c[i - 1]
        if beta == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        c[i] = upper[i] / beta
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """Thomas algorithm (forward elimination, back substitution).

    No pivoting; valid for the strictly diagonally dominant systems produced
    by :func:`assemble_system`.
    """
    lower = np.ascontiguousarray(system.lower, dtype=float).copy()
    upper = np.ascontiguousarray(system.upper, dtype=float).copy()
    lower[0] = 0.0
    upper[-1] = 0.0
    try:
        return _thomas(
            lower,
            np.ascontiguousarray(system.diag, dtype=float),
            upper,
            np.ascontiguousarray(system.rhs, dtype=float),
        )
    except ZeroDivisionError as exc:
        raise SchemeInvariantError(f"{exc}: matrix is not diagonally dominant") from None


@dataclass(frozen=True)
class StepPlan:
    """Everything computed for a step before the linear solve."""

    tau_n: float
    state: State  # the old state transferred to the step's grid
    alpha: np.ndarray
    system: TridiagonalSystem

    @property
    def lam(self) -> float:
        return self.system.lam


def prepare_step(
    state: State, control: MeshControl, params: PDEParams, adapt_grid: bool = True
) -> StepPlan:
    M = state.M
    tau_n = adapt_time_step(M, control, params)
    if tau_n < control.tau_floor:
        raise ResolutionExhausted(
            f"tau_n = {tau_n!r} below floor {control.tau_floor!r} at n = {state.n} (M = {M!r})"
        )
    if adapt_grid:
        grid = build_grid(adapt_space_step(M, control, params))
        if grid != state.grid:
            state = State(state.n, grid, regrid(state.values, grid), state.t_sum, state.t_carry)
    alpha = gradient_coefficients(state, tau_n, params)
    system = assemble_system(state, tau_n, alpha, params)
    return StepPlan(tau_n, state, alpha, system)


def check_invariants(state: State) -> None:
    """Raise if positivity, symmetry or left-half monotonicity fails."""
    u = state.values
    m = state.grid.m
    if not np.all(np.isfinite(u)):
        raise SchemeInvariantError(f"non-finite values at n = {state.n}")
    M = float(np.max(np.abs(u)))
    tol = INVARIANT_RTOL * M
    if u[0] != 0.0 or u[-1] != 0.0:
        raise SchemeInvariantError(f"boundary values nonzero at n = {state.n}")
    lo = float(np.min(u))
    if lo < -tol:
        raise SchemeInvariantError(f"positivity lost at n = {state.n}: min u = {lo!r}")
    asym = float(np.max(np.abs(u - u[::-1])))
    if asym > tol:
        raise SchemeInvariantError(f"symmetry lost at n = {state.n}: max |u_(m-i) - u_(m+i)| = {asym!r}")
    steps = np.diff(u[1 : m + 1])
    if steps.size and float(np.min(steps)) < -tol:
        j = int(np.argmin(steps)) + 1
        raise SchemeInvariantError(
            f"monotonicity lost at n = {state.n}: u_{j + 1} - u_{j} = {steps[j - 1]!r}"
        )


def advance_step(
    state: State,
    control: MeshControl,
    params: PDEParams,
    adapt_grid: bool = True,
    check: bool = True,
) -> State:
    """Advance one step: adapt (tau_n, h_n), regrid, assemble, solve.

    With ``adapt_grid=False`` the state's own grid is kept (tau_n still adapts).
    """
    plan = prepare_step(state, control, params, adapt_grid)
    grid = plan.state.grid
    values = np.zeros(grid.K + 1)
    values[1:-1] = solve_tridiagonal(plan.system)
    t_sum, t_carry = _neumaier_add(state.t_sum, state.t_carry, plan.tau_n)
    new = State(state.n + 1, grid, values, t_sum, t_carry)
    if check:
        check_invariants(new)
    return new
