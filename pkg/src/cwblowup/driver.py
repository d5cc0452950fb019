"""Time loop, blow-up/decay detection, blow-up time and rate estimation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .mesh import MeshControl, adapt_space_step, adapt_time_step, build_grid
from .problem import InitialData, ParameterError, PDEParams, validate_params
from .scheme import ResolutionExhausted, State, advance_step

log = logging.getLogger(__name__)

BLOWUP = "blow-up"
DECAY = "decay"
INCONCLUSIVE = "inconclusive"


class BlowupNotDetected(ValueError):
    pass


@dataclass(frozen=True)
class StepRecord:
    """One row of the run history.

    ``tau_n``, ``h_n`` and ``N_n`` describe the step taken *from* level n
    (for the terminal record, the step that would have been taken).
    ``h_n`` is the spacing of the grid actually used, not the unrounded bound.
    """

    n: int
    t_n: float
    tau_n: float
    h_n: float
    N_n: int
    M_n: float


@dataclass
class RunResult:
    history: list[StepRecord]
    final_state: State
    outcome: str
    stop_reason: str
    snapshots: list[State] = field(default_factory=list)

    @property
    def n_stop(self) -> int:
        return self.final_state.n

    @property
    def M_0(self) -> float:
        return self.history[0].M_n if self.history else self.final_state.M


@dataclass(frozen=True)
class BlowupReport:
    outcome: str
    stop_reason: str
    n_stop: int
    t_stop: float
    M_0: float
    M_final: float
    p: float
    q: float
    r_exponent: float
    lower_bound: float
    T_star: float | None = None
    C_fit: float | None = None
    exponent_fit: float | None = None
    rho_min: float | None = None
    energy_0: float | None = None

    @property
    def theoretical_exponent(self) -> float:
        return 1.0 / (self.p - 1.0)


def _record(state: State, control: MeshControl, params: PDEParams) -> StepRecord:
    M = state.M
    grid = build_grid(adapt_space_step(M, control, params))
    return StepRecord(state.n, state.t, adapt_time_step(M, control, params), grid.h, grid.N, M)


def initial_state(data: InitialData, params: PDEParams, control: MeshControl) -> State:
    """Sample u0 on the grid adapted to its own sup-norm."""
    coarse = build_grid(control.h_base)
    M0 = float(np.max(np.abs(data(coarse.nodes))))
    return State.initial(data, build_grid(adapt_space_step(M0, control, params)))


def run(
    data: InitialData,
    params: PDEParams,
    control: MeshControl,
    snapshot_every: int = 0,
    decay_threshold: float = 0.1,
    decay_window: int = 100,
) -> RunResult:
    """Iterate the scheme until blow-up, decay, or a resolution/iteration limit.

    Blow-up: M_n >= M_stop. Decay: M_n < decay_threshold * M_0 with the last
    ``decay_window`` recorded maxima non-increasing. Otherwise the run ends
    inconclusive when n reaches n_max or tau_n drops below tau_floor.
    """
    validate_params(params)
    state = initial_state(data, params, control)
    history: list[StepRecord] = []
    snapshots: list[State] = []
    M0 = state.M

    while True:
        if state.n >= control.n_max:
            return RunResult(history, state, INCONCLUSIVE, "iteration cap reached", snapshots)
        rec = _record(state, control, params)
        history.append(rec)
        if snapshot_every and state.n % snapshot_every == 0:
            snapshots.append(state)
        if rec.M_n >= control.M_stop:
            log.info("blow-up threshold reached at n=%d, t=%.6e", state.n, state.t)
            return RunResult(history, state, BLOWUP, "M_n reached M_stop", snapshots)
        if rec.M_n < decay_threshold * M0 and len(history) >= decay_window:
            tail = [r.M_n for r in history[-decay_window:]]
            if all(b <= a for a, b in zip(tail, tail[1:])):
                log.info("decay detected at n=%d", state.n)
                return RunResult(history, state, DECAY, "M_n decayed below threshold", snapshots)
        if rec.tau_n < control.tau_floor:
            return RunResult(history, state, INCONCLUSIVE, "tau_n below tau_floor", snapshots)
        try:
            state = advance_step(state, control, params)
        except ResolutionExhausted:
            return RunResult(history, state, INCONCLUSIVE, "tau_n below tau_floor", snapshots)


def blowup_time_lower_bound(M_0: float, params: PDEParams) -> float:
    """1/(a (p-1) M_0^(p-1)): the blow-up time of the pure reaction ODE."""
    return 1.0 / (params.a * (params.p - 1.0) * M_0 ** (params.p - 1.0))


def rate_exponent(params: PDEParams) -> float:
    """r = (2p - q(p+1))/(2-q) >= 0 on the admissible range of q."""
    p, q = params.p, params.q
    return (2.0 * p - q * (p + 1.0)) / (2.0 - q)


def guaranteed_growth_ratio(M_0: float, params: PDEParams, control: MeshControl) -> float:
    """rho = (1 + tau)/(1 + tau 2^(-q/(2-q)) M_0^(-r)), so that M_n >= rho^n M_0.

    Only meaningful for a = b = 1 and data large enough that rho > 1.
    """
    if params.a != 1.0 or params.b != 1.0:
        raise ParameterError("growth bound is derived for a = b = 1 only")
    q = params.q
    factor = 2.0 ** (-q / (2.0 - q)) * M_0 ** (-rate_exponent(params))
    if not factor < 1.0:
        raise ParameterError(
            f"M_0 = {M_0!r} too small: 2^(-q/(2-q)) M_0^(-r) = {factor!r} >= 1, so rho <= 1"
        )
    tau = control.tau_base
    return (1.0 + tau) / (1.0 + tau * factor)


def estimate_blowup_time(history: list[StepRecord], params: PDEParams) -> float:
    """Accumulated time plus a geometric tail for the steps not taken.

    Near blow-up M grows by a nearly constant factor rho per step and
    tau_n scales as M_n^(1-p), so the remaining steps form a geometric
    series with ratio rho^(1-p).
    """
    if len(history) < 10:
        raise BlowupNotDetected("no blow-up detected: fewer than 10 records")
    last, prev = history[-1], history[-2]
    rho = last.M_n / prev.M_n if prev.M_n > 0 else math.nan
    if not (rho > 1.0 and last.M_n > history[0].M_n):
        raise BlowupNotDetected("no blow-up detected: history is not growing")
    ratio = rho ** (1.0 - params.p)
    return last.t_n + prev.tau_n * ratio / (1.0 - ratio)


def fit_blowup_rate(
    history: list[StepRecord],
    T_star: float,
    params: PDEParams,
    window: tuple[float, float] | None = None,
    M_stop: float | None = None,
) -> tuple[float, float]:
    """Least-squares fit of M(t) = C (T* - t)^(-k); returns (C, k).

    By default only records with M in [10 M_0, M_stop/10] are used (M_stop
    defaults to the last recorded maximum).
    """
    if not history:
        raise ValueError("empty history")
    if window is None:
        top = history[-1].M_n if M_stop is None else M_stop
        window = (10.0 * history[0].M_n, top / 10.0)
    lo, hi = window
    t = np.array([r.t_n for r in history if lo <= r.M_n <= hi])
    M = np.array([r.M_n for r in history if lo <= r.M_n <= hi])
    if t.size < 10:
        raise ValueError(f"fit window [{lo:.3e}, {hi:.3e}] holds {t.size} records, need >= 10")
    gap = T_star - t
    if np.any(gap <= 0.0):
        raise ValueError("T_star must exceed every fitted t_n")
    slope, intercept = np.polyfit(np.log(gap), np.log(M), 1)
    return float(math.exp(intercept)), float(-slope)


def build_report(
    result: RunResult,
    params: PDEParams,
    control: MeshControl,
    energy_0: float | None = None,
) -> BlowupReport:
    M0 = result.M_0
    base = dict(
        outcome=result.outcome,
        stop_reason=result.stop_reason,
        n_stop=result.n_stop,
        t_stop=result.final_state.t,
        M_0=M0,
        M_final=result.final_state.M,
        p=params.p,
        q=params.q,
        r_exponent=rate_exponent(params),
        lower_bound=blowup_time_lower_bound(M0, params) if M0 > 0 and params.a > 0 else math.inf,
        energy_0=energy_0,
    )
    report = BlowupReport(**base)
    if params.a == 1.0 and params.b == 1.0 and M0 > 0:
        try:
            report = replace(report, rho_min=guaranteed_growth_ratio(M0, params, control))
        except ParameterError:
            pass
    if result.outcome != BLOWUP:
        return report
    T_star = estimate_blowup_time(result.history, params)
    report = replace(report, T_star=T_star)
    try:
        C, k = fit_blowup_rate(result.history, T_star, params, M_stop=control.M_stop)
    except ValueError as exc:
        log.warning("rate fit skipped: %s", exc)
        return report
    return replace(report, C_fit=C, exponent_fit=k)


@dataclass
class DampingComparison:
    with_gradient: RunResult
    without_gradient: RunResult
    report_with: BlowupReport
    report_without: BlowupReport

    @property
    def fewer_iterations(self) -> bool:
        return self.without_gradient.n_stop < self.with_gradient.n_stop

    @property
    def less_time(self) -> bool:
        if self.with_gradient.outcome != BLOWUP or self.without_gradient.outcome != BLOWUP:
            return False
        return self.without_gradient.final_state.t < self.with_gradient.final_state.t

    @property
    def verdict(self) -> str:
        a, b = self.with_gradient.outcome, self.without_gradient.outcome
        if a != BLOWUP and b != BLOWUP:
            return "no blow-up either"
        if b == BLOWUP and a != BLOWUP:
            return "gradient term prevents blow-up within the run limits"
        if a == BLOWUP and b != BLOWUP:
            return "ordering violated: only the damped run blew up"
        n_ok = self.without_gradient.n_stop <= self.with_gradient.n_stop
        t_ok = self.report_without.T_star <= self.report_with.T_star
        if n_ok and t_ok:
            return "damping confirmed: undamped run blows up no later"
        return "ordering violated"


def compare_damping(
    data: InitialData, params: PDEParams, control: MeshControl, **run_kwargs
) -> DampingComparison:
    """Run with (a, b) = (1, 1) and (1, 0), otherwise identical."""
    damped = replace(params, a=1.0, b=1.0)
    free = replace(params, a=1.0, b=0.0)
    with_g = run(data, damped, control, **run_kwargs)
    without_g = run(data, free, control, **run_kwargs)
    return DampingComparison(
        with_g,
        without_g,
        build_report(with_g, damped, control),
        build_report(without_g, free, control),
    )
