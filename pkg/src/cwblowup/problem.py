"""Equation parameters, initial data and the checks made on them before a run."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

if TYPE_CHECKING:
    from .mesh import Grid


class ParameterError(ValueError):
    """Raised when equation parameters or initial data are inadmissible."""


@dataclass(frozen=True)
class PDEParams:
    """Exponents and coefficients of u_t = u_xx + a|u|^(p-1)u - b|u_x|^q.

    ``b = 0`` switches the gradient term off (pure Fujita equation).
    """

    p: float
    q: float
    a: float = 1.0
    b: float = 1.0

    @property
    def q_max(self) -> float:
        return 2.0 * self.p / (self.p + 1.0)


def validate_params(params: PDEParams) -> PDEParams:
    """Return ``params`` unchanged, or raise naming the violated inequality."""
    p, q = params.p, params.q
    for name in ("p", "q", "a", "b"):
        if not math.isfinite(getattr(params, name)):
            raise ParameterError(f"{name} must be finite, got {getattr(params, name)!r}")
    if not p > 1.0:
        raise ParameterError(f"p > 1 violated: p = {p!r}")
    if q < 1.0:
        raise ParameterError(f"q >= 1 violated: q = {q!r}")
    if q > params.q_max:
        raise ParameterError(
            f"q <= 2p/(p+1) violated: q = {q!r} > 2p/(p+1) = {params.q_max!r}"
        )
    if params.a < 0.0:
        raise ParameterError(f"a >= 0 violated: a = {params.a!r}")
    if params.b < 0.0:
        raise ParameterError(f"b >= 0 violated: b = {params.b!r}")
    return params


@dataclass(frozen=True)
class InitialData:
    """Initial profile u0 on [-1, 1], given as a vectorised sampler."""

    sampler: Callable[[np.ndarray], np.ndarray]
    amplitude: float | None = None
    name: str = "custom"

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.sampler(np.asarray(x, dtype=float)), dtype=float)


def build_sine_profile(amplitude: float) -> InitialData:
    """u0(x) = amplitude * sin(pi/2 * (x + 1)).

    Evaluated as ``amplitude * cos(pi x / 2)`` (the same function) so that the
    profile is exactly even in floating point, with exact zeros at x = +-1.
    """
    if not (amplitude > 0.0 and math.isfinite(amplitude)):
        raise ParameterError(f"amplitude > 0 violated: amplitude = {amplitude!r}")

    def sampler(x: np.ndarray) -> np.ndarray:
        u = amplitude * np.cos(0.5 * np.pi * x)
        return np.where(np.abs(x) >= 1.0, 0.0, u)

    return InitialData(sampler=sampler, amplitude=float(amplitude), name="sine")


def constant_profile(value: float) -> InitialData:
    return InitialData(
        sampler=lambda x: np.full_like(x, value, dtype=float),
        amplitude=float(value),
        name="constant",
    )


def zero_profile() -> InitialData:
    return InitialData(sampler=np.zeros_like, amplitude=0.0, name="zero")


def tabulated_profile(x_samples, u_samples) -> InitialData:
    """Profile given by samples, linearly interpolated (used for ``--profile FILE``)."""
    xs = np.asarray(x_samples, dtype=float)
    us = np.asarray(u_samples, dtype=float)
    if xs.ndim != 1 or xs.shape != us.shape or xs.size < 2:
        raise ParameterError("profile needs two equal-length columns with >= 2 rows")
    order = np.argsort(xs)
    xs, us = xs[order], us[order]
    if np.any(np.diff(xs) <= 0.0):
        raise ParameterError("profile x column has repeated abscissae")
    if xs[0] > -1.0 or xs[-1] < 1.0:
        raise ParameterError("profile x column must cover [-1, 1]")

    def sampler(x: np.ndarray) -> np.ndarray:
        return np.interp(x, xs, us)

    return InitialData(sampler=sampler, amplitude=float(np.max(np.abs(us))), name="file")


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of each of the five conditions on u0, checked at grid nodes.

    A1 nonconstant and nonnegative, A2 even, A3 strictly increasing on
    [-1, 0], A4 sup-norm above the largeness threshold, A5 zero boundary.
    """

    A1: bool
    A2: bool
    A3: bool
    A4: bool
    A5: bool
    sup_norm: float
    large_threshold: float

    @property
    def structural_ok(self) -> bool:
        """A1-A3 and A5: what the scheme's invariants rely on."""
        return self.A1 and self.A2 and self.A3 and self.A5

    @property
    def all_ok(self) -> bool:
        return self.structural_ok and self.A4

    def failed(self) -> list[str]:
        return [k for k in ("A1", "A2", "A3", "A4", "A5") if not getattr(self, k)]


def check_assumptions(
    data: InitialData, grid: Grid, large_threshold: float = 1e2
) -> AssumptionReport:
    u = data(grid.nodes)
    m = grid.m
    scale = float(np.max(np.abs(u))) if u.size else 0.0
    tol = 1e-12 * scale

    a1 = bool(np.min(u) >= 0.0 and np.max(u) > np.min(u))
    a2 = bool(np.max(np.abs(u - u[::-1])) <= tol)
    a3 = bool(np.all(np.diff(u[: m + 1]) > 0.0))
    a4 = bool(scale >= large_threshold)
    a5 = bool(abs(u[0]) <= tol and abs(u[-1]) <= tol)
    return AssumptionReport(a1, a2, a3, a4, a5, scale, large_threshold)


def discrete_energy(values, grid: Grid, params: PDEParams) -> float:
    """Discrete E(u) = 1/2 ||u_x||^2 - a/(p+1) ||u||_{p+1}^{p+1}.

    Forward-difference gradient, node (rectangle) quadrature. A negative
    value is the energy condition under which blow-up is guaranteed.
    """
    u = np.asarray(values, dtype=float)
    if u.shape != (grid.K + 1,):
        raise ParameterError(
            f"values has length {u.size}, grid has {grid.K + 1} nodes"
        )
    h = grid.h
    grad = np.diff(u) / h
    kinetic = 0.5 * h * float(np.sum(grad * grad))
    potential = params.a * h * float(np.sum(np.abs(u) ** (params.p + 1.0))) / (params.p + 1.0)
    return kinetic - potential
