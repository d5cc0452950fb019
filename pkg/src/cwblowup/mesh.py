"""Adaptive step sizes, midpoint-pinned grids on [-1, 1], and grid transfer.

Both step sizes are recomputed from the current sup-norm M_n at every step:

    tau_n = tau * min(1, M_n^(1-p))
    h_n   = min(h, (2 M_n^(1-q))^(1/(2-q)))

The grid actually used has K = 2*ceil(1/h_n) intervals, so its spacing never
exceeds h_n and x = 0 is always node K/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .problem import ParameterError, PDEParams

LAMBDA_MAX = 1.0 / 16.0


@dataclass(frozen=True)
class MeshControl:
    tau_base: float = 1e-4
    h_base: float = 0.2
    M_stop: float = 1e6
    tau_floor: float = 1e-16
    n_max: int = 500_000

    def __post_init__(self):
        for name in ("tau_base", "h_base", "M_stop", "tau_floor"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ParameterError(f"{name} > 0 violated: {name} = {value!r}")
        if self.h_base > 1.0:
            raise ParameterError(f"h <= 1 violated: h = {self.h_base!r}")
        if self.n_max < 0:
            raise ParameterError(f"n_max >= 0 violated: n_max = {self.n_max!r}")
        if not self.lam < LAMBDA_MAX:
            raise ParameterError(
                f"tau/h^2 < 1/16 violated: tau/h^2 = {self.lam!r} "
                f"(tau = {self.tau_base!r}, h = {self.h_base!r})"
            )

    @property
    def lam(self) -> float:
        """lambda = tau/h^2, always recomputed from the base steps."""
        return self.tau_base / self.h_base**2


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``K`` intervals on [-1, 1]; K even, K >= 4."""

    K: int

    def __post_init__(self):
        if self.K < 4 or self.K % 2:
            raise ParameterError(f"grid needs an even interval count >= 4, got K = {self.K}")

    @property
    def m(self) -> int:
        """Index of the node at x = 0."""
        return self.K // 2

    @property
    def N(self) -> int:
        """Number of interior nodes (N + 1 = 2m)."""
        return self.K - 1

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @cached_property
    def nodes(self) -> np.ndarray:
        # (j - m)/m is exact at j = 0, m, K and odd under j -> K - j
        x = (np.arange(self.K + 1, dtype=float) - self.m) / self.m
        x.flags.writeable = False
        return x


def adapt_time_step(M: float, control: MeshControl, params: PDEParams) -> float:
    """tau_n = tau * min(1, M^(1-p)); non-increasing in M."""
    if M <= 1.0:
        return control.tau_base
    return control.tau_base * M ** (1.0 - params.p)


def adapt_space_step(M: float, control: MeshControl, params: PDEParams) -> float:
    """Largest spacing allowed by the positivity condition, capped at h.

    Returns min(h, (2 M^(1-q))^(1/(2-q))). For q = 1 the bound is 2, so the
    base spacing always wins. M = 0 (zero state) also returns h.
    """
    q = params.q
    if M <= 0.0:
        return control.h_base
    bound = (2.0 * M ** (1.0 - q)) ** (1.0 / (2.0 - q))
    return min(control.h_base, bound)


def build_grid(h_candidate: float) -> Grid:
    """Grid with K = 2*ceil(1/h_candidate) intervals (at least 4).

    Rounding up keeps the realised spacing <= h_candidate, which the
    positivity argument needs.
    """
    if not (0.0 < h_candidate <= 1.0):
        raise ParameterError(f"grid spacing must lie in (0, 1], got {h_candidate!r}")
    K = max(4, 2 * math.ceil(1.0 / h_candidate))
    return Grid(K)


def regrid(values, new_grid: Grid) -> np.ndarray:
    """Transfer node values from their grid (inferred from length) to ``new_grid``.

    Piecewise-linear interpolation of the left half, mirrored onto the right
    half, so symmetry is exact and monotone data stay monotone.
    """
    u = np.asarray(values, dtype=float)
    old_grid = Grid(u.size - 1)
    if old_grid.K == new_grid.K:
        return u.copy()
    xo = old_grid.nodes[: old_grid.m + 1]
    xn = new_grid.nodes[: new_grid.m + 1]
    left = np.interp(xn, xo, u[: old_grid.m + 1])
    left[0] = 0.0
    return np.concatenate((left, left[-2::-1]))
