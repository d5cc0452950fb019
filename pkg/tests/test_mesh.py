import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cwblowup.mesh import (
    Grid,
    MeshControl,
    adapt_space_step,
    adapt_time_step,
    build_grid,
    regrid,
)
from cwblowup.problem import ParameterError, PDEParams

P = PDEParams(3.0, 1.3)
CTRL = MeshControl()


def test_defaults_satisfy_lambda_bound():
    assert CTRL.lam == pytest.approx(0.0025)
    assert CTRL.lam < 1 / 16


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(tau_base=0.0),
        dict(h_base=1.5),
        dict(M_stop=-1.0),
        dict(tau_base=0.01, h_base=0.2),  # lam = 0.25
        dict(n_max=-1),
        dict(tau_floor=math.nan),
    ],
)
def test_control_rejects(kwargs):
    with pytest.raises(ParameterError):
        MeshControl(**kwargs)


def test_lambda_message_names_bound():
    with pytest.raises(ParameterError, match="1/16"):
        MeshControl(tau_base=0.0625, h_base=1.0)


def test_time_step_values():
    assert adapt_time_step(0.5, CTRL, P) == 1e-4
    assert adapt_time_step(1.0, CTRL, P) == 1e-4
    assert adapt_time_step(1e3, CTRL, P) == pytest.approx(1e-10, rel=1e-12)


def test_space_step_values():
    assert adapt_space_step(0.0, CTRL, P) == 0.2
    assert adapt_space_step(1.0, CTRL, P) == 0.2
    assert adapt_space_step(1e3, CTRL, P) == pytest.approx(0.13942112, rel=1e-7)
    assert adapt_space_step(1e9, CTRL, PDEParams(2.0, 1.0)) == 0.2


@given(M1=st.floats(0.0, 1e12), M2=st.floats(0.0, 1e12))
def test_step_sizes_non_increasing(M1, M2):
    lo, hi = sorted((M1, M2))
    assert adapt_time_step(hi, CTRL, P) <= adapt_time_step(lo, CTRL, P)
    assert adapt_space_step(hi, CTRL, P) <= adapt_space_step(lo, CTRL, P)


@given(M=st.floats(1.0, 1e12), p=st.floats(1.01, 5.0), frac=st.floats(0.0, 1.0))
def test_lambda_stays_below_bound(M, p, frac):
    q = 1.0 + frac * (2 * p / (p + 1) - 1.0)
    params = PDEParams(p, q)
    h = build_grid(adapt_space_step(M, CTRL, params)).h
    assert adapt_time_step(M, CTRL, params) / h**2 < 1 / 16


def test_grid_geometry():
    g = Grid(16)
    assert (g.m, g.N, g.h) == (8, 15, 0.125)
    assert g.nodes[0] == -1.0 and g.nodes[8] == 0.0 and g.nodes[16] == 1.0
    assert np.array_equal(g.nodes, -g.nodes[::-1])
    with pytest.raises(ValueError):
        g.nodes[0] = 3.0


@pytest.mark.parametrize("K", [0, 3, 7, 2])
def test_grid_rejects_bad_K(K):
    with pytest.raises(ParameterError):
        Grid(K)


@given(K=st.integers(2, 5000).map(lambda k: 2 * k))
def test_grid_nodes_exactly_symmetric(K):
    g = Grid(K)
    assert g.nodes[g.m] == 0.0
    assert np.array_equal(g.nodes, -g.nodes[::-1])
    assert g.N + 1 == 2 * g.m


@given(h=st.floats(1e-4, 1.0))
def test_build_grid_spacing_bounded(h):
    g = build_grid(h)
    assert g.h <= h or g.K == 4
    assert g.K % 2 == 0


@pytest.mark.parametrize("h", [0.0, -0.1, 1.5, math.nan])
def test_build_grid_rejects(h):
    with pytest.raises(ParameterError):
        build_grid(h)


def test_regrid_identity_when_unchanged():
    u = np.array([0.0, 1.0, 2.0, 1.0, 0.0])
    out = regrid(u, Grid(4))
    assert np.array_equal(out, u) and out is not u


def test_regrid_linear_profile_exact():
    g_old, g_new = Grid(8), Grid(20)
    u = 1.0 - np.abs(g_old.nodes)
    out = regrid(u, g_new)
    assert np.allclose(out, 1.0 - np.abs(g_new.nodes), rtol=0, atol=1e-15)
    assert out[g_new.m] == 1.0


@given(
    steps=st.lists(st.floats(0.0, 10.0), min_size=2, max_size=30),
    new_m=st.integers(2, 200),
)
def test_regrid_preserves_structure(steps, new_m):
    left = np.concatenate(([0.0], np.cumsum(steps)))
    u = np.concatenate((left, left[-2::-1]))
    out = regrid(u, Grid(2 * new_m))
    assert out[0] == 0.0 and out[-1] == 0.0
    assert np.array_equal(out, out[::-1])
    assert np.all(np.diff(out[: new_m + 1]) >= 0)
    assert out[new_m] == u[len(steps)]
