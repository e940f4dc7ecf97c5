"""Characteristic feet, biased stencils, and the slope limiter."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sltransport.core import ConfigError, Grid
from sltransport.semilag import (LEFT, RIGHT, FieldSampler, base_shift,
                                 bias_for, characteristic_shift,
                                 derivative_at_feet,
                                 limited_explicit_flux_divergence,
                                 limited_implicit_coefficients,
                                 limiter_values, locate_foot, offset_second,
                                 upwind_first, van_albada)


# ============================================================
# Foot localization
# ============================================================

def test_shift_fractional_positive():
    cells, off, sign = characteristic_shift(1.0, 1.0, 0.55, 0.1)
    assert (cells, sign) == (5, 1)
    assert off == pytest.approx(0.5)


def test_shift_integer_distance_keeps_unit_offset():
    # r = 5 exactly: the foot sits on a node; the convention stores the
    # base one cell further upwind with offset 1 (half-open interval (0,1])
    cells, off, sign = characteristic_shift(1.0, 1.0, 0.5, 0.1)
    assert (cells, off, sign) == (4, 1.0, 1)


def test_shift_negative_velocity_mirrors():
    cells, off, sign = characteristic_shift(-1.0, 1.0, 0.55, 0.1)
    assert (cells, sign) == (5, -1)
    assert off == pytest.approx(0.5)  # stored as 1 - xi
    cells, off, sign = characteristic_shift(-1.0, 1.0, 0.5, 0.1)
    assert (cells, off, sign) == (4, 0.0, -1)


def test_shift_zero_velocity():
    assert characteristic_shift(0.0, 1.0, 0.1, 0.1) == (0, 0.0, 0)


def test_shift_subcell_distance():
    cells, off, sign = characteristic_shift(1.0, 1.0, 0.05, 0.1)
    assert (cells, sign) == (0, 1)
    assert off == pytest.approx(0.5)


def test_shift_rejects_overflowing_distance():
    with pytest.raises(ConfigError):
        characteristic_shift(1.0, 1e-300, 1e300, 1e-10)


def test_base_shift_directions():
    assert base_shift(5, 1) == -5
    assert base_shift(5, -1) == 6
    assert base_shift(0, 0) == 0


def test_locate_foot_positions():
    grid = Grid.periodic(0.0, 1.0, 10)
    foot = locate_foot(5, 1.0, 1.0, 0.25, grid)
    assert (foot.index, foot.cells, foot.sign) == (3, 2, 1)
    assert foot.offset == pytest.approx(0.5)
    # base node minus offset*dx recovers the geometric foot x_i - v dt/eps
    x_star = grid.x[foot.index] - foot.offset * grid.dx
    assert x_star == pytest.approx(grid.x[5] - 0.25)
    foot = locate_foot(5, -1.0, 1.0, 0.25, grid)
    assert (foot.index, foot.cells, foot.sign) == (8, 2, -1)
    assert grid.x[foot.index] - foot.offset * grid.dx == pytest.approx(
        grid.x[5] + 0.25)


def test_bias_rule():
    assert bias_for(1, "f") == LEFT
    assert bias_for(-1, "f") == RIGHT
    assert bias_for(1, "rho") == RIGHT
    assert bias_for(-1, "rho") == LEFT
    with pytest.raises(ConfigError):
        bias_for(0, "f")


# ============================================================
# Sampling
# ============================================================

def test_sampler_periodic_wraps_many_laps():
    axis = Grid.periodic(0.0, 1.0, 5).axis(0)
    s = FieldSampler(np.arange(5.0), axis)
    assert s(7) == pytest.approx([(i + 7) % 5 for i in range(5)])
    assert s(-12) == pytest.approx([(i - 12) % 5 for i in range(5)])


def test_sampler_bounded_clamps_to_edge_values():
    axis = Grid.bounded(0.0, 1.0, 5).axis(0)
    s = FieldSampler(np.arange(5.0), axis, left=-7.0, right=9.0)
    assert s(-2) == pytest.approx([-7.0, -7.0, 0.0, 1.0, 2.0])
    assert s(3) == pytest.approx([3.0, 4.0, 9.0, 9.0, 9.0])


def test_sampler_bounded_requires_edge_values():
    axis = Grid.bounded(0.0, 1.0, 5).axis(0)
    with pytest.raises(ConfigError):
        FieldSampler(np.arange(5.0), axis)


# ============================================================
# Stencil exactness at the foot
# ============================================================

def _quad_case(alpha, beta, gamma, shift, c, bias, order):
    grid = Grid.bounded(0.0, 1.0, 41)
    axis = grid.axis(0)
    x = grid.x
    g = alpha + beta * x + gamma * x * x
    s = FieldSampler(g, axis, left=0.0, right=0.0)
    vals = derivative_at_feet(s, shift, c, bias, order, axis.dx)
    rows = np.arange(8, 33)  # stencil fully interior for |shift| <= 3
    feet = x[rows + shift] - c * axis.dx
    return vals[rows], beta + 2.0 * gamma * feet


@pytest.mark.parametrize("bias", [LEFT, RIGHT])
@pytest.mark.parametrize("c", [0.0, 0.25, 0.5, 1.0])
def test_second_order_exact_on_quadratics(bias, c):
    got, want = _quad_case(0.3, -1.2, 2.5, -2, c, bias, order=2)
    assert got == pytest.approx(want, abs=1e-10)


@pytest.mark.parametrize("bias", [LEFT, RIGHT])
def test_first_order_exact_on_linear(bias):
    got, want = _quad_case(0.5, 1.7, 0.0, 1, 0.4, bias, order=1)
    assert got == pytest.approx(want, abs=1e-11)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2),
       st.integers(-3, 3), st.floats(0, 1), st.sampled_from([LEFT, RIGHT]))
def test_second_order_exactness_property(alpha, beta, gamma, shift, c, bias):
    got, want = _quad_case(alpha, beta, gamma, shift, c, bias, order=2)
    assert got == pytest.approx(want, abs=1e-8)


def test_first_order_is_one_sided():
    # LEFT uses nodes base-1, base-2; RIGHT uses base+1, base
    axis = Grid.bounded(0.0, 1.0, 5).axis(0)
    g = np.array([0.0, 1.0, 10.0, 100.0, 1000.0])
    s = FieldSampler(g, axis, left=0.0, right=0.0)
    left = derivative_at_feet(s, 0, 0.5, LEFT, 1, axis.dx)
    right = derivative_at_feet(s, 0, 0.5, RIGHT, 1, axis.dx)
    assert left[2] == pytest.approx((g[1] - g[0]) / axis.dx)
    assert right[2] == pytest.approx((g[3] - g[2]) / axis.dx)


def test_pointwise_wrappers_match_array_form():
    grid = Grid.periodic(0.0, 1.0, 16)
    x = grid.x
    g = np.sin(2.0 * np.pi * x)
    foot = locate_foot(4, 1.0, 1.0, 0.3, grid)
    s = FieldSampler(g, grid.axis(0))
    from sltransport.semilag import base_shift as bs
    shift = bs(foot.cells, foot.sign)
    arr1 = derivative_at_feet(s, shift, foot.offset, bias_for(1, "f"), 1,
                              grid.dx)
    arr2 = derivative_at_feet(s, shift, foot.offset, bias_for(1, "f"), 2,
                              grid.dx)
    assert upwind_first(g, foot, "f", grid) == pytest.approx(arr1[4])
    assert offset_second(g, foot, "f", grid) == pytest.approx(arr2[4])


# ============================================================
# Limiter
# ============================================================

def test_van_albada_values():
    assert van_albada(1.0) == pytest.approx(1.0)
    assert van_albada(0.0) == 0.0
    assert van_albada(-1.0) == 0.0
    assert van_albada(2.0) == pytest.approx(1.2)


def test_limiter_values_guard_degenerate_denominator():
    out = limiter_values(np.array([1.0, 1.0]), np.array([0.0, 1e-15]))
    assert out == pytest.approx([0.0, 0.0])


def test_limited_flux_exact_on_linear_data():
    # linear data: all slope ratios are exactly 1, phi = 1, and the limited
    # divergence must equal the exact (constant) derivative
    grid = Grid.bounded(0.0, 1.0, 31)
    axis = grid.axis(0)
    g = 2.0 - 3.0 * grid.x
    s = FieldSampler(g, axis, left=0.0, right=0.0)
    for bias in (LEFT, RIGHT):
        for c in (0.0, 0.3, 1.0):
            vals = limited_explicit_flux_divergence(s, 0, c, bias, axis.dx)
            assert vals[6:25] == pytest.approx(np.full(19, -3.0), abs=1e-10)


def test_limited_flux_matches_direct_interface_formula():
    # independent transcription of the interface-flux definition
    grid = Grid.bounded(0.0, 1.0, 12)
    axis = grid.axis(0)
    rng = np.random.default_rng(7)
    g = np.cumsum(rng.uniform(0.5, 1.5, 12))  # monotone, irregular
    s = FieldSampler(g, axis, left=g[0], right=g[-1])
    c = 0.3
    i = 6
    vals = limited_explicit_flux_divergence(s, 0, c, LEFT, axis.dx)

    def h(j):
        r = (g[j - 1] - g[j - 2]) / (g[j] - g[j - 1])
        phi = (r * r + r) / (r * r + 1.0)
        return g[j] + 0.5 * (1.0 - 2.0 * c) * phi * (g[j] - g[j - 1])

    assert vals[i] == pytest.approx((h(i) - h(i - 1)) / axis.dx)

    vals_r = limited_explicit_flux_divergence(s, 0, c, RIGHT, axis.dx)

    def h_r(j):
        r = (g[j + 1] - g[j + 2]) / (g[j] - g[j + 1])
        phi = (r * r + r) / (r * r + 1.0)
        return g[j] - 0.5 * (1.0 - 2.0 * c) * phi * (g[j] - g[j + 1])

    assert vals_r[i] == pytest.approx((h_r(i) - h_r(i - 1)) / axis.dx)


def test_limited_implicit_coefficient_reductions():
    one = np.array([1.0])
    zero = np.array([0.0])
    assert np.allclose(limited_implicit_coefficients(one, one),
                       ([1.5], [-2.0], [0.5]))
    assert np.allclose(limited_implicit_coefficients(zero, zero),
                       ([1.0], [-1.0], [0.0]))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1.208), st.floats(0, 1.208))
def test_limited_implicit_rows_telescope(phi_here, phi_up):
    c0, c1, c2 = limited_implicit_coefficients(np.array([phi_here]),
                                               np.array([phi_up]))
    assert c0 + c1 + c2 == pytest.approx(0.0, abs=1e-14)
