import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retarded_bounds.numerics import (
    CumulativeIntegral,
    Grid,
    InversionError,
    MonotoneInverse,
    QuadratureConfig,
    QuadratureError,
    integrate,
    invert_monotone,
    max_relative_deviation,
    sample_grid,
)

CFG = QuadratureConfig()


def test_integrate_examples():
    assert integrate(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert integrate(lambda t: 18 / 5, 0.0, math.sqrt(1.0)) == pytest.approx(3.6, rel=1e-14)
    want = 3 / 49 * (-7 + 22 * math.exp(7) - 22)
    got = integrate(lambda s: (9 + 3 * s) * math.exp(7 * (1 - s)), 0.0, 1.0)
    assert abs(got - want) <= max(CFG.abs_tol, CFG.rel_tol * abs(want))


def test_integrate_empty_interval_is_exact_zero():
    assert integrate(lambda x: 1 / 0 if x else 1.0, 2.0, 2.0) == 0.0


def test_integrate_rejects_reversed_limits():
    with pytest.raises(ValueError):
        integrate(lambda x: x, 1.0, 0.0)


def test_depth_exhaustion_carries_estimate():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: 1 / math.sqrt(x) if x > 0 else 0.0, 0.0, 1.0, QuadratureConfig(1e-14, 1e-14, 3))
    assert math.isfinite(info.value.estimate)
    assert info.value.error_bound > 0


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_depth=0)


def test_error_meets_tolerance_on_smooth_integrands():
    cases = [
        (math.exp, 0, 3, math.e**3 - 1),
        (math.sin, 0, math.pi, 2.0),
        (lambda x: 1 / (1 + x * x), 0, 1, math.pi / 4),
        (math.sqrt, 0, 4, 16 / 3),
    ]
    for fn, a, b, want in cases:
        got = integrate(fn, a, b, CFG)
        assert abs(got - want) <= max(CFG.abs_tol, CFG.rel_tol * abs(want))


coeffs = st.lists(st.floats(-5, 5), min_size=1, max_size=7)


def _poly(c):
    return lambda x: sum(ci * x**i for i, ci in enumerate(c))


@settings(max_examples=1000)
@given(coeffs, coeffs, st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 1), st.floats(0.01, 3))
def test_linearity(c1, c2, alpha, beta, lo, width):
    f, g = _poly(c1), _poly(c2)
    hi = lo + width
    lhs = integrate(lambda x: alpha * f(x) + beta * g(x), lo, hi)
    If, Ig = integrate(f, lo, hi), integrate(g, lo, hi)
    rhs = alpha * If + beta * Ig
    scale = max(abs(lhs), abs(alpha * If), abs(beta * Ig), 1.0)
    assert abs(lhs - rhs) <= 10 * max(CFG.abs_tol, CFG.rel_tol * scale) * (1 + abs(alpha) + abs(beta))


@settings(max_examples=1000)
@given(coeffs, st.floats(-2, 1), st.floats(0.01, 2), st.floats(0.01, 0.99))
def test_additivity(c, a, width, frac):
    f = _poly(c)
    b, cc = a + frac * width, a + width
    whole = integrate(f, a, cc)
    parts = integrate(f, a, b) + integrate(f, b, cc)
    scale = max(abs(whole), integrate(lambda x: abs(f(x)), a, cc), 1.0)
    assert abs(whole - parts) <= 10 * max(CFG.abs_tol, CFG.rel_tol * scale)


def test_inversion_examples():
    assert invert_monotone(math.sqrt, 0.5, 0.0, 4.0) == pytest.approx(0.25, abs=1e-12)
    assert invert_monotone(lambda v: v ** (1 / 3), 2.0, 0.0, 16.0) == pytest.approx(8.0, abs=1e-12)
    assert invert_monotone(lambda v: v, 0.7, 0.0, 1.0) == pytest.approx(0.7, abs=1e-13)
    assert MonotoneInverse(lambda v: v, 1.0, identity=True)(0.7) == 0.7


def test_inversion_bracket_error():
    with pytest.raises(InversionError) as info:
        invert_monotone(math.sqrt, 3.0, 0.0, 4.0)
    assert info.value.f_hi == 2.0 and info.value.y == 3.0
    assert "fn(lo)" in str(info.value)


@settings(max_examples=300)
@given(st.floats(0.0, 10.0), st.sampled_from(["cube", "exp", "affine", "sqrt"]))
def test_inverse_roundtrip(x, kind):
    fn = {
        "cube": lambda v: v**3 + v,
        "exp": lambda v: math.exp(v / 3) - 1,
        "affine": lambda v: 0.5 * v,
        "sqrt": math.sqrt,
    }[kind]
    tol = 1e-12
    r = invert_monotone(fn, fn(x), 0.0, 10.0, tol=tol)
    assert abs(r - x) <= tol


@settings(max_examples=200)
@given(st.floats(0.0, 3.9), st.floats(0.0, 0.1))
def test_inverse_is_monotone_in_y(y, dy):
    r1 = invert_monotone(math.sqrt, y ** 0.5 if False else min(y, 2.0), 0.0, 4.0)
    r2 = invert_monotone(math.sqrt, min(y + dy, 2.0), 0.0, 4.0)
    assert r1 <= r2


def test_relative_inversion_near_zero():
    inv = MonotoneInverse(lambda v: 0.5 * v, 1.0)
    for y in [1e-9, 1e-6, 1e-3]:
        assert inv(y) == pytest.approx(2 * y, rel=1e-13)


def test_sample_grid_examples():
    g = sample_grid(lambda v: 1.0, 0.0, 1.0, 3)
    assert g.points() == [(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]
    assert sample_grid(lambda v: v, 0.0, 2.0, 2).points() == [(0.0, 0.0), (2.0, 2.0)]
    with pytest.raises(ValueError):
        sample_grid(lambda v: v, 0.0, 1.0, 1)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        Grid(np.array([0.0, 1.0]), np.array([1.0]))


def test_cumulative_integral_matches_direct():
    c = CumulativeIntegral(math.exp, 0.0, 2.0, CFG, nodes=16)
    for x in [0.0, 0.01, 0.5, 1.2345, 2.0]:
        assert c(x) == pytest.approx(math.exp(x) - 1, rel=1e-9, abs=1e-10)
    assert c.total == pytest.approx(math.exp(2) - 1, rel=1e-9)
    with pytest.raises(ValueError):
        c(2.5)


def test_cumulative_log_scale_handles_reciprocal():
    lo = 1e-8
    c = CumulativeIntegral(lambda v: 1 / v, lo, 1.0, CFG, nodes=32, log_scale=True)
    for x in [1e-6, 1e-3, 0.5, 1.0]:
        assert c(x) == pytest.approx(math.log(x / lo), rel=1e-9)


def test_max_relative_deviation():
    assert max_relative_deviation([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert max_relative_deviation([1.1, 2.0], [1.0, 2.0]) == pytest.approx(0.1)
