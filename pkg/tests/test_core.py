import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retarded_bounds.core import (
    GammaConstraintError,
    GammaParams,
    InequalityProblem,
    Status,
    Theorem,
    check_hypotheses,
    power_sum_rhs,
    validate_gammas,
    zeta_constants,
    zhao_rhs,
    zhao_tangent_kappa,
)
from retarded_bounds.examples import example


# -- power-sum lemma -------------------------------------------------------


def test_power_sum_examples():
    assert power_sum_rhs(1, 1, 2) == 4 == (1 + 1) ** 2
    assert power_sum_rhs(0.3, 1.7, 1) == pytest.approx(2.0)
    assert power_sum_rhs(0.3, 1.7, 2.5) >= 2.0**2.5
    with pytest.raises(ValueError):
        power_sum_rhs(1, 1, 0.5)


def power_sum_samples(n=10_000, seed=1):
    rng = np.random.default_rng(seed)
    return zip(rng.uniform(0, 10, n), rng.uniform(0, 10, n), rng.uniform(1, 6, n))


def test_power_sum_dominance_random():
    bad = 0
    for w1, w2, g in power_sum_samples():
        lhs = (w1 + w2) ** g
        if lhs > power_sum_rhs(w1, w2, g) + 1e-12 * max(1.0, lhs):
            bad += 1
    assert bad == 0


# -- tangent-line lemma ----------------------------------------------------


def test_zhao_examples():
    assert zhao_rhs(2.0, 3.0, 2.0, 2.0) == pytest.approx(2.0 ** (2 / 3), rel=1e-15)
    assert zhao_rhs(0.0, 3.0, 2.0, 1.5) == pytest.approx((1 / 3) * 1.5 ** (2 / 3))
    assert zhao_rhs(1.7, 2.0, 2.0, 0.3) == pytest.approx(1.7)
    with pytest.raises(ValueError):
        zhao_rhs(1.0, 1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        zhao_rhs(1.0, 0.0, 0.0, 1.0)
    assert zhao_tangent_kappa(3.5) == 3.5


def zhao_samples(n=10_000, seed=2):
    rng = np.random.default_rng(seed)
    g1 = rng.uniform(0.1, 6, n)
    g2 = g1 * rng.uniform(0, 1, n)
    return zip(rng.uniform(0, 10, n), g1, g2, rng.uniform(0.01, 10, n))


def test_zhao_dominance_random():
    bad = 0
    for w, g1, g2, k in zhao_samples():
        lhs = w ** (g2 / g1)
        rhs = zhao_rhs(w, g1, g2, k)
        if lhs > rhs + 1e-12 * max(1.0, lhs, rhs):
            bad += 1
    assert bad == 0


def test_zhao_tangency_random():
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        w = rng.uniform(0.1, 10)
        g1 = rng.uniform(0.1, 6)
        g2 = g1 * rng.uniform(0, 1)
        lhs = w ** (g2 / g1)
        assert abs(zhao_rhs(w, g1, g2, zhao_tangent_kappa(w)) - lhs) <= 1e-12 * max(1.0, lhs)


@settings(max_examples=500)
@given(st.floats(0, 10), st.floats(0.1, 6), st.floats(0, 1), st.floats(0.01, 10))
def test_zhao_dominance_property(w, g1, frac, k):
    g2 = g1 * frac
    lhs = w ** (g2 / g1)
    assert lhs <= zhao_rhs(w, g1, g2, k) + 1e-12 * max(1.0, lhs)


# -- zeta constants --------------------------------------------------------


def test_zeta_examples():
    z = zeta_constants(GammaParams(5, 4, 3, 3), 1.0)
    assert z.z7 == pytest.approx(2 / 5) and z.z8 == pytest.approx(3 / 5)
    z = zeta_constants(GammaParams(3, 2), 1.0)
    assert (z.z1, z.z2, z.z3, z.z4) == pytest.approx((1 / 3, 2 / 3, 2 / 3, 1 / 3))


def test_zeta_at_unit_kappa_are_rational_coefficients():
    g1, g2, g3, g4 = 4.0, 3.0, 2.5, 1.5
    z = zeta_constants(GammaParams(g1, g2, g3, g4), 1.0)
    want = [
        1 / g1,
        (g1 - 1) / g1,
        g2 / g1,
        (g1 - g2) / g1,
        1 / g3,
        (g3 - 1) / g1,
        (g1 - g4) / g1,
        g4 / g1,
        1 / g2,
        (g2 - 1) / g2,
    ]
    assert [z.as_dict()[f"zeta{k}"] for k in range(1, 11)] == pytest.approx(want, rel=1e-15)


def test_zeta_formulas_general_kappa():
    g1, g2, g3, g4, k = 3.0, 2.0, 1.5, 2.5, 1.7
    z = zeta_constants(GammaParams(g1, g2, g3, g4), k)
    assert z.z1 == pytest.approx((1 / g1) * k ** ((1 - g1) / g1))
    assert z.z2 == pytest.approx(((g1 - 1) / g1) * k ** (1 / g1))
    assert z.z3 == pytest.approx((g2 / g1) * k ** ((g2 - g1) / g1))
    assert z.z4 == pytest.approx(((g1 - g2) / g1) * k ** (g2 / g1))
    assert z.z5 == pytest.approx((1 / g3) * k ** ((1 - g3) / g3))
    assert z.z6 == pytest.approx(((g3 - 1) / g1) * k ** (1 / g3))
    assert z.z7 == pytest.approx(((g1 - g4) / g1) * k ** (g4 / g1))
    assert z.z8 == pytest.approx((g4 / g1) * k ** ((g4 - g1) / g1))
    assert z.z9 == pytest.approx((1 / g2) * k ** ((1 - g2) / g2))
    assert z.z10 == pytest.approx(((g2 - 1) / g2) * k ** (1 / g2))
    alt = zeta_constants(GammaParams(g1, g2, g3, g4), k, zeta6_denominator="gamma3")
    assert alt.z6 == pytest.approx(((g3 - 1) / g3) * k ** (1 / g3))
    with pytest.raises(ValueError):
        zeta_constants(GammaParams(g1, g2, g3, g4), k, zeta6_denominator="gamma2")


@settings(max_examples=300)
@given(st.floats(0.2, 8), st.floats(0.01, 50))
def test_zeta1_identity(g1, k):
    z = zeta_constants(GammaParams(g1), k)
    assert z.z1 * g1 * k ** ((g1 - 1) / g1) == pytest.approx(1.0, rel=1e-13)


def test_zetas_nonnegative_under_constraints():
    for g in [(5, 4, 3, 3), (3, 2, 1, 1), (1, 1, 1, 1), (2, 2, 2, 1)]:
        z = zeta_constants(GammaParams(*g), 0.8)
        assert all(v >= 0 for v in z.as_dict().values())


# -- exponent constraints ----------------------------------------------------


@pytest.mark.parametrize(
    "theorem,gamma,ok",
    [
        (Theorem.INTEGRODIFF_POWER, (1, 3, 1), True),
        (Theorem.INTEGRODIFF_POWER, (1, 1.5, 1), False),
        (Theorem.INTEGRODIFF_POWER, (1, 2, 2), False),
        (Theorem.INTEGRODIFF_MIXED, (2, 1, 2), True),
        (Theorem.INTEGRODIFF_MIXED, (1, 2, 2), False),
        (Theorem.OUTER_POWER, (5, 4, 3, 3), True),
        (Theorem.OUTER_POWER, (2, 4, 3, 3), False),
        (Theorem.OUTER_POWER, (5, 3, 3, 3), False),
        (Theorem.ADDITIVE, (3, 2), True),
        (Theorem.ADDITIVE, (2, 3), False),
        (Theorem.FACTORED, (1, 1), True),
        (Theorem.FACTORED, (1, 0.5), False),
    ],
)
def test_gamma_constraints(theorem, gamma, ok):
    g = GammaParams(*gamma)
    if ok:
        validate_gammas(theorem, g)
    else:
        with pytest.raises(GammaConstraintError):
            validate_gammas(theorem, g)


def test_gamma_values_must_be_finite_nonnegative():
    with pytest.raises(GammaConstraintError):
        GammaParams(-1)
    with pytest.raises(GammaConstraintError):
        GammaParams(math.inf)


# -- problem model ---------------------------------------------------------


def test_problem_defaults_and_padding():
    p = InequalityProblem.build("1", psi=("2",))
    assert len(p.psi) == 6
    assert p.kernel_is_zero(2) and not p.kernel_is_zero(1)
    assert p.f_is_identity
    assert p.phi_fn(0.3) == 1.0
    assert p.da_fn(0.5) == 0.0
    with pytest.raises(ValueError):
        InequalityProblem.build("1", kappa=0)
    with pytest.raises(ValueError):
        InequalityProblem.build("1", horizon=-1)
    with pytest.raises(ValueError):
        InequalityProblem.build("1", psi=("0",) * 7)


# -- hypothesis checks -----------------------------------------------------


def _status(rep, name):
    return {h.name: h for h in rep.items}[name]


def test_example2_hypotheses_hold_apart_from_small_delta_retardation():
    ex = example(2, horizon=8.0)
    rep = check_hypotheses(ex.problem, ex.theorem)
    assert rep.ok
    for h in rep.items:
        if h.name == "f(δ) ≤ δ":
            # cube root exceeds the identity on (0, 1) only
            assert h.status is Status.WARNING and h.first_failure < 1
        else:
            assert h.status is Status.YES, h


def test_example1_warns_about_small_forcing():
    ex = example(1)
    rep = check_hypotheses(ex.problem, ex.theorem)
    assert rep.ok
    h = _status(rep, "a(δ) ≥ 1")
    assert h.status is Status.WARNING and h.first_failure == 0.0


def test_fast_retardation_is_a_hard_failure():
    p = InequalityProblem.build("1", f="2*x", psi=("1",), horizon=1.0)
    rep = check_hypotheses(p, Theorem.ADDITIVE)
    assert not rep.ok
    h = _status(rep, "f(δ) ≤ δ")
    assert h.status is Status.NO
    xs = np.linspace(0, 1, 512)
    assert h.first_failure == xs[1]


def test_hypothesis_list_matches_theorem():
    p = InequalityProblem.build("1 + x", phi="1 + x")
    factored = check_hypotheses(p, Theorem.FACTORED).names()
    additive = check_hypotheses(p, Theorem.ADDITIVE).names()
    assert "Φ(δ) ≥ 1" in factored and "Φ(δ) ≥ 1" not in additive
    assert "psi6 >= 0" in additive and "psi6 >= 0" not in factored


def test_domain_error_reported_as_failure():
    p = InequalityProblem.build("sqrt(x - 0.5)")
    rep = check_hypotheses(p, Theorem.OUTER_POWER)
    assert not rep.ok
    assert any("defined" in h.name for h in rep.hard_failures)


def test_decreasing_forcing_is_a_hard_failure():
    rep = check_hypotheses(InequalityProblem.build("2 - x"), Theorem.ADDITIVE)
    assert [h.name for h in rep.hard_failures] == ["a nondecreasing"]


def test_exponent_violation_is_a_hard_failure():
    p = InequalityProblem.build("1", gamma=(1, 2))
    rep = check_hypotheses(p, Theorem.ADDITIVE)
    assert [h.name for h in rep.hard_failures] == ["exponent constraints"]
