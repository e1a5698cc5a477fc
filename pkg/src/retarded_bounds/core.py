"""Problem data, the two algebraic lemmas, zeta constants and hypothesis checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .expr import ONE, ZERO, Expr, ExprDomainError, Num, X, compile_expr, constant_value, differentiate_expr, parse_expr

__all__ = [
    "Theorem",
    "GammaParams",
    "GammaConstraintError",
    "ZetaConstants",
    "InequalityProblem",
    "Status",
    "Hypothesis",
    "HypothesisReport",
    "power_sum_rhs",
    "zhao_rhs",
    "zhao_tangent_kappa",
    "zeta_constants",
    "validate_gammas",
    "check_hypotheses",
]

HYPOTHESIS_GRID = 512


class Theorem(str, enum.Enum):
    INTEGRODIFF_POWER = "integrodiff_power"
    INTEGRODIFF_MIXED = "integrodiff_mixed"
    OUTER_POWER = "outer_power"
    ADDITIVE = "additive"
    FACTORED = "factored"

    @property
    def is_integrodiff(self) -> bool:
        return self in (Theorem.INTEGRODIFF_POWER, Theorem.INTEGRODIFF_MIXED)

    @property
    def kernels(self) -> tuple[int, ...]:
        """1-based indices of the kernels the hypothesis inequality uses."""
        return (1, 2, 3, 4, 5, 6) if self is Theorem.ADDITIVE else (1, 2, 3)


class GammaConstraintError(ValueError):
    pass


@dataclass(frozen=True)
class GammaParams:
    g1: float = 1.0
    g2: float = 1.0
    g3: float = 1.0
    g4: float = 1.0

    def __post_init__(self):
        for name in ("g1", "g2", "g3", "g4"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise GammaConstraintError(f"{name} must be a finite nonnegative real, got {v!r}")


_CONSTRAINTS: dict[Theorem, list[tuple[str, Callable[[GammaParams], bool]]]] = {
    Theorem.INTEGRODIFF_POWER: [
        ("gamma1 >= 1", lambda g: g.g1 >= 1),
        ("gamma2 >= 2", lambda g: g.g2 >= 2),
        ("gamma3 >= 1", lambda g: g.g3 >= 1),
        ("gamma2 != gamma3", lambda g: g.g2 != g.g3),
    ],
    Theorem.INTEGRODIFF_MIXED: [
        ("gamma1 >= gamma2", lambda g: g.g1 >= g.g2),
        ("gamma2 >= 1", lambda g: g.g2 >= 1),
        ("gamma3 >= 1", lambda g: g.g3 >= 1),
    ],
    Theorem.OUTER_POWER: [
        ("gamma1 >= gamma4", lambda g: g.g1 >= g.g4),
        ("gamma4 > 0", lambda g: g.g4 > 0),
        ("gamma2 > gamma3", lambda g: g.g2 > g.g3),
        ("gamma3 >= 0", lambda g: g.g3 >= 0),
    ],
    Theorem.ADDITIVE: [
        ("gamma1 >= gamma2", lambda g: g.g1 >= g.g2),
        ("gamma2 >= 1", lambda g: g.g2 >= 1),
    ],
    Theorem.FACTORED: [
        ("gamma1 >= gamma2", lambda g: g.g1 >= g.g2),
        ("gamma2 >= 1", lambda g: g.g2 >= 1),
    ],
}


def validate_gammas(theorem: Theorem, gamma: GammaParams) -> None:
    bad = [name for name, ok in _CONSTRAINTS[Theorem(theorem)] if not ok(gamma)]
    if bad:
        raise GammaConstraintError(f"{Theorem(theorem).value}: exponent constraints violated: {', '.join(bad)}")


# --------------------------------------------------------------------------
# Lemmas
# --------------------------------------------------------------------------


def power_sum_rhs(w1: float, w2: float, gamma: float) -> float:
    """2^(gamma-1) (w1^gamma + w2^gamma), an upper bound for (w1 + w2)^gamma."""
    if gamma < 1:
        raise ValueError(f"power-sum bound needs gamma >= 1, got {gamma!r}")
    if w1 < 0 or w2 < 0:
        raise ValueError("power-sum bound needs nonnegative arguments")
    return 2.0 ** (gamma - 1.0) * (w1**gamma + w2**gamma)


def zhao_rhs(w: float, g1: float, g2: float, kappa: float) -> float:
    """Tangent-line majorant of w^(g2/g1), touching at w = kappa."""
    if not (g1 >= g2 >= 0) or g1 == 0:
        raise ValueError(f"tangent bound needs g1 >= g2 >= 0 and g1 != 0, got g1={g1!r}, g2={g2!r}")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if w < 0:
        raise ValueError("w must be nonnegative")
    return (g2 / g1) * kappa ** ((g2 - g1) / g1) * w + ((g1 - g2) / g1) * kappa ** (g2 / g1)


def zhao_tangent_kappa(w: float) -> float:
    """The kappa that makes the tangent bound exact at ``w`` (w > 0)."""
    if w <= 0:
        raise ValueError("tangent point must be positive")
    return float(w)


@dataclass(frozen=True)
class ZetaConstants:
    z1: float
    z2: float
    z3: float
    z4: float
    z5: float
    z6: float
    z7: float
    z8: float
    z9: float
    z10: float
    kappa: float

    def as_dict(self) -> dict[str, float]:
        return {f"zeta{k}": getattr(self, f"z{k}") for k in range(1, 11)} | {"kappa": self.kappa}


def _ratio_power(num: float, den: float, kappa: float, expo_num: float) -> float:
    """(num/den) * kappa^(expo_num/den); nan when den is zero."""
    if den == 0:
        return math.nan
    return (num / den) * kappa ** (expo_num / den)


def zeta_constants(gamma: GammaParams, kappa: float = 1.0, zeta6_denominator: str = "gamma1") -> ZetaConstants:
    """The ten tangent-line coefficients used by the bound formulas.

    ``zeta6_denominator`` selects gamma1 (as printed) or gamma3 for zeta6.
    Constants whose defining exponent is zero come back as nan.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    g1, g2, g3, g4 = gamma.g1, gamma.g2, gamma.g3, gamma.g4
    if zeta6_denominator == "gamma1":
        z6 = math.nan if g1 == 0 or g3 == 0 else (g3 - 1) / g1 * kappa ** (1 / g3)
    elif zeta6_denominator == "gamma3":
        z6 = _ratio_power(g3 - 1, g3, kappa, 1)
    else:
        raise ValueError(f"zeta6_denominator must be 'gamma1' or 'gamma3', got {zeta6_denominator!r}")
    return ZetaConstants(
        z1=_ratio_power(1, g1, kappa, 1 - g1),
        z2=_ratio_power(g1 - 1, g1, kappa, 1),
        z3=_ratio_power(g2, g1, kappa, g2 - g1),
        z4=_ratio_power(g1 - g2, g1, kappa, g2),
        z5=_ratio_power(1, g3, kappa, 1 - g3),
        z6=z6,
        z7=_ratio_power(g1 - g4, g1, kappa, g4),
        z8=_ratio_power(g4, g1, kappa, g4 - g1),
        z9=_ratio_power(1, g2, kappa, 1 - g2),
        z10=_ratio_power(g2 - 1, g2, kappa, 1),
        kappa=float(kappa),
    )


# --------------------------------------------------------------------------
# Problem instance
# --------------------------------------------------------------------------


def _as_expr(v) -> Expr:
    if isinstance(v, str):
        return parse_expr(v)
    if isinstance(v, (int, float)):
        return Num(float(v))
    return v


@dataclass(frozen=True)
class InequalityProblem:
    """One instance of a hypothesis inequality.

    ``psi`` holds the six kernels in order; theorems with three kernels ignore
    the last three.  String arguments are parsed as expressions.
    """

    a: Expr
    f: Expr = X
    phi: Expr = ONE
    psi: tuple[Expr, ...] = (ZERO,) * 6
    gamma: GammaParams = field(default_factory=GammaParams)
    kappa: float = 1.0
    horizon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "a", _as_expr(self.a))
        object.__setattr__(self, "f", _as_expr(self.f))
        object.__setattr__(self, "phi", _as_expr(self.phi))
        psi = tuple(_as_expr(p) for p in self.psi)
        if len(psi) > 6:
            raise ValueError("at most six kernels")
        object.__setattr__(self, "psi", psi + (ZERO,) * (6 - len(psi)))
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError("kappa must be a positive real")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError("horizon must be a positive real")

    @classmethod
    def build(cls, a, f="x", phi="1", psi=(), gamma=(1, 1, 1, 1), kappa=1.0, horizon=1.0) -> "InequalityProblem":
        """Convenience constructor taking expression strings and a gamma tuple."""
        g = gamma if isinstance(gamma, GammaParams) else GammaParams(*[float(v) for v in gamma])
        return cls(a=a, f=f, phi=phi, psi=tuple(psi), gamma=g, kappa=kappa, horizon=horizon)

    def kernel(self, k: int) -> Expr:
        return self.psi[k - 1]

    # compiled callables, built once per instance
    @cached_property
    def a_fn(self):
        return compile_expr(self.a)

    @cached_property
    def da_fn(self):
        return compile_expr(differentiate_expr(self.a))

    @cached_property
    def f_fn(self):
        return compile_expr(self.f)

    @cached_property
    def phi_fn(self):
        return compile_expr(self.phi)

    @cached_property
    def dphi_fn(self):
        return compile_expr(differentiate_expr(self.phi))

    @cached_property
    def psi_fns(self):
        return tuple(compile_expr(p) for p in self.psi)

    def kernel_is_zero(self, k: int) -> bool:
        return constant_value(self.psi[k - 1]) == 0.0

    @property
    def f_is_identity(self) -> bool:
        return self.f == X

    def zetas(self, zeta6_denominator: str = "gamma1") -> ZetaConstants:
        return zeta_constants(self.gamma, self.kappa, zeta6_denominator)


# --------------------------------------------------------------------------
# Hypothesis checks
# --------------------------------------------------------------------------


class Status(str, enum.Enum):
    YES = "yes"
    NO = "no"
    WARNING = "warning"


@dataclass(frozen=True)
class Hypothesis:
    name: str
    status: Status
    first_failure: float | None = None
    detail: str = ""


@dataclass(frozen=True)
class HypothesisReport:
    theorem: Theorem
    items: tuple[Hypothesis, ...]

    @property
    def hard_failures(self) -> list[Hypothesis]:
        return [h for h in self.items if h.status is Status.NO]

    @property
    def warnings(self) -> list[Hypothesis]:
        return [h for h in self.items if h.status is Status.WARNING]

    @property
    def ok(self) -> bool:
        return not self.hard_failures

    def names(self) -> list[str]:
        return [h.name for h in self.items]

    def lines(self) -> list[str]:
        out = []
        for h in self.items:
            where = "" if h.first_failure is None else f" (first failure at delta={h.first_failure:.6g})"
            extra = f": {h.detail}" if h.detail else ""
            out.append(f"[{h.status.value:>7}] {h.name}{where}{extra}")
        return out


def _sample(fn, xs):
    vals = np.empty_like(xs)
    for i, x in enumerate(xs):
        vals[i] = fn(float(x))
    return vals


def _first(xs, mask) -> float | None:
    idx = np.flatnonzero(mask)
    return float(xs[idx[0]]) if idx.size else None


def check_hypotheses(p: InequalityProblem, theorem: Theorem | str, n: int = HYPOTHESIS_GRID) -> HypothesisReport:
    """Evaluate the selected theorem's standing assumptions on a uniform grid.

    ``a >= 1``, ``Phi >= 1`` and kernel sign conditions are warnings; the
    retardation conditions and monotonicity of the data are hard failures,
    except that ``f(delta) <= delta`` violations confined to (0, 1) are
    warnings (power-law retardations such as sqrt and cbrt exceed delta
    there).
    """
    theorem = Theorem(theorem)
    xs = np.linspace(0.0, p.horizon, n)
    items: list[Hypothesis] = []

    def sampled(label, fn):
        try:
            return _sample(fn, xs), None
        except ExprDomainError as exc:
            items.append(Hypothesis(f"{label} defined on [0, T]", Status.NO, exc.x, str(exc)))
            return None, exc

    fv, _ = sampled("f", p.f_fn)
    if fv is not None:
        f0 = fv[0]
        items.append(
            Hypothesis("f(0) = 0", Status.YES if abs(f0) <= 1e-12 else Status.NO, None if abs(f0) <= 1e-12 else 0.0)
        )
        tol = 1e-12 * np.maximum(1.0, np.abs(fv[1:]))
        dec = np.diff(fv) < -tol
        items.append(Hypothesis("f nondecreasing", Status.NO if dec.any() else Status.YES, _first(xs[1:], dec)))
        over = (fv > xs + 1e-12 * np.maximum(1.0, xs)) & (xs > 0)
        if not over.any():
            items.append(Hypothesis("f(δ) ≤ δ", Status.YES))
        elif np.all(xs[over] < 1.0):
            items.append(
                Hypothesis(
                    "f(δ) ≤ δ",
                    Status.WARNING,
                    _first(xs, over),
                    "violated only on (0, 1)",
                )
            )
        else:
            items.append(Hypothesis("f(δ) ≤ δ", Status.NO, _first(xs, over)))
        if fv[-1] > p.horizon * (1 + 1e-12):
            items.append(Hypothesis("f(T) <= T", Status.NO, float(xs[-1])))

    av, _ = sampled("a", p.a_fn)
    if av is not None:
        dec = np.diff(av) < -1e-12 * np.maximum(1.0, np.abs(av[1:]))
        items.append(Hypothesis("a nondecreasing", Status.NO if dec.any() else Status.YES, _first(xs[1:], dec)))
        low = av < 1.0 - 1e-12
        items.append(Hypothesis("a(δ) ≥ 1", Status.WARNING if low.any() else Status.YES, _first(xs, low)))

    if theorem is Theorem.FACTORED:
        pv, _ = sampled("Phi", p.phi_fn)
        if pv is not None:
            dec = np.diff(pv) < -1e-12 * np.maximum(1.0, np.abs(pv[1:]))
            items.append(Hypothesis("Phi nondecreasing", Status.NO if dec.any() else Status.YES, _first(xs[1:], dec)))
            low = pv < 1.0 - 1e-12
            items.append(Hypothesis("Φ(δ) ≥ 1", Status.WARNING if low.any() else Status.YES, _first(xs, low)))

    for k in theorem.kernels:
        kv, _ = sampled(f"psi{k}", p.psi_fns[k - 1])
        if kv is not None:
            neg = kv < 0
            items.append(Hypothesis(f"psi{k} >= 0", Status.WARNING if neg.any() else Status.YES, _first(xs, neg)))

    try:
        validate_gammas(theorem, p.gamma)
        items.append(Hypothesis("exponent constraints", Status.YES))
    except GammaConstraintError as exc:
        items.append(Hypothesis("exponent constraints", Status.NO, None, str(exc)))

    return HypothesisReport(theorem, tuple(items))
