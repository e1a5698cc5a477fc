"""Explicit bound functions for the five retarded inequalities and three
classical oracles.

Every theorem bound has the same skeleton.  With ``s = f(delta)`` and a
kernel ``K`` integrated from the lower limit ``lo``,

    z(s) = A * exp(m * C(s)) + integral_lo^s F(xi) exp(m * (C(s) - C(xi))) dxi,
    C(s) = integral_lo^s K(theta) dtheta,

and the bound is a theorem-specific transform of ``z``.  The convolution is
rewritten as ``exp(m C(s)) * D(s)`` with ``D(s) = integral F exp(-m C)``, so a
whole curve costs two cumulative tables instead of a nested quadrature per
point.  In ``strict_limits`` mode the convolution uses ``exp(m C(s))`` for
every xi, which is how two of the closed forms are typeset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import InequalityProblem, Theorem, ZetaConstants, validate_gammas
from .expr import Expr, compile_expr, is_constant
from .numerics import (
    DEFAULT_QUAD,
    CumulativeIntegral,
    Grid,
    InversionError,
    MonotoneInverse,
    QuadratureConfig,
    integrate,
    invert_monotone,
    uniform_abscissae,
)

__all__ = [
    "BoundOptions",
    "BoundCurve",
    "BoundDomainError",
    "SingularIntegrandError",
    "BoundEvaluator",
    "bound_integrodiff_power",
    "bound_integrodiff_mixed",
    "bound_outer_power",
    "bound_additive",
    "bound_factored",
    "bound_value",
    "bound_curve",
    "bound_gronwall",
    "bound_bellman",
    "bound_pachpatte",
    "BellmanOracle",
    "PachpatteOracle",
]


class BoundDomainError(ArithmeticError):
    pass


class SingularIntegrandError(BoundDomainError):
    pass


@dataclass(frozen=True)
class BoundOptions:
    """Knobs shared by all bound evaluations.

    ``cushion`` is the left offset excluded from the integrals of the
    integro-differential power bound, whose kernel has a 1/f^{-1}(theta)
    term.  ``nodes`` is the breakpoint count of the cumulative tables.
    """

    quad: QuadratureConfig = DEFAULT_QUAD
    zeta6_denominator: str = "gamma1"
    strict_limits: bool = False
    cushion: float = 1e-8
    nodes: int = 64

    def tightened(self, factor: float) -> "BoundOptions":
        return replace(self, quad=self.quad.scaled(factor))


DEFAULT_OPTIONS = BoundOptions()


@dataclass(frozen=True)
class BoundCurve:
    theorem: str
    grid: Grid
    quad: QuadratureConfig
    zetas: ZetaConstants | None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def delta(self) -> np.ndarray:
        return self.grid.x

    @property
    def values(self) -> np.ndarray:
        return self.grid.y


class _Kernelized:
    """Holds the two cumulative tables for one (K, F, m, lo) combination."""

    def __init__(self, K, F, m: float, lo: float, hi: float, opts: BoundOptions, strict: bool, log_scale: bool = False):
        self.K, self.F, self.m, self.lo, self.hi = K, F, m, lo, hi
        self.opts = opts
        self.strict = strict
        self.log_scale = log_scale
        self._C = None
        self._D = None

    @property
    def C(self) -> CumulativeIntegral:
        if self._C is None:
            self._C = CumulativeIntegral(self.K, self.lo, self.hi, self.opts.quad, self.opts.nodes, self.log_scale)
        return self._C

    @property
    def D(self) -> CumulativeIntegral:
        if self._D is None:
            if self.strict:
                integrand = self.F
            else:
                C, m, F = self.C, self.m, self.F

                def integrand(xi):
                    fx = F(xi)
                    return 0.0 if fx == 0.0 else fx * math.exp(-m * C(xi))

            self._D = CumulativeIntegral(integrand, self.lo, self.hi, self.opts.quad, self.opts.nodes, self.log_scale)
        return self._D

    def z(self, s: float, A: float, with_forcing: bool) -> float:
        if s <= self.lo:
            return A
        grow = math.exp(self.m * self.C(s))
        total = A * grow
        if with_forcing:
            total += grow * self.D(s)
        return total


def _const_zero(_):
    return 0.0


class BoundEvaluator:
    """Point evaluator of one theorem's bound on [0, span].

    Construction validates the exponent constraints; cumulative tables are
    built on the first evaluation and reused for every later delta.
    """

    def __init__(
        self,
        p: InequalityProblem,
        theorem: Theorem | str,
        options: BoundOptions = DEFAULT_OPTIONS,
        span: float | None = None,
    ):
        self.p = p
        self.theorem = Theorem(theorem)
        self.opts = options
        validate_gammas(self.theorem, p.gamma)
        self.span = float(p.horizon if span is None else span)
        self.zetas = p.zetas(options.zeta6_denominator)
        self.s_max = p.f_fn(self.span)
        if not (self.s_max >= 0):
            raise BoundDomainError(f"f({self.span!r}) = {self.s_max!r} is negative")
        self.finv = MonotoneInverse(p.f_fn, self._inverse_bracket(), identity=p.f_is_identity)
        builder = {
            Theorem.OUTER_POWER: self._setup_outer_power,
            Theorem.ADDITIVE: self._setup_additive,
            Theorem.FACTORED: self._setup_factored,
            Theorem.INTEGRODIFF_MIXED: self._setup_mixed,
            Theorem.INTEGRODIFF_POWER: self._setup_power,
        }[self.theorem]
        builder()

    def _inverse_bracket(self) -> float:
        # f(delta) <= delta means f^{-1}(theta) >= theta; f(span) bounds the
        # needed range so span is always a valid right end.
        return max(self.span, self.s_max)

    # -- per-theorem kernels ----------------------------------------------

    def _psi(self, k: int) -> Callable[[float], float]:
        return _const_zero if self.p.kernel_is_zero(k) else self.p.psi_fns[k - 1]

    def _setup_outer_power(self):
        p, z = self.p, self.zetas
        g = p.gamma
        d = g.g2 - g.g3
        da, finv = p.da_fn, self.finv
        psi1, psi2, psi3 = self._psi(1), self._psi(2), self._psi(3)

        def K(t):
            return da(finv(t)) + psi1(t) + psi2(t)

        def F(xi):
            return (d / g.g2) * psi3(xi)

        self.A = (z.z7 + z.z8 * p.a_fn(0.0)) ** d
        self.has_forcing = not p.kernel_is_zero(3)
        self.kern = _Kernelized(K, F, d * z.z8, 0.0, self.s_max, self.opts, self.opts.strict_limits)
        self.exponent = 1.0 / d
        self.meta = {"second_exponential_lower_limit": "0" if self.opts.strict_limits else "xi"}

    def _setup_additive(self):
        p, z = self.p, self.zetas
        da, finv = p.da_fn, self.finv
        ps = [self._psi(k) for k in range(1, 7)]

        def K(t):
            return z.z1 * ps[0](t) + z.z1 * ps[2](t) + z.z3 * ps[3](t)

        def F(xi):
            return (
                da(finv(xi))
                + z.z2 * ps[0](xi)
                + ps[1](xi)
                + z.z2 * ps[2](xi)
                + ps[5](xi)
                + z.z4 * ps[3](xi)
                + ps[4](xi)
            )

        self.A = p.a_fn(0.0)
        self.has_forcing = True
        self.kern = _Kernelized(K, F, 1.0, 0.0, self.s_max, self.opts, strict=False)
        self.exponent = 1.0 / p.gamma.g1
        self.meta = {"outer_exponent": "1/gamma1"}

    def _setup_factored(self):
        p, z = self.p, self.zetas
        da, finv = p.da_fn, self.finv
        phi, dphi = p.phi_fn, p.dphi_fn
        psi1, psi2, psi3 = self._psi(1), self._psi(2), self._psi(3)
        strict = self.opts.strict_limits

        def M(t):
            g = finv(t)
            ph = phi(g)
            return dphi(g) / ph + z.z1 * ph * psi1(t) + z.z9 * ph * psi2(t) + z.z3 * psi3(t)

        # with constant Phi and a the composed argument never matters
        if strict and not (is_constant(p.phi) and is_constant(p.a)):
            a_fn = p.a_fn
            a_hi = max(self.span, 1.0)
            while a_fn(a_hi) < self.s_max and a_hi < 1e6:
                a_hi *= 2.0

            def comp(xi):
                try:
                    return invert_monotone(a_fn, xi, 0.0, a_hi, 1e-13 * a_hi)
                except InversionError as exc:
                    raise BoundDomainError(
                        f"as-printed composition a^{{-1}}({xi!r}) is undefined: {exc}"
                    ) from None

        else:
            comp = finv

        def N(xi):
            g = comp(xi)
            ph = phi(g)
            return ph * da(g) + z.z2 * ph * psi1(xi) + z.z10 * ph * psi2(xi) + z.z4 * psi3(xi)

        self.A = phi(0.0) * p.a_fn(0.0)
        self.has_forcing = True
        self.kern = _Kernelized(M, N, 1.0, 0.0, self.s_max, self.opts, strict)
        self.exponent = 1.0 / p.gamma.g1
        self.meta = {
            "composition": "a^-1" if strict else "f^-1",
            "second_exponential_lower_limit": "0" if strict else "xi",
        }

    def _setup_mixed(self):
        p, z = self.p, self.zetas
        if z.z3 == 0:
            raise BoundDomainError("zeta3 vanishes; the mixed bound divides by it")
        da, finv = p.da_fn, self.finv
        psi1, psi2, psi3 = self._psi(1), self._psi(2), self._psi(3)
        r = z.z1 / z.z3

        def H(t):
            g = finv(t)
            return g * z.z1 * psi1(t) + z.z3 * z.z5 * psi2(t) + r * g * psi3(t)

        def F(xi):
            g = finv(xi)
            return z.z3 * da(g) + z.z2 * z.z3 * psi1(xi) * g + z.z6 * psi2(xi) + g * z.z2 * psi3(xi)

        self.A = z.z3 * p.a_fn(0.0) + z.z4
        self.has_forcing = True
        self.kern = _Kernelized(H, F, 1.0, 0.0, self.s_max, self.opts, strict=False)
        self.meta = {}

    def _setup_power(self):
        p, z = self.p, self.zetas
        g1, g2, g3 = p.gamma.g1, p.gamma.g2, p.gamma.g3
        d = g2 - g3
        da, finv = p.da_fn, self.finv
        psi1, psi2, psi3 = self._psi(1), self._psi(2), self._psi(3)
        c_half = 2.0 ** ((g2 - 1.0) / g2)
        z1, z2 = z.z1, z.z2
        z2g2 = z2**g2
        z2g3 = z2**g3
        p2 = 2.0 ** (g2 - 1.0)
        p3 = 2.0 ** (g3 - 1.0) / g2
        eps = self.opts.cushion
        if eps <= 0:
            raise SingularIntegrandError(
                "the 1/f^{-1}(theta) kernel term is not integrable at theta = 0; a positive cushion is required"
            )

        def G(t):
            u = finv(t)
            if u <= 0.0:
                raise SingularIntegrandError(f"f^{{-1}}({t!r}) = 0 inside the integration range")
            s1 = psi1(t)
            return (
                c_half * u * z1 * da(u)
                + p2 * u ** (g2 - 1.0) * z2g2
                + p3 * psi3(t) * u**g3 * z2g3
                + u * z1 * s1
                + c_half * u * u * z1 * z2 * s1
                + c_half * u * z1 * psi2(t)
                + 1.0 / u
            )

        scale = (d / g2) * 2.0 ** ((g3 - g2) / g2)

        def F(xi):
            return scale * psi3(xi)

        self.A = 0.0
        self.has_forcing = not p.kernel_is_zero(3)
        self.kern = _Kernelized(G, F, d, eps, max(eps, self.s_max), self.opts, strict=False, log_scale=True)
        self.exponent = 1.0 / d
        self.pre = 2.0 ** ((1.0 - g2) / g2)
        self.meta = {"cushion": eps}

    # -- evaluation --------------------------------------------------------

    def z_value(self, delta: float) -> float:
        s = self.p.f_fn(delta)
        if s > self.s_max * (1 + 1e-12) + 1e-300:
            raise BoundDomainError(f"delta={delta!r} maps beyond the evaluator span ({self.span!r})")
        s = min(s, self.kern.hi)
        return self.kern.z(s, self.A, self.has_forcing)

    def __call__(self, delta: float) -> float:
        if delta < 0:
            raise BoundDomainError("delta must be nonnegative")
        if delta > self.span * (1 + 1e-12):
            raise BoundDomainError(f"delta={delta!r} beyond evaluator span {self.span!r}")
        zv = self.z_value(delta)
        th = self.theorem
        z = self.zetas
        if th is Theorem.INTEGRODIFF_MIXED:
            val = delta * z.z2 + (z.z1 / z.z3) * delta * zv
        elif th is Theorem.INTEGRODIFF_POWER:
            val = delta * z.z2 + self.pre * _root(zv, self.exponent, th)
        else:
            val = _root(zv, self.exponent, th)
        if not math.isfinite(val):
            raise BoundDomainError(f"{th.value} bound is not finite at delta={delta!r}")
        return val


def _root(zv: float, exponent: float, th: Theorem) -> float:
    if zv < 0:
        raise BoundDomainError(f"{th.value}: bracketed quantity {zv!r} is negative; cannot take a real root")
    if zv == 0.0:
        if exponent < 0:
            raise BoundDomainError(f"{th.value}: zero raised to a negative power")
        return 0.0
    try:
        return zv**exponent
    except OverflowError:
        return math.inf


def bound_value(p: InequalityProblem, theorem: Theorem | str, delta: float, options: BoundOptions = DEFAULT_OPTIONS) -> float:
    return BoundEvaluator(p, theorem, options, span=max(float(delta), 0.0))(delta)


def bound_integrodiff_power(p: InequalityProblem, delta: float, options: BoundOptions = DEFAULT_OPTIONS) -> float:
    """Bound on u for (u')^g1 <= a + int Psi1 u + int Psi2 (u^g2 + int Psi3 u^g3)^(1/g2)."""
    return bound_value(p, Theorem.INTEGRODIFF_POWER, delta, options)


def bound_integrodiff_mixed(p: InequalityProblem, delta: float, options: BoundOptions = DEFAULT_OPTIONS) -> float:
    """Bound for the integro-differential form whose inner term carries (u')^g2."""
    return bound_value(p, Theorem.INTEGRODIFF_MIXED, delta, options)


def bound_outer_power(p: InequalityProblem, delta: float, options: BoundOptions = DEFAULT_OPTIONS) -> float:
    return bound_value(p, Theorem.OUTER_POWER, delta, options)


def bound_additive(p: InequalityProblem, delta: float, options: BoundOptions = DEFAULT_OPTIONS) -> float:
    return bound_value(p, Theorem.ADDITIVE, delta, options)


def bound_factored(p: InequalityProblem, delta: float, options: BoundOptions = DEFAULT_OPTIONS) -> float:
    return bound_value(p, Theorem.FACTORED, delta, options)


def bound_curve(
    p: InequalityProblem,
    theorem: Theorem | str,
    n: int,
    options: BoundOptions = DEFAULT_OPTIONS,
    lo: float = 0.0,
    hi: float | None = None,
) -> BoundCurve:
    """Sample the bound on ``n`` uniform points of [lo, hi] (default [0, T])."""
    hi = p.horizon if hi is None else hi
    ev = BoundEvaluator(p, theorem, options, span=hi)
    xs = uniform_abscissae(lo, hi, n)
    ys = np.array([ev(float(x)) for x in xs])
    if np.any(ys < 0):
        raise BoundDomainError(f"{ev.theorem.value} bound is negative on the grid")
    return BoundCurve(ev.theorem.value, Grid(xs, ys), options.quad, ev.zetas, dict(ev.meta))


# --------------------------------------------------------------------------
# Classical oracles
# --------------------------------------------------------------------------


def _fn(w) -> Callable[[float], float]:
    if callable(w):
        return w
    if isinstance(w, str):
        from .expr import parse_expr

        w = parse_expr(w)
    return compile_expr(w)


def bound_gronwall(h1: float, h2: float, h: float) -> float:
    """h2 * h * exp(h1 * h)."""
    if h1 < 0 or h2 < 0 or h <= 0:
        raise ValueError("Gronwall bound needs h1, h2 >= 0 and h > 0")
    return h2 * h * math.exp(h1 * h)


class BellmanOracle:
    """c * exp(integral_0^delta w) on [0, span]."""

    def __init__(self, c: float, w: Expr | str | Callable, span: float, quad: QuadratureConfig = DEFAULT_QUAD, nodes: int = 64):
        if c < 0:
            raise ValueError("c must be nonnegative")
        self.c = c
        self.W = CumulativeIntegral(_fn(w), 0.0, span, quad, nodes)

    def __call__(self, delta: float) -> float:
        if self.c == 0.0:
            return 0.0
        return self.c * math.exp(self.W(delta))


class PachpatteOracle:
    """c [1 + integral_0^delta w(s) exp(integral_0^s (w + wt)) ds] on [0, span]."""

    def __init__(
        self,
        c: float,
        w: Expr | str | Callable,
        wt: Expr | str | Callable,
        span: float,
        quad: QuadratureConfig = DEFAULT_QUAD,
        nodes: int = 64,
    ):
        if c < 0:
            raise ValueError("c must be nonnegative")
        self.c = c
        wf, wtf = _fn(w), _fn(wt)
        E = CumulativeIntegral(lambda s: wf(s) + wtf(s), 0.0, span, quad, nodes)

        def inner(s):
            ws = wf(s)
            return 0.0 if ws == 0.0 else ws * math.exp(E(s))

        self.I = CumulativeIntegral(inner, 0.0, span, quad, nodes)

    def __call__(self, delta: float) -> float:
        return self.c * (1.0 + self.I(delta))


def bound_bellman(c: float, w, delta: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    if c < 0:
        raise ValueError("c must be nonnegative")
    if c == 0.0:
        return 0.0
    return c * math.exp(integrate(_fn(w), 0.0, delta, quad))


def bound_pachpatte(c: float, w, wt, delta: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    if delta == 0.0:
        return float(c)
    return PachpatteOracle(c, w, wt, delta, quad)(delta)
