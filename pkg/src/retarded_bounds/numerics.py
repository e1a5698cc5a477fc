"""Quadrature, monotone inversion and grid sampling."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Fn = Callable[[float], float]

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "InversionError",
    "Grid",
    "integrate",
    "invert_monotone",
    "sample_grid",
    "CumulativeIntegral",
    "MonotoneInverse",
]


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_depth: int = 40

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")

    def scaled(self, factor: float) -> "QuadratureConfig":
        return QuadratureConfig(self.abs_tol * factor, self.rel_tol * factor, self.max_depth)


DEFAULT_QUAD = QuadratureConfig()


class QuadratureError(ArithmeticError):
    """Subdivision depth ran out before the tolerance was met."""

    def __init__(self, estimate: float, error_bound: float, lo: float, hi: float):
        super().__init__(
            f"adaptive quadrature on [{lo!r}, {hi!r}] exhausted its depth: "
            f"best estimate {estimate!r}, error bound {error_bound:.3g}"
        )
        self.estimate = estimate
        self.error_bound = error_bound


class InversionError(ValueError):
    def __init__(self, f_lo: float, f_hi: float, y: float):
        super().__init__(f"target {y!r} outside bracket values fn(lo)={f_lo!r}, fn(hi)={f_hi!r}")
        self.f_lo = f_lo
        self.f_hi = f_hi
        self.y = y


_SPLIT = 1.0 / math.sqrt(2.0)


def _simpson_pass(fn: Fn, a, fa, m, fm, b, fb, whole, eps, depth, out):
    """Recursive adaptive Simpson step.  ``out`` = [error_sum, exhausted].

    Children get eps/sqrt(2) rather than eps/2 so that endpoint algebraic
    singularities (error ~ h^1.5) still converge; the caller checks the summed
    error against the global target and retightens when needed.
    """
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = fn(lm)
    frm = fn(rm)
    h = b - a
    left = h / 12.0 * (fa + 4.0 * flm + fm)
    right = h / 12.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * eps:
        out[0] += abs(delta) / 15.0
        return left + right + delta / 15.0
    if depth <= 0:
        out[0] += abs(delta) / 15.0
        out[1] = True
        return left + right + delta / 15.0
    eps *= _SPLIT
    return _simpson_pass(fn, a, fa, lm, flm, m, fm, left, eps, depth - 1, out) + _simpson_pass(
        fn, m, fm, rm, frm, b, fb, right, eps, depth - 1, out
    )


def integrate(fn: Fn, lo: float, hi: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Adaptive Simpson estimate of the integral of ``fn`` over [lo, hi].

    The Richardson-corrected estimate meets
    ``error <= max(cfg.abs_tol, cfg.rel_tol * |result|)`` (summed local error
    estimates).  Raises :class:`QuadratureError` (carrying the best estimate)
    if ``cfg.max_depth`` halvings are not enough.
    """
    if lo == hi:
        return 0.0
    if lo > hi:
        raise ValueError(f"integration limits out of order: {lo!r} > {hi!r}")
    # four initial panels guard against symmetric integrands fooling one panel
    xs = [lo + (hi - lo) * k / 4.0 for k in range(5)]
    xs[-1] = hi
    fs = [fn(x) for x in xs]
    s_left = (xs[2] - xs[0]) / 6.0 * (fs[0] + 4.0 * fs[1] + fs[2])
    s_right = (xs[4] - xs[2]) / 6.0 * (fs[2] + 4.0 * fs[3] + fs[4])
    eps = 0.5 * max(cfg.abs_tol, cfg.rel_tol * abs(s_left + s_right))
    for _ in range(8):
        out = [0.0, False]
        total = _simpson_pass(fn, xs[0], fs[0], xs[1], fs[1], xs[2], fs[2], s_left, eps, cfg.max_depth, out)
        total += _simpson_pass(fn, xs[2], fs[2], xs[3], fs[3], xs[4], fs[4], s_right, eps, cfg.max_depth, out)
        if out[1]:
            raise QuadratureError(total, out[0], lo, hi)
        target = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if out[0] <= target:
            return total
        # the crude start overstated |result| or the error summed too high
        eps *= 0.5 * target / out[0]
    raise QuadratureError(total, out[0], lo, hi)


def invert_monotone(fn: Fn, y: float, lo: float, hi: float, tol: float = 1e-13, rel_tol: float = 0.0) -> float:
    """Solve ``fn(x) = y`` for nondecreasing ``fn`` by bisection on [lo, hi].

    Returns the midpoint of the final bracket, whose width is at most
    ``max(tol, rel_tol * |lo|)`` (or as narrow as floating point allows).
    """
    f_lo, f_hi = fn(lo), fn(hi)
    if not (f_lo <= y <= f_hi):
        raise InversionError(f_lo, f_hi, y)
    if f_lo == y:
        return lo
    while hi - lo > max(tol, rel_tol * abs(lo)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class MonotoneInverse:
    """Memoized inverse of a nondecreasing map on [0, hi].

    Used for the retardation f: the bound formulas need f^{-1} at many
    quadrature nodes, often repeated.
    """

    def __init__(self, fn: Fn, hi: float, rel_tol: float = 1e-14, identity: bool = False):
        self.fn = fn
        self.hi = hi
        self.rel_tol = rel_tol
        self.identity = identity
        self._memo: dict[float, float] = {}

    def __call__(self, y: float) -> float:
        if self.identity:
            return y
        r = self._memo.get(y)
        if r is None:
            # relative stopping keeps 1/f^{-1}(y) accurate for tiny y
            r = invert_monotone(self.fn, y, 0.0, self.hi, tol=0.0, rel_tol=self.rel_tol)
            self._memo[y] = r
        return r


@dataclass(frozen=True)
class Grid:
    """Strictly increasing abscissae with paired values."""

    x: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("grid abscissae and values must be 1-d arrays of equal length")
        if x.size > 1 and not np.all(np.diff(x) > 0):
            raise ValueError("grid abscissae must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return int(self.x.size)

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))


def uniform_abscissae(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("a grid needs at least two points")
    xs = np.linspace(lo, hi, n)
    xs[0], xs[-1] = lo, hi
    return xs


def sample_grid(fn: Fn, lo: float, hi: float, n: int) -> Grid:
    """Evaluate ``fn`` on ``n`` uniformly spaced points including both ends."""
    xs = uniform_abscissae(lo, hi, n)
    return Grid(xs, np.array([fn(float(v)) for v in xs], dtype=float))


class CumulativeIntegral:
    """``C(x) = integral of fn from lo to x`` for any x in [lo, hi].

    The integral is tabulated on ``nodes`` breakpoints (one adaptive
    quadrature per panel); a query adds the adaptive integral from the
    nearest breakpoint below.  Every value therefore carries the full
    quadrature accuracy, unlike interpolating a table.

    With ``log_scale`` (needs lo > 0) breakpoints are geometric and each
    panel is integrated in t = ln(x) as fn(e^t) e^t, which tames integrands
    behaving like 1/x at the left end.
    """

    def __init__(
        self,
        fn: Fn,
        lo: float,
        hi: float,
        cfg: QuadratureConfig = DEFAULT_QUAD,
        nodes: int = 64,
        log_scale: bool = False,
    ):
        if hi < lo:
            raise ValueError("cumulative integral needs lo <= hi")
        if log_scale and lo <= 0:
            raise ValueError("log_scale needs a positive lower limit")
        self.fn = fn
        self.lo = lo
        self.hi = hi
        self.cfg = cfg
        self.log_scale = log_scale
        n = max(2, nodes) if hi > lo else 1
        if hi == lo:
            self.breaks = [lo]
        elif log_scale:
            self.breaks = np.exp(uniform_abscissae(math.log(lo), math.log(hi), n)).tolist()
            self.breaks[0], self.breaks[-1] = lo, hi
        else:
            self.breaks = uniform_abscissae(lo, hi, n).tolist()
        vals = [0.0]
        for a, b in zip(self.breaks, self.breaks[1:]):
            vals.append(vals[-1] + self._panel(a, b))
        self.values = vals

    def _panel(self, a: float, b: float) -> float:
        if not self.log_scale:
            return integrate(self.fn, a, b, self.cfg)
        fn, lo, hi = self.fn, self.lo, self.hi

        def g(t):
            # exp(log(v)) can land an ulp outside [lo, hi]
            x = min(max(math.exp(t), lo), hi)
            return fn(x) * x

        return integrate(g, math.log(a), math.log(b), self.cfg)

    def __call__(self, x: float) -> float:
        if x <= self.lo:
            if x < self.lo:
                raise ValueError(f"{x!r} below cumulative range start {self.lo!r}")
            return 0.0
        if x > self.hi:
            raise ValueError(f"{x!r} beyond cumulative range end {self.hi!r}")
        k = bisect.bisect_right(self.breaks, x) - 1
        k = min(k, len(self.breaks) - 1)
        base = self.breaks[k]
        if x == base:
            return self.values[k]
        return self.values[k] + self._panel(base, x)

    @property
    def total(self) -> float:
        return self.values[-1]


def max_relative_deviation(a: Sequence[float], b: Sequence[float], floor: float = 1e-300) -> float:
    """max_i |a_i - b_i| / max(|b_i|, floor)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = np.abs(a - b)
    denom = np.maximum(np.abs(b), floor)
    rel = np.where(diff == 0.0, 0.0, diff / denom)
    return float(rel.max()) if rel.size else 0.0

