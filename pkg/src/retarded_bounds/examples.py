"""Built-in worked examples with their closed-form bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .core import InequalityProblem, Theorem


@dataclass(frozen=True)
class WorkedExample:
    number: int
    theorem: Theorem
    problem: InequalityProblem
    closed_form: Callable[[float], float]
    lo: float = 0.0
    hi: float = 4.0
    points: int = 65


def _closed_form_1(d: float) -> float:
    e = math.exp(18.0 * math.sqrt(d) / 5.0)
    return 0.4 * e + 5.0 / 1296.0 * (-18.0 * math.sqrt(d) + 5.0 * e - 5.0)


def _closed_form_2(d: float) -> float:
    c = 7.0 * d ** (1.0 / 3.0)
    e = math.exp(c)
    z = e + 3.0 / 49.0 * (-c + 22.0 * e - 22.0)
    return z ** (1.0 / 3.0)


def example(number: int, horizon: float = 4.0) -> WorkedExample:
    """Example 1: square-root retardation, outer power 3.  Example 2: cube root, six kernels."""
    if number == 1:
        p = InequalityProblem.build(
            a="x", f="sqrt(x)", psi=("2", "3", "x"), gamma=(5, 4, 3, 3), kappa=1.0, horizon=horizon
        )
        return WorkedExample(1, Theorem.OUTER_POWER, p, _closed_form_1)
    if number == 2:
        p = InequalityProblem.build(
            a="1 + 2*x", f="cbrt(x)", psi=("2", "x", "5", "7", "x", "x"), gamma=(3, 2), kappa=1.0, horizon=horizon
        )
        return WorkedExample(2, Theorem.ADDITIVE, p, _closed_form_2)
    raise ValueError(f"no built-in example {number!r}; choose 1 or 2")
