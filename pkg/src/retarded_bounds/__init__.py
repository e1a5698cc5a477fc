"""Evaluate and check explicit bounds for retarded Gronwall-Bellman-Pachpatte inequalities."""

from .bounds import (
    BellmanOracle,
    BoundCurve,
    BoundDomainError,
    BoundEvaluator,
    BoundOptions,
    PachpatteOracle,
    bound_bellman,
    bound_curve,
    bound_gronwall,
    bound_pachpatte,
    bound_value,
)
from .core import (
    GammaConstraintError,
    GammaParams,
    InequalityProblem,
    Theorem,
    ZetaConstants,
    check_hypotheses,
    zeta_constants,
)
from .expr import ExprDomainError, ExprParseError, parse_expr, to_source
from .numerics import Grid, QuadratureConfig, integrate, invert_monotone
from .verifier import (
    DominanceReport,
    Trajectory,
    check_dominance,
    check_reduction,
    solve_saturated,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
