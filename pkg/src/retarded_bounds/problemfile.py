"""Problem files: three TOML sections describing one inequality instance.

    [problem]
    theorem = "outer_power"
    horizon = 2.0
    kappa = 1.0
    gamma1 = 5
    ...
    [functions]
    a = "x"
    f = "sqrt(x)"
    psi1 = "2"
    ...
    [numerics]
    abs_tol = 1e-10
    grid = 129
    dominance = "strict"
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import GammaParams, InequalityProblem, Theorem
from .expr import ExprParseError, parse_expr

_PROBLEM_KEYS = {"theorem", "horizon", "kappa", "gamma1", "gamma2", "gamma3", "gamma4"}
_FUNCTION_KEYS = {"a", "f", "phi"} | {f"psi{k}" for k in range(1, 7)}
_NUMERIC_KEYS = {"abs_tol", "rel_tol", "grid", "zeta6_denominator", "strict_limits", "dominance", "cushion"}


class ProblemFileError(ValueError):
    pass


@dataclass(frozen=True)
class NumericsSection:
    abs_tol: float | None = None
    rel_tol: float | None = None
    grid: int | None = None
    zeta6_denominator: str | None = None
    strict_limits: bool | None = None
    dominance: str | None = None
    cushion: float | None = None


@dataclass(frozen=True)
class ProblemFile:
    theorem: Theorem
    problem: InequalityProblem
    numerics: NumericsSection = field(default_factory=NumericsSection)
    source: str = ""


def _check_keys(section: str, table: dict, allowed: set[str]) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise ProblemFileError(f"[{section}]: unknown key(s) {', '.join(extra)}")


def _number(section: str, key: str, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ProblemFileError(f"[{section}] {key}: expected a number")
    try:
        return float(v)
    except ValueError:
        raise ProblemFileError(f"[{section}] {key}: expected a number, got {v!r}") from None


def parse_problem_text(text: str, source: str = "<string>") -> ProblemFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError(f"{source}: {exc}") from None
    _check_keys("top level", doc, {"problem", "functions", "numerics"})
    prob = doc.get("problem", {})
    funcs = doc.get("functions", {})
    nums = doc.get("numerics", {})
    for name, table, allowed in (
        ("problem", prob, _PROBLEM_KEYS),
        ("functions", funcs, _FUNCTION_KEYS),
        ("numerics", nums, _NUMERIC_KEYS),
    ):
        if not isinstance(table, dict):
            raise ProblemFileError(f"[{name}] must be a table")
        _check_keys(name, table, allowed)

    if "theorem" not in prob:
        raise ProblemFileError("[problem] theorem is required")
    try:
        theorem = Theorem(prob["theorem"])
    except ValueError:
        names = ", ".join(t.value for t in Theorem)
        raise ProblemFileError(f"[problem] theorem must be one of {names}") from None

    exprs = {}
    for key in sorted(funcs):
        v = funcs[key]
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            v = repr(float(v))
        if not isinstance(v, str):
            raise ProblemFileError(f"[functions] {key}: expected an expression string")
        try:
            exprs[key] = parse_expr(v)
        except ExprParseError as exc:
            d = exc.diagnostic
            raise ProblemFileError(f"[functions] {key} = {v!r}: parse error at offset {d.offset}: {d.message}") from None
    if "a" not in exprs:
        raise ProblemFileError("[functions] a is required")

    gamma = GammaParams(*[_number("problem", f"gamma{k}", prob.get(f"gamma{k}", 1.0)) for k in range(1, 5)])
    kw = {}
    for key in ("horizon", "kappa"):
        if key in prob:
            kw[key] = _number("problem", key, prob[key])
    optional = {k: exprs[k] for k in ("f", "phi") if k in exprs}
    psi = tuple(exprs.get(f"psi{k}", "0") for k in range(1, 7))
    try:
        problem = InequalityProblem(a=exprs["a"], psi=psi, gamma=gamma, **optional, **kw)
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from None

    ns = {}
    for key in ("abs_tol", "rel_tol", "cushion"):
        if key in nums:
            ns[key] = _number("numerics", key, nums[key])
    if "grid" in nums:
        g = nums["grid"]
        if isinstance(g, bool) or not isinstance(g, int) or g < 2:
            raise ProblemFileError("[numerics] grid: expected an integer >= 2")
        ns["grid"] = g
    if "strict_limits" in nums:
        if not isinstance(nums["strict_limits"], bool):
            raise ProblemFileError("[numerics] strict_limits: expected true or false")
        ns["strict_limits"] = nums["strict_limits"]
    if "zeta6_denominator" in nums:
        if nums["zeta6_denominator"] not in ("gamma1", "gamma3"):
            raise ProblemFileError("[numerics] zeta6_denominator: expected gamma1 or gamma3")
        ns["zeta6_denominator"] = nums["zeta6_denominator"]
    if "dominance" in nums:
        mode = str(nums["dominance"]).replace("-", "_")
        if mode not in ("strict", "report_only"):
            raise ProblemFileError("[numerics] dominance: expected strict or report-only")
        ns["dominance"] = mode
    return ProblemFile(theorem, problem, NumericsSection(**ns), source)


def load_problem_file(path: str | Path) -> ProblemFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    return parse_problem_text(text, str(path))


def dump_problem(theorem: Theorem | str, p: InequalityProblem, **numerics) -> str:
    """Serialize an instance back to problem-file text."""
    from .expr import to_source

    g = p.gamma
    lines = [
        "[problem]",
        f'theorem = "{Theorem(theorem).value}"',
        f"horizon = {p.horizon!r}",
        f"kappa = {p.kappa!r}",
        f"gamma1 = {g.g1!r}",
        f"gamma2 = {g.g2!r}",
        f"gamma3 = {g.g3!r}",
        f"gamma4 = {g.g4!r}",
        "",
        "[functions]",
        f'a = "{to_source(p.a)}"',
        f'f = "{to_source(p.f)}"',
        f'phi = "{to_source(p.phi)}"',
    ]
    lines += [f'psi{k} = "{to_source(e)}"' for k, e in enumerate(p.psi, 1)]
    if numerics:
        lines += ["", "[numerics]"]
        for k, v in numerics.items():
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, str):
                v = f'"{v}"'
            lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
