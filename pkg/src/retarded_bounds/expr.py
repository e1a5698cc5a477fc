"""Closed-form scalar functions of one variable.

Problem files describe the forcing term, the retardation and the kernels as
short expressions in ``x``::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' literal)?
    atom   := literal | 'x' | func '(' expr ')' | '(' expr ')'
    func   := 'exp' | 'sqrt' | 'cbrt'

Literals are nonnegative decimals (``2``, ``0.25``, ``.5``).  There is no
unary minus and no implicit multiplication.  Trees are immutable; evaluation
goes through a compiled closure with a tree-walking fallback that produces
precise domain diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Callable, Union

__all__ = [
    "Num",
    "Var",
    "BinOp",
    "Pow",
    "Func",
    "Expr",
    "ParseDiagnostic",
    "ExprParseError",
    "ExprDomainError",
    "parse_expr",
    "try_parse_expr",
    "eval_expr",
    "differentiate_expr",
    "compile_expr",
    "to_source",
    "is_constant",
    "constant_value",
]

FUNCTIONS = ("exp", "sqrt", "cbrt")


@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError(f"literal must be finite and nonnegative, got {self.value!r}")


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float  # nonnegative literal

    def __post_init__(self):
        if not math.isfinite(self.exponent) or self.exponent < 0:
            raise ValueError(f"exponent must be a nonnegative literal, got {self.exponent!r}")


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")


Expr = Union[Num, Var, BinOp, Pow, Func]

X = Var()
ZERO = Num(0.0)
ONE = Num(1.0)


@dataclass(frozen=True)
class ParseDiagnostic:
    """Where and why parsing stopped."""

    offset: int
    expected: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        exp = ", ".join(repr(e) for e in self.expected)
        return f"offset {self.offset}: {self.message} (expected {exp})"


class ExprParseError(ValueError):
    def __init__(self, diagnostic: ParseDiagnostic, source: str = ""):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic
        self.source = source


class ExprDomainError(ArithmeticError):
    """Evaluation left the real domain; ``subexpr`` names the culprit."""

    def __init__(self, message: str, subexpr: Expr, x: float):
        super().__init__(f"{message} in '{to_source(subexpr)}' at x={x!r}")
        self.subexpr = subexpr
        self.x = x


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def _tokenize(src: str):
    """Yield (kind, text, offset).  kind is num, ident, op or end."""
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
        elif c.isdigit() or c == ".":
            j = i
            while j < n and src[j].isdigit():
                j += 1
            if j < n and src[j] == ".":
                j += 1
                while j < n and src[j].isdigit():
                    j += 1
            text = src[i:j]
            if text == ".":
                raise ExprParseError(ParseDiagnostic(i, ("literal",), "lone '.' is not a number"), src)
            yield "num", text, i
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            yield "ident", src[i:j], i
            i = j
        elif c in "+-*/^(),":
            yield "op", c, i
            i += 1
        else:
            raise ExprParseError(
                ParseDiagnostic(i, ("literal", "x", "(", *FUNCTIONS), f"unexpected character {c!r}"), src
            )
    yield "end", "", n


class _Parser:
    _ATOM_START = ("literal", "x", "(", *FUNCTIONS)

    def __init__(self, src: str):
        self.src = src
        self.tokens = list(_tokenize(src))
        self.pos = 0

    @property
    def tok(self):
        return self.tokens[self.pos]

    def fail(self, expected, message):
        raise ExprParseError(ParseDiagnostic(self.tok[2], tuple(expected), message), self.src)

    def describe(self):
        kind, text, _ = self.tok
        return "end of input" if kind == "end" else f"{text!r}"

    def expect_op(self, op):
        kind, text, _ = self.tok
        if kind == "op" and text == op:
            self.pos += 1
            return
        self.fail((op,), f"expected {op!r}, found {self.describe()}")

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok[0] != "end":
            self.fail(("+", "-", "*", "/", "^", "end of input"), f"unexpected {self.describe()}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self.pos += 1
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.tok[1]
            self.pos += 1
            left = BinOp(op, left, self.factor())
        return left

    def factor(self) -> Expr:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.pos += 1
            kind, text, _ = self.tok
            if kind != "num":
                self.fail(("literal",), "exponent must be a numeric literal")
            self.pos += 1
            return Pow(base, float(text))
        return base

    def atom(self) -> Expr:
        kind, text, _ = self.tok
        if kind == "num":
            self.pos += 1
            return Num(float(text))
        if kind == "ident":
            if text == "x":
                self.pos += 1
                return X
            if text in FUNCTIONS:
                self.pos += 1
                self.expect_op("(")
                arg = self.expr()
                if self.tok[0] == "op" and self.tok[1] == ",":
                    self.fail((")",), "functions take a single argument")
                self.expect_op(")")
                return Func(text, arg)
            self.fail(self._ATOM_START, f"unknown name {text!r}")
        if kind == "op" and text == "(":
            self.pos += 1
            inner = self.expr()
            self.expect_op(")")
            return inner
        self.fail(self._ATOM_START, f"expected an operand, found {self.describe()}")


def parse_expr(src: str) -> Expr:
    """Parse ``src`` into an expression tree.

    Raises :class:`ExprParseError` whose ``diagnostic`` carries the offset and
    expected tokens.
    """
    return _Parser(src).parse()


def try_parse_expr(src: str) -> Expr | ParseDiagnostic:
    try:
        return parse_expr(src)
    except ExprParseError as exc:
        return exc.diagnostic


# --------------------------------------------------------------------------
# Printing
# --------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(v: float) -> str:
    # repr is the shortest round-tripping form; Decimal drops the exponent.
    return format(Decimal(repr(float(v))), "f")


def to_source(e: Expr) -> str:
    """Render ``e`` in the input grammar with minimal parentheses."""
    return _src(e, 0)


def _src_atom_ctx(e: Expr) -> bool:
    return isinstance(e, (Num, Var, Func))


# Pow bases must be atoms; wrap anything else.
def _src_pow_base(e: Expr) -> str:
    s = _src(e, 0)
    return s if _src_atom_ctx(e) else f"({s})"


def _src(e: Expr, ctx: int) -> str:
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Func):
        return f"{e.name}({_src(e.arg, 0)})"
    if isinstance(e, Pow):
        return f"{_src_pow_base(e.base)}^{_fmt_num(e.exponent)}"
    p = _PREC[e.op]
    text = f"{_src(e.left, p)} {e.op} {_src(e.right, p + 1)}"
    return f"({text})" if p < ctx else text


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


def _cbrt(v: float) -> float:
    if v == 0.0:
        return 0.0
    a = abs(v)
    y = a ** (1.0 / 3.0)
    y -= (y * y * y - a) / (3.0 * y * y)
    return math.copysign(y, v)


def _walk(e: Expr, x: float) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, BinOp):
        a = _walk(e.left, x)
        b = _walk(e.right, x)
        if e.op == "+":
            r = a + b
        elif e.op == "-":
            r = a - b
        elif e.op == "*":
            r = a * b
        else:
            if b == 0.0:
                raise ExprDomainError("division by zero", e, x)
            r = a / b
    elif isinstance(e, Pow):
        a = _walk(e.base, x)
        if a < 0 and not float(e.exponent).is_integer():
            raise ExprDomainError("negative base with fractional exponent", e, x)
        try:
            r = math.pow(a, e.exponent)
        except OverflowError:
            raise ExprDomainError("overflow", e, x) from None
    else:
        a = _walk(e.arg, x)
        if e.name == "exp":
            try:
                r = math.exp(a)
            except OverflowError:
                raise ExprDomainError("overflow", e, x) from None
        elif e.name == "sqrt":
            if a < 0:
                raise ExprDomainError("square root of a negative number", e, x)
            r = math.sqrt(a)
        else:
            r = _cbrt(a)
    if not math.isfinite(r):
        raise ExprDomainError("non-finite value", e, x)
    return r


def eval_expr(e: Expr, x: float) -> float:
    """Evaluate ``e`` at ``x``; raises :class:`ExprDomainError` off-domain."""
    return _walk(e, float(x))


def _py(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, BinOp):
        return f"({_py(e.left)} {e.op} {_py(e.right)})"
    if isinstance(e, Pow):
        if e.exponent == 1.0:
            return _py(e.base)
        if e.exponent == 2.0:
            b = _py(e.base)
            return f"({b} * {b})" if isinstance(e.base, (Var, Num)) else f"_pow({b}, 2.0)"
        return f"_pow({_py(e.base)}, {e.exponent!r})"
    name = {"exp": "_exp", "sqrt": "_sqrt", "cbrt": "_cbrt"}[e.name]
    return f"{name}({_py(e.arg)})"


_COMPILE_ENV = {"_pow": math.pow, "_exp": math.exp, "_sqrt": math.sqrt, "_cbrt": _cbrt}


def compile_expr(e: Expr) -> Callable[[float], float]:
    """Return a fast ``float -> float`` callable equivalent to ``eval_expr``.

    Any arithmetic failure in the fast path is replayed through the tree
    walker so the caller still gets an :class:`ExprDomainError`.
    """
    code = compile(f"lambda x: {_py(e)}", "<expr>", "eval")
    fast = eval(code, dict(_COMPILE_ENV))

    def fn(x: float) -> float:
        try:
            r = fast(x)
        except (ValueError, ZeroDivisionError, OverflowError, TypeError):
            return _walk(e, float(x))
        if r != r or r in (math.inf, -math.inf) or isinstance(r, complex):
            return _walk(e, float(x))
        return r

    fn.expr = e  # type: ignore[attr-defined]
    return fn


# --------------------------------------------------------------------------
# Differentiation with light constant folding
# --------------------------------------------------------------------------


def is_constant(e: Expr) -> bool:
    if isinstance(e, Num):
        return True
    if isinstance(e, Var):
        return False
    if isinstance(e, BinOp):
        return is_constant(e.left) and is_constant(e.right)
    if isinstance(e, Pow):
        return is_constant(e.base)
    return is_constant(e.arg)


def constant_value(e: Expr) -> float | None:
    """Value of a variable-free tree, or None if ``e`` depends on x."""
    if not is_constant(e):
        return None
    try:
        return _walk(e, 0.0)
    except ExprDomainError:
        return None


def _num(v: float) -> Expr:
    return Num(float(v))


def _add(a: Expr, b: Expr) -> Expr:
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if b == ZERO:
        return a
    if isinstance(a, Num) and isinstance(b, Num) and a.value >= b.value:
        return _num(a.value - b.value)
    if a == b:
        return ZERO
    return BinOp("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value * b.value)
    if isinstance(b, Num) and not isinstance(a, Num):
        a, b = b, a
    if isinstance(a, Num) and isinstance(b, BinOp) and b.op == "*" and isinstance(b.left, Num):
        return _mul(_num(a.value * b.left.value), b.right)
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if a == ZERO:
        return ZERO
    if b == ONE:
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return _num(a.value / b.value)
    return BinOp("/", a, b)


def _pow(base: Expr, c: float) -> Expr:
    if c == 0.0:
        return ONE
    if c == 1.0:
        return base
    if isinstance(base, Num):
        return _num(base.value**c)
    return Pow(base, c)


def differentiate_expr(e: Expr) -> Expr:
    """Symbolic d/dx of ``e``.

    The result stays inside the grammar: literals remain nonnegative and
    fractional powers below one are written as quotients.
    """
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, BinOp):
        u, v = e.left, e.right
        du, dv = differentiate_expr(u), differentiate_expr(v)
        if e.op == "+":
            return _add(du, dv)
        if e.op == "-":
            return _sub(du, dv)
        if e.op == "*":
            return _add(_mul(du, v), _mul(u, dv))
        # quotient rule
        if dv == ZERO:
            return _div(du, v)
        return _div(_sub(_mul(du, v), _mul(u, dv)), _pow(v, 2.0))
    if isinstance(e, Pow):
        c = e.exponent
        du = differentiate_expr(e.base)
        if c == 0.0 or du == ZERO:
            return ZERO
        if c >= 1.0:
            return _mul(_mul(_num(c), _pow(e.base, c - 1.0)), du)
        return _div(_mul(_num(c), du), _pow(e.base, 1.0 - c))
    du = differentiate_expr(e.arg)
    if du == ZERO:
        return ZERO
    if e.name == "exp":
        return _mul(e, du)
    if e.name == "sqrt":
        return _div(du, _mul(_num(2.0), e))
    return _div(du, _mul(_num(3.0), _pow(e, 2.0)))
