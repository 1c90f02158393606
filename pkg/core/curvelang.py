"""
FrameCurve - Curve Language Module
Phân tích biểu thức đường cong, đạo hàm ký hiệu chính xác và tính giá trị số
(kể cả tích phân xác định lồng nhau).

Grammar (unary minus is part of ``base``, so ``-t^2`` is ``(-t)^2``)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' int)?
    base   := number | ident | func '(' expr ')'
            | 'integral' '(' ident ',' expr ')' | '(' expr ')' | '-' base

``integral(u, f)`` is the integral of f from 0 to the enclosing variable.
Its integrand may reference only ``u`` (and variables bound deeper), which
keeps differentiation total: d/dt integral(u, f(u)) = f(t).
"""

import logging
import math
import re
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import DEFAULTS, TOLERANCES
from core.ambient import ManifoldShape
from core.quadrature import CumulativeIntegral, adaptive_simpson

logger = logging.getLogger(__name__)

FUNCTIONS: Dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}

NAMED_CONSTANTS = {"pi": math.pi}

INTEGRAL_KEYWORD = "integral"


class CurveSyntaxError(ValueError):
    """Parse or scope error, with the offending position."""

    def __init__(self, message: str, position: Optional[int] = None, line: Optional[int] = None):
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"column {position + 1}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class CurveDomainError(ArithmeticError):
    """Numeric domain error while evaluating an expression."""


class DerivativeOrderError(ValueError):
    """Requested derivative order outside 1..max_jet_order."""


# ----------------------------------------------------------------------
# AST

_SPAN = dict(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Expr:
    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float
    span: Optional[Tuple[int, int]] = field(**_SPAN)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    span: Optional[Tuple[int, int]] = field(**_SPAN)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr
    span: Optional[Tuple[int, int]] = field(**_SPAN)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    span: Optional[Tuple[int, int]] = field(**_SPAN)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int
    span: Optional[Tuple[int, int]] = field(**_SPAN)


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr
    span: Optional[Tuple[int, int]] = field(**_SPAN)


@dataclass(frozen=True)
class Integral(Expr):
    var: str
    body: Expr
    span: Optional[Tuple[int, int]] = field(**_SPAN)


# ----------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass
class _Token:
    kind: str
    text: str
    start: int
    end: int


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if not match or match.end() == pos:
            raise CurveSyntaxError(f"Unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        tokens.append(_Token(kind, match.group(kind), match.start(kind), match.end()))
        pos = match.end()
    tokens.append(_Token("end", "", len(text), len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> _Token:
        token = self.current
        if token.text != text or token.kind == "number":
            found = token.text or "end of input"
            raise CurveSyntaxError(f"Expected {text!r}, found {found!r}", token.start)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != "end":
            raise CurveSyntaxError(f"Unexpected {self.current.text!r}", self.current.start)
        return node

    def expr(self) -> Expr:
        start = self.current.start
        node = self.term()
        while self.current.text in ("+", "-") and self.current.kind == "op":
            op = self.advance().text
            right = self.term()
            node = BinOp(op, node, right, span=(start, self.tokens[self.index - 1].end))
        return node

    def term(self) -> Expr:
        start = self.current.start
        node = self.factor()
        while self.current.text in ("*", "/") and self.current.kind == "op":
            op = self.advance().text
            right = self.factor()
            node = BinOp(op, node, right, span=(start, self.tokens[self.index - 1].end))
        return node

    def factor(self) -> Expr:
        start = self.current.start
        node = self.base()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise CurveSyntaxError("Exponent must be a non-negative integer literal", token.start)
            self.advance()
            node = Pow(node, int(token.text), span=(start, token.end))
        return node

    def base(self) -> Expr:
        token = self.current
        if token.kind == "op" and token.text == "-":
            self.advance()
            arg = self.base()
            return Neg(arg, span=(token.start, self.tokens[self.index - 1].end))
        if token.kind == "number":
            self.advance()
            if not math.isfinite(float(token.text)):
                raise CurveSyntaxError(f"Number {token.text!r} is out of range", token.start)
            return Const(float(token.text), span=(token.start, token.end))
        if token.kind == "ident":
            self.advance()
            name = token.text
            is_call = self.current.kind == "op" and self.current.text == "("
            if name == INTEGRAL_KEYWORD:
                self.expect("(")
                bound = self.current
                if bound.kind != "ident" or bound.text in FUNCTIONS or bound.text in NAMED_CONSTANTS:
                    raise CurveSyntaxError("integral() needs a bound variable name", bound.start)
                self.advance()
                self.expect(",")
                body = self.expr()
                close = self.expect(")")
                return Integral(bound.text, body, span=(token.start, close.end))
            if is_call:
                if name not in FUNCTIONS:
                    raise CurveSyntaxError(f"Unknown function {name!r}", token.start)
                self.expect("(")
                arg = self.expr()
                close = self.expect(")")
                return Func(name, arg, span=(token.start, close.end))
            if name in FUNCTIONS:
                raise CurveSyntaxError(f"Function {name!r} needs an argument", token.start)
            if name in NAMED_CONSTANTS:
                return Const(NAMED_CONSTANTS[name], span=(token.start, token.end))
            return Var(name, span=(token.start, token.end))
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise CurveSyntaxError(f"Unexpected {token.text or 'end of input'!r}", token.start)


def free_vars(node: Expr) -> frozenset:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, Const):
        return frozenset()
    if isinstance(node, (Neg, Func)):
        return free_vars(node.arg)
    if isinstance(node, Pow):
        return free_vars(node.base)
    if isinstance(node, BinOp):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, Integral):
        return free_vars(node.body) - {node.var}
    raise TypeError(f"Not an expression node: {node!r}")


def _check_scopes(node: Expr, allowed: frozenset) -> None:
    """Mọi biến tự do phải là biến bao ngoài gần nhất."""
    if isinstance(node, Var):
        if node.name not in allowed:
            start = node.span[0] if node.span else None
            raise CurveSyntaxError(f"Unresolved variable {node.name!r}", start)
    elif isinstance(node, Integral):
        outer = free_vars(node.body) - {node.var}
        if outer:
            start = node.span[0] if node.span else None
            raise CurveSyntaxError(
                f"Integrand of integral({node.var}, ...) references outer variable "
                f"{sorted(outer)[0]!r}", start)
        _check_scopes(node.body, frozenset([node.var]))
    elif isinstance(node, BinOp):
        _check_scopes(node.left, allowed)
        _check_scopes(node.right, allowed)
    elif isinstance(node, (Neg, Func)):
        _check_scopes(node.arg, allowed)
    elif isinstance(node, Pow):
        _check_scopes(node.base, allowed)


def parse(text: str, variable: str = "t") -> Expr:
    """
    Phân tích chuỗi biểu thức thành AST

    Args:
        text: expression source
        variable: name of the curve parameter

    Returns:
        Expr with source spans

    Raises:
        CurveSyntaxError: syntax error, unknown function, or an integrand
            referencing an outer variable
    """
    node = _Parser(text).parse()
    _check_scopes(node, frozenset([variable]))
    return node


# ----------------------------------------------------------------------
# Printer

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}
_POW_PRECEDENCE = 3
_NEG_PRECEDENCE = 4
_ATOM_PRECEDENCE = 5


def _precedence(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PRECEDENCE[node.op]
    if isinstance(node, Neg):
        return _NEG_PRECEDENCE
    if isinstance(node, Pow):
        return _POW_PRECEDENCE
    if isinstance(node, Const) and node.value < 0:
        return _NEG_PRECEDENCE
    return _ATOM_PRECEDENCE


def _wrap(node: Expr, required: int) -> str:
    text = to_text(node)
    return f"({text})" if _precedence(node) < required else text


def to_text(node: Expr) -> str:
    """In AST thành chuỗi; phân tích lại cho AST bằng nhau về cấu trúc."""
    if isinstance(node, Const):
        if not math.isfinite(node.value):
            raise ValueError(f"Cannot print non-finite constant {node.value}")
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _NEG_PRECEDENCE)
    if isinstance(node, BinOp):
        level = _PRECEDENCE[node.op]
        return f"{_wrap(node.left, level)}{node.op}{_wrap(node.right, level + 1)}"
    if isinstance(node, Pow):
        return f"{_wrap(node.base, _NEG_PRECEDENCE)}^{node.exponent}"
    if isinstance(node, Func):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, Integral):
        return f"{INTEGRAL_KEYWORD}({node.var}, {to_text(node.body)})"
    raise TypeError(f"Not an expression node: {node!r}")


# ----------------------------------------------------------------------
# Differentiation

ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(node: Expr, value: Optional[float] = None) -> bool:
    return isinstance(node, Const) and (value is None or node.value == value)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(b, Neg):
        return BinOp("-", a, b.arg)
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if isinstance(b, Neg):
        return BinOp("+", a, b.arg)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    if _is_const(b):
        a, b = b, a
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    return BinOp("/", a, b)


def power(base: Expr, exponent: int) -> Expr:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if _is_const(base) and not (base.value == 0.0 and exponent < 0):
        return Const(base.value ** exponent)
    return Pow(base, exponent)


@singledispatch
def substitute(node: Expr, name: str, replacement: Expr) -> Expr:
    raise TypeError(f"Cannot substitute into {type(node).__name__}")


@substitute.register
def _(node: Const, name, replacement):
    return node


@substitute.register
def _(node: Var, name, replacement):
    return replacement if node.name == name else node


@substitute.register
def _(node: Neg, name, replacement):
    return neg(substitute(node.arg, name, replacement))


@substitute.register
def _(node: BinOp, name, replacement):
    left = substitute(node.left, name, replacement)
    right = substitute(node.right, name, replacement)
    return _BUILDERS[node.op](left, right)


@substitute.register
def _(node: Pow, name, replacement):
    return power(substitute(node.base, name, replacement), node.exponent)


@substitute.register
def _(node: Func, name, replacement):
    return Func(node.name, substitute(node.arg, name, replacement))


@substitute.register
def _(node: Integral, name, replacement):
    if node.var == name:
        return node
    return Integral(node.var, substitute(node.body, name, replacement))


_BUILDERS = {"+": add, "-": sub, "*": mul, "/": div}


@singledispatch
def _derivative(node: Expr, var: str) -> Expr:
    raise TypeError(f"Cannot differentiate {type(node).__name__}")


@_derivative.register
def _(node: Const, var):
    return ZERO


@_derivative.register
def _(node: Var, var):
    return ONE if node.name == var else ZERO


@_derivative.register
def _(node: Neg, var):
    return neg(_derivative(node.arg, var))


@_derivative.register
def _(node: BinOp, var):
    a, b = node.left, node.right
    da, db = _derivative(a, var), _derivative(b, var)
    if node.op == "+":
        return add(da, db)
    if node.op == "-":
        return sub(da, db)
    if node.op == "*":
        return add(mul(da, b), mul(a, db))
    # quy tắc thương
    return div(sub(mul(da, b), mul(a, db)), power(b, 2))


@_derivative.register
def _(node: Pow, var):
    n = node.exponent
    if n == 0:
        return ZERO
    return mul(mul(Const(float(n)), power(node.base, n - 1)), _derivative(node.base, var))


@_derivative.register
def _(node: Func, var):
    u = node.arg
    du = _derivative(u, var)
    if _is_const(du, 0.0):
        return ZERO
    if node.name == "sin":
        outer = Func("cos", u)
    elif node.name == "cos":
        outer = neg(Func("sin", u))
    elif node.name == "tan":
        outer = div(ONE, power(Func("cos", u), 2))
    elif node.name == "exp":
        outer = node
    elif node.name == "ln":
        return div(du, u)
    elif node.name == "sqrt":
        return div(du, mul(Const(2.0), node))
    else:
        raise TypeError(f"Unknown function {node.name!r}")
    return mul(outer, du)


@_derivative.register
def _(node: Integral, var):
    # định lý cơ bản của giải tích; hàm dưới dấu tích phân không chứa var
    return substitute(node.body, node.var, Var(var))


def differentiate(e: Expr, variable: str = "t") -> Expr:
    """Đạo hàm chính xác theo biến bao ngoài."""
    return _derivative(e, variable)


# ----------------------------------------------------------------------
# Evaluation

def _location(node: Expr) -> str:
    return f"column {node.span[0] + 1}" if node.span else "derived expression"


def _finite(value: float, node: Expr) -> float:
    # inf/nan sau khi tràn số
    if not math.isfinite(value):
        raise CurveDomainError(f"Non-finite value {value} at {_location(node)}")
    return value


class Evaluator:
    """
    Biên dịch AST thành closure và tính giá trị

    One evaluator serves one sampling pass. With ``cumulative=True`` every
    integral node keeps a CumulativeIntegral, so an increasing grid is
    integrated piecewise from the previous sample.
    """

    def __init__(
        self,
        quad_tol: float = TOLERANCES["quad_tol"],
        cumulative: bool = True,
        max_depth: int = DEFAULTS["quad_max_depth"],
    ):
        if quad_tol <= 0:
            raise ValueError("quad_tol must be positive")
        self.quad_tol = quad_tol
        self.cumulative = cumulative
        self.max_depth = max_depth
        self._integrals: Dict[Integral, CumulativeIntegral] = {}
        self._compiled: Dict[Tuple[Expr, str], Callable[[float], float]] = {}

    def compile(self, expr: Expr, variable: str = "t") -> Callable[[float], float]:
        key = (expr, variable)
        if key not in self._compiled:
            body = _build(expr, variable, self)
            self._compiled[key] = lambda t, _body=body, _var=variable: _body({_var: t})
        return self._compiled[key]

    def evaluate(self, expr: Expr, t: float, variable: str = "t") -> float:
        return self.compile(expr, variable)(float(t))

    def integral(self, node: Integral, body: Callable[[dict], float]):
        integrand = lambda u, _body=body, _var=node.var: _body({_var: u})
        if not self.cumulative:
            return lambda upper: adaptive_simpson(integrand, 0.0, upper, self.quad_tol, self.max_depth)
        if node not in self._integrals:
            self._integrals[node] = CumulativeIntegral(integrand, self.quad_tol, self.max_depth)
        return self._integrals[node]


def _build(node: Expr, enclosing: str, ev: Evaluator) -> Callable[[dict], float]:
    if isinstance(node, Const):
        value = float(node.value)
        return lambda env: value
    if isinstance(node, Var):
        name = node.name
        return lambda env: env[name]
    if isinstance(node, Neg):
        arg = _build(node.arg, enclosing, ev)
        return lambda env: -arg(env)
    if isinstance(node, BinOp):
        return _build_binop(node, enclosing, ev)
    if isinstance(node, Pow):
        base = _build(node.base, enclosing, ev)
        exponent = node.exponent

        def run_pow(env):
            try:
                value = base(env) ** exponent
            except (ZeroDivisionError, OverflowError) as exc:
                raise CurveDomainError(f"Power domain error at {_location(node)}: {exc}") from exc
            return _finite(value, node)
        return run_pow
    if isinstance(node, Func):
        arg = _build(node.arg, enclosing, ev)
        fn = FUNCTIONS[node.name]

        def run_func(env):
            x = arg(env)
            try:
                return fn(x)
            except (ValueError, OverflowError) as exc:
                raise CurveDomainError(
                    f"{node.name}({x:.6g}) is undefined at {_location(node)}") from exc
        return run_func
    if isinstance(node, Integral):
        body = _build(node.body, node.var, ev)
        integrate = ev.integral(node, body)
        return lambda env: integrate(env[enclosing])
    raise TypeError(f"Not an expression node: {node!r}")


def _build_binop(node: BinOp, enclosing: str, ev: Evaluator):
    left = _build(node.left, enclosing, ev)
    right = _build(node.right, enclosing, ev)
    if node.op == "+":
        return lambda env: _finite(left(env) + right(env), node)
    if node.op == "-":
        return lambda env: _finite(left(env) - right(env), node)
    if node.op == "*":
        return lambda env: _finite(left(env) * right(env), node)

    def run_div(env):
        denominator = right(env)
        if denominator == 0.0:
            raise CurveDomainError(f"Division by zero at {_location(node)}")
        return _finite(left(env) / denominator, node)
    return run_div


def evaluate(e: Expr, t: float, quad_tol: float = TOLERANCES["quad_tol"]) -> float:
    """Giá trị số của e tại t; tích phân tính bằng Simpson thích nghi trực tiếp."""
    return Evaluator(quad_tol, cumulative=False).evaluate(e, t)


# ----------------------------------------------------------------------
# Curves

@dataclass(frozen=True)
class Jet:
    """f(t), f'(t), ..., f^(K)(t)."""

    order: int
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != self.order + 1:
            raise ValueError("Jet needs order + 1 values")
        if not all(math.isfinite(v) for v in self.values):
            raise CurveDomainError(f"Jet has non-finite entries: {self.values}")


@dataclass
class CurveDef:
    shape: ManifoldShape
    components: Tuple[Expr, ...]
    label: str = ""
    t_range: Tuple[float, float] = DEFAULTS["t_range"]
    variable: str = "t"
    _derivative_table: Dict[int, List[List[Expr]]] = field(
        default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.components = tuple(self.components)
        if len(self.components) != self.shape.dim:
            raise ValueError(
                f"Curve needs {self.shape.dim} components for m={self.shape.m}, "
                f"s={self.shape.s}; got {len(self.components)}")
        lo, hi = self.t_range
        if not hi > lo:
            raise ValueError(f"Empty parameter range {self.t_range}")

    def derivatives(self, order: int) -> List[List[Expr]]:
        """Per component: [c, c', ..., c^(order)] as expressions (cached)."""
        cached = max(self._derivative_table, default=-1)
        if cached >= order:
            return [column[: order + 1] for column in self._derivative_table[cached]]
        table = []
        for component in self.components:
            column = [component]
            for _ in range(order):
                column.append(differentiate(column[-1], self.variable))
            table.append(column)
        self._derivative_table.clear()
        self._derivative_table[order] = table
        return table


def _check_jet_order(K: int) -> None:
    if not 1 <= K <= DEFAULTS["max_jet_order"]:
        raise DerivativeOrderError(
            f"Derivative order must lie in 1..{DEFAULTS['max_jet_order']}, got {K}")


def eval_jet(
    c: CurveDef,
    t: float,
    K: int,
    quad_tol: float = TOLERANCES["quad_tol"],
    evaluator: Optional[Evaluator] = None,
) -> List[Jet]:
    """
    Jet bậc K của từng tọa độ tại t

    Derivatives are taken symbolically and then evaluated; quadrature output
    is never differentiated numerically.
    """
    _check_jet_order(K)
    evaluator = evaluator or Evaluator(quad_tol, cumulative=False)
    table = c.derivatives(K)
    return [Jet(K, tuple(evaluator.evaluate(expr, t, c.variable) for expr in column))
            for column in table]


def sample_jets(
    c: CurveDef,
    grid: Sequence[float],
    K: int,
    quad_tol: float = TOLERANCES["quad_tol"],
) -> np.ndarray:
    """
    Đạo hàm 0..K của đường cong trên cả lưới

    Returns:
        Array of shape (len(grid), K + 1, dim); one cumulative evaluator is
        shared across the pass.
    """
    _check_jet_order(K)
    evaluator = Evaluator(quad_tol, cumulative=True)
    table = c.derivatives(K)
    compiled = [[evaluator.compile(expr, c.variable) for expr in column] for column in table]
    grid = np.asarray(grid, dtype=float)
    out = np.empty((grid.shape[0], K + 1, c.shape.dim))
    for j, t in enumerate(grid):
        for i, column in enumerate(compiled):
            for k, fn in enumerate(column):
                out[j, k, i] = fn(float(t))
    logger.debug("Sampled %s on %d points (K=%d, %d cached integrals)",
                 c.label or "curve", grid.shape[0], K, len(evaluator._integrals))
    return out


# ----------------------------------------------------------------------
# Curve file format

_COMPONENT_KEY = re.compile(r"^c(\d+)$")


def parse_curve_text(text: str, source: str = "<string>") -> CurveDef:
    """
    Đọc định dạng file đường cong (key = value)

    Keys: ``m``, ``s``, ``label``, optional ``t = a:b`` and ``c1`` ..
    ``c{2m+s}`` in the coordinate order x_1..x_m, y_1..y_m, z_1..z_s.
    ``#`` starts a comment.
    """
    values: Dict[str, Tuple[str, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CurveSyntaxError(f"{source}: expected 'key = value'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise CurveSyntaxError(f"{source}: duplicate key {key!r}", line=number)
        if key not in ("m", "s", "label", "t") and not _COMPONENT_KEY.match(key):
            raise CurveSyntaxError(f"{source}: unknown key {key!r}", line=number)
        values[key] = (value, number)

    def integer(key):
        if key not in values:
            raise CurveSyntaxError(f"{source}: missing key {key!r}")
        value, number = values[key]
        try:
            return int(value)
        except ValueError:
            raise CurveSyntaxError(f"{source}: {key} must be an integer", line=number) from None

    try:
        shape = ManifoldShape(integer("m"), integer("s"))
    except ValueError as exc:
        if isinstance(exc, CurveSyntaxError):
            raise
        raise CurveSyntaxError(f"{source}: {exc}") from None

    t_range = DEFAULTS["t_range"]
    if "t" in values:
        value, number = values["t"]
        try:
            lo, hi = (parse_number(part) for part in value.split(":"))
        except ValueError:
            raise CurveSyntaxError(f"{source}: t must look like 'a:b'", line=number) from None
        t_range = (lo, hi)

    components = []
    for index in range(1, shape.dim + 1):
        key = f"c{index}"
        if key not in values:
            raise CurveSyntaxError(f"{source}: missing component {key}")
        value, number = values[key]
        try:
            components.append(parse(value))
        except CurveSyntaxError as exc:
            raise CurveSyntaxError(f"{source}: {key}: {exc}", line=number) from None
    extra = sorted(k for k in values if _COMPONENT_KEY.match(k) and int(k[1:]) > shape.dim)
    if extra:
        raise CurveSyntaxError(f"{source}: too many components ({', '.join(extra)})")

    label = values.get("label", ("", 0))[0]
    try:
        return CurveDef(shape, tuple(components), label=label, t_range=t_range)
    except ValueError as exc:
        raise CurveSyntaxError(f"{source}: {exc}") from None


def parse_number(text: str) -> float:
    """Số thực hoặc biểu thức hằng (vd. 2*pi)."""
    node = parse(text.strip(), variable="")
    return Evaluator(cumulative=False).evaluate(node, 0.0, variable="")
