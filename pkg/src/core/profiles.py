"""
Profile expression language: parsing, printing, evaluation, symbolic
differentiation and power-law normal forms for the scalar profiles
phi, f, l, h and g.

Grammar (whitespace ignored, '−' accepted for '-')::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := base ('^' signed-number)?
    base  := number | 't' | '(' expr ')' | ('exp' | 'log' | 'sqrt') '(' expr ')'
"""

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import (
    ExpressionError,
    MissingConstantError,
    ProfileDomainError,
    ProfileOverflowError,
)
from .heisenberg import Geometry

FUNCTIONS = ("exp", "log", "sqrt")


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]

ZERO = Num(0.0)
ONE = Num(1.0)
T = Var()


# ------------------------------------------------------------------------ parser

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]+)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> List[_Token]:
    text = source.replace("−", "-")
    tokens: List[_Token] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if not match or match.end() == pos:
            raise ExpressionError(
                f"unexpected character {text[pos]!r}", _byte_offset(source, pos)
            )
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(_Token(kind, match.group(kind), _byte_offset(source, start)))
        pos = match.end()
    tokens.append(_Token("end", "", len(source.encode("utf-8"))))
    return tokens


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class _Parser:
    """Recursive-descent parser over the token stream."""

    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _expect(self, text: str) -> _Token:
        token = self.current
        if token.text != text:
            found = token.text or "end of input"
            raise ExpressionError(f"expected {text!r}, found {found!r}", token.offset)
        return self._advance()

    def parse(self) -> Expr:
        if self.current.kind == "end":
            raise ExpressionError("empty expression", self.current.offset)
        node = self._expr()
        if self.current.kind != "end":
            raise ExpressionError(
                f"unexpected token {self.current.text!r}", self.current.offset
            )
        return node

    def _expr(self) -> Expr:
        node = self._term()
        while self.current.text in ("+", "-"):
            op = self._advance().text
            node = BinOp(op, node, self._term())
        return node

    def _term(self) -> Expr:
        node = self._unary()
        while self.current.text in ("*", "/"):
            op = self._advance().text
            node = BinOp(op, node, self._unary())
        return node

    def _unary(self) -> Expr:
        if self.current.text == "-":
            self._advance()
            operand = self._unary()
            if isinstance(operand, Num):
                return Num(-operand.value)
            return Neg(operand)
        return self._power()

    def _power(self) -> Expr:
        base = self._base()
        if self.current.text == "^":
            self._advance()
            return Pow(base, self._signed_number())
        return base

    def _signed_number(self) -> float:
        sign = 1.0
        if self.current.text in ("+", "-"):
            sign = -1.0 if self._advance().text == "-" else 1.0
        token = self.current
        if token.kind != "number":
            raise ExpressionError("non-constant exponent", token.offset)
        self._advance()
        return sign * float(token.text)

    def _base(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Num(float(token.text))
        if token.kind == "name":
            self._advance()
            if token.text == "t":
                return T
            if token.text in FUNCTIONS:
                self._expect("(")
                arg = self._expr()
                self._expect(")")
                return Call(token.text, arg)
            raise ExpressionError(f"unknown identifier {token.text!r}", token.offset)
        if token.text == "(":
            self._advance()
            node = self._expr()
            self._expect(")")
            return node
        found = token.text or "end of input"
        raise ExpressionError(f"unexpected token {found!r}", token.offset)


def parse(source: str) -> Expr:
    """Parse a profile expression.

    Args:
        source: Expression text in the profile grammar

    Returns:
        The expression tree

    Raises:
        ExpressionError: On a syntax error (with byte offset) or a
            non-constant exponent
    """
    return _Parser(source).parse()


# ----------------------------------------------------------------------- printer

_PREC_SUM, _PREC_PRODUCT, _PREC_UNARY, _PREC_POWER, _PREC_ATOM = 1, 2, 3, 4, 5


def format_number(value: float) -> str:
    """Shortest text that parses back to ``value``."""
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _precedence(e: Expr) -> int:
    if isinstance(e, Num):
        return _PREC_UNARY if e.value < 0 else _PREC_ATOM
    if isinstance(e, (Var, Call)):
        return _PREC_ATOM
    if isinstance(e, Neg):
        return _PREC_UNARY
    if isinstance(e, Pow):
        return _PREC_POWER
    return _PREC_SUM if e.op in ("+", "-") else _PREC_PRODUCT


def _wrap(e: Expr, minimum: int) -> str:
    text = to_source(e)
    return f"({text})" if _precedence(e) < minimum else text


def to_source(e: Expr) -> str:
    """Print an expression so that ``parse(to_source(e)) == e``."""
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Call):
        return f"{e.name}({to_source(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _PREC_UNARY)
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC_ATOM)}^{format_number(e.exponent)}"
    prec = _precedence(e)
    return f"{_wrap(e.left, prec)} {e.op} {_wrap(e.right, prec + 1)}"


# --------------------------------------------------------- smart constructors


def _is_num(e: Expr, value: Optional[float] = None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _add(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    return BinOp("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0):
        return ZERO
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b) and b.value != 0.0:
        return Num(a.value / b.value)
    return BinOp("/", a, b)


def _pow(base: Expr, exponent: float) -> Expr:
    if exponent == 0.0:
        return ONE
    if exponent == 1.0:
        return base
    if isinstance(base, Num) and (base.value > 0 or float(exponent).is_integer()):
        try:
            return Num(base.value**exponent)
        except (OverflowError, ZeroDivisionError):
            pass
    return Pow(base, exponent)


def _call(name: str, arg: Expr) -> Expr:
    if isinstance(arg, Num):
        value = arg.value
        if name == "exp" and value < 700:
            return Num(math.exp(value))
        if name == "log" and value > 0:
            return Num(math.log(value))
        if name == "sqrt" and value >= 0:
            return Num(math.sqrt(value))
    return Call(name, arg)


# --------------------------------------------------------------- differentiate


def differentiate(e: Expr) -> Expr:
    """Symbolic d/dt with constant folding and zero/one elimination."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Neg):
        return _neg(differentiate(e.operand))
    if isinstance(e, Pow):
        inner = differentiate(e.base)
        outer = _mul(Num(e.exponent), _pow(e.base, e.exponent - 1.0))
        return _mul(outer, inner)
    if isinstance(e, Call):
        inner = differentiate(e.arg)
        if e.name == "exp":
            return _mul(e, inner)
        if e.name == "log":
            return _div(inner, e.arg)
        return _div(inner, _mul(Num(2.0), e))
    da, db = differentiate(e.left), differentiate(e.right)
    if e.op == "+":
        return _add(da, db)
    if e.op == "-":
        return _sub(da, db)
    if e.op == "*":
        return _add(_mul(da, e.right), _mul(e.left, db))
    numerator = _sub(_mul(da, e.right), _mul(e.left, db))
    return _div(numerator, _pow(e.right, 2.0))


# ------------------------------------------------------------------ evaluation


def compile_expr(e: Expr) -> Callable[[np.ndarray], np.ndarray]:
    """Turn an expression into a numpy closure (elementwise on arrays)."""
    if isinstance(e, Num):
        value = e.value
        return lambda t: value
    if isinstance(e, Var):
        return lambda t: t
    if isinstance(e, Neg):
        inner = compile_expr(e.operand)
        return lambda t: -inner(t)
    if isinstance(e, Pow):
        base, exponent = compile_expr(e.base), e.exponent
        return lambda t: np.power(base(t), exponent)
    if isinstance(e, Call):
        arg = compile_expr(e.arg)
        func = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt}[e.name]
        return lambda t: func(arg(t))
    left, right = compile_expr(e.left), compile_expr(e.right)
    if e.op == "+":
        return lambda t: np.add(left(t), right(t))
    if e.op == "-":
        return lambda t: np.subtract(left(t), right(t))
    if e.op == "*":
        return lambda t: np.multiply(left(t), right(t))
    return lambda t: np.divide(left(t), right(t))


def _run_guarded(fn: Callable, t: Any, label: str) -> Union[float, np.ndarray]:
    arr = np.asarray(t, dtype=float)
    with np.errstate(over="raise", divide="raise", invalid="raise", under="ignore"):
        try:
            out = np.asarray(fn(arr), dtype=float)
        except FloatingPointError as exc:
            if "overflow" in str(exc):
                raise ProfileOverflowError(f"{label} overflowed: {exc}") from exc
            raise ProfileDomainError(f"{label} outside its domain: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise ProfileOverflowError(f"{label} produced a non-finite value")
    if out.shape != arr.shape:
        out = np.broadcast_to(out, arr.shape).copy()
    return float(out) if out.ndim == 0 else out


def evaluate(e: Expr, t: Any) -> Union[float, np.ndarray]:
    """Evaluate an expression at a scalar or array of t values."""
    return _run_guarded(compile_expr(e), t, to_source(e))


# -------------------------------------------------------- power-law normal form


class End(Enum):
    """Which end of (0, inf) an asymptotic statement refers to."""

    AT_INFINITY = "infinity"
    AT_ZERO = "zero"


@dataclass(frozen=True)
class PowerLaw:
    """c * t**a."""

    c: float
    a: float

    def __call__(self, t: Any) -> Any:
        return self.c * np.power(t, self.a)

    def to_dict(self) -> Dict[str, float]:
        return {"c": self.c, "a": self.a}


_Terms = Dict[float, float]
_MAX_EXPANSION = 12


def _key(a: float) -> float:
    return round(a, 12)


def _clean(terms: _Terms) -> _Terms:
    if not terms:
        return {}
    scale = max(abs(c) for c in terms.values())
    return {a: c for a, c in terms.items() if abs(c) > 1e-12 * scale}


def _terms_mul(x: _Terms, y: _Terms) -> _Terms:
    out: _Terms = {}
    for a1, c1 in x.items():
        for a2, c2 in y.items():
            k = _key(a1 + a2)
            out[k] = out.get(k, 0.0) + c1 * c2
    return _clean(out)


def _terms_pow(x: _Terms, n: float) -> Optional[_Terms]:
    if len(x) == 1:
        (a, c), = x.items()
        if c > 0 or float(n).is_integer():
            return {_key(a * n): c**n}
        return None
    if not x:
        return {} if n > 0 else None
    if float(n).is_integer() and 0 <= n <= _MAX_EXPANSION:
        out: _Terms = {0.0: 1.0}
        for _ in range(int(n)):
            out = _terms_mul(out, x)
        return out
    return None


def power_terms(e: Expr) -> Optional[_Terms]:
    """Normalize to a finite sum {exponent: coefficient} or return None."""
    if isinstance(e, Num):
        return _clean({0.0: e.value})
    if isinstance(e, Var):
        return {1.0: 1.0}
    if isinstance(e, Neg):
        inner = power_terms(e.operand)
        return None if inner is None else {a: -c for a, c in inner.items()}
    if isinstance(e, Pow):
        inner = power_terms(e.base)
        return None if inner is None else _terms_pow(inner, e.exponent)
    if isinstance(e, Call):
        inner = power_terms(e.arg)
        if inner is None or set(inner) - {0.0}:
            return None
        value = inner.get(0.0, 0.0)
        folded = _call(e.name, Num(value))
        return _clean({0.0: folded.value}) if isinstance(folded, Num) else None
    left, right = power_terms(e.left), power_terms(e.right)
    if left is None or right is None:
        return None
    if e.op in ("+", "-"):
        sign = 1.0 if e.op == "+" else -1.0
        out = dict(left)
        for a, c in right.items():
            out[a] = out.get(a, 0.0) + sign * c
        return _clean(out)
    if e.op == "*":
        return _terms_mul(left, right)
    if len(right) != 1:
        return None
    (a2, c2), = right.items()
    return _clean({_key(a - a2): c / c2 for a, c in left.items()})


def _dominant(terms: _Terms, end: End) -> Optional[Tuple[float, float]]:
    if not terms:
        return None
    pick = max if end is End.AT_INFINITY else min
    a = pick(terms)
    return terms[a], a


def _leading(e: Expr, end: End) -> Optional[Tuple[float, float]]:
    terms = power_terms(e)
    if terms is not None:
        return _dominant(terms, end)
    if isinstance(e, Neg):
        inner = _leading(e.operand, end)
        return None if inner is None else (-inner[0], inner[1])
    if isinstance(e, Pow):
        inner = _leading(e.base, end)
        if inner is None or not (inner[0] > 0 or float(e.exponent).is_integer()):
            return None
        return inner[0] ** e.exponent, inner[1] * e.exponent
    if isinstance(e, Call):
        if e.name != "sqrt":
            return None
        inner = _leading(e.arg, end)
        if inner is None or inner[0] <= 0:
            return None
        return math.sqrt(inner[0]), inner[1] / 2.0
    if isinstance(e, (Num, Var)):
        return None
    left, right = _leading(e.left, end), _leading(e.right, end)
    if left is None or right is None:
        return None
    (c1, a1), (c2, a2) = left, right
    if e.op == "*":
        return c1 * c2, a1 + a2
    if e.op == "/":
        return c1 / c2, a1 - a2
    if e.op == "-":
        c2 = -c2
    if _key(a1) == _key(a2):
        total = c1 + c2
        if abs(total) <= 1e-12 * max(abs(c1), abs(c2)):
            return None
        return total, a1
    bigger = a1 > a2 if end is End.AT_INFINITY else a1 < a2
    return (c1, a1) if bigger else (c2, a2)


def asymptotic_power(e: Expr, end: End) -> Optional[PowerLaw]:
    """Leading monomial c*t^a (c > 0) at the requested end, when derivable."""
    lead = _leading(e, end)
    if lead is None or not lead[0] > 0:
        return None
    return PowerLaw(float(lead[0]), float(lead[1]))


# ---------------------------------------------------------------------- Profile


class Profile:
    """A scalar profile of t >= 0 with its symbolic derivatives."""

    def __init__(self, source: Union[str, Expr], name: str = "profile"):
        """Initialize profile.

        Args:
            source: Expression text or an already parsed expression
            name: Label used in messages and reports
        """
        self.expr: Expr = parse(source) if isinstance(source, str) else source
        self.source = to_source(self.expr)
        self.name = name
        self.deriv: Expr = differentiate(self.expr)
        self._second: Optional[Expr] = None
        self._fn = compile_expr(self.expr)
        self._dfn = compile_expr(self.deriv)
        self._d2fn: Optional[Callable] = None
        self.terms = power_terms(self.expr)
        self.asymptote = asymptotic_power(self.expr, End.AT_INFINITY)
        self.zero_limit = asymptotic_power(self.expr, End.AT_ZERO)

    @classmethod
    def constant(cls, value: float, name: str = "profile") -> "Profile":
        return cls(Num(float(value)), name=name)

    @property
    def second_deriv(self) -> Expr:
        if self._second is None:
            self._second = differentiate(self.deriv)
        return self._second

    def value(self, t: Any) -> Union[float, np.ndarray]:
        return _run_guarded(self._fn, t, self.name)

    def derivative(self, t: Any) -> Union[float, np.ndarray]:
        return _run_guarded(self._dfn, t, f"{self.name}'")

    def second_derivative(self, t: Any) -> Union[float, np.ndarray]:
        if self._d2fn is None:
            self._d2fn = compile_expr(self.second_deriv)
        return _run_guarded(self._d2fn, t, f"{self.name}''")

    __call__ = value

    @property
    def monomial(self) -> Optional[PowerLaw]:
        """c*t^a when the profile is exactly one positive monomial."""
        if self.terms is not None and len(self.terms) == 1:
            (a, c), = self.terms.items()
            if c > 0:
                return PowerLaw(c, a)
        return None

    @property
    def is_zero(self) -> bool:
        return self.terms == {}

    def derivative_asymptote(self, end: End) -> Optional[PowerLaw]:
        return asymptotic_power(self.deriv, end)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Profile) and other.expr == self.expr

    def __hash__(self) -> int:
        return hash(self.expr)

    def __repr__(self) -> str:
        return f"Profile({self.name}={self.source!r})"


# ------------------------------------------------------------------ ProblemSpec

_CONSTANT_NAMES = ("C", "tau", "D", "Lambda", "theta", "B", "mu", "B1", "B2", "Dtilde")


@dataclass(frozen=True)
class StructuralConstants:
    """Structural constants of the hypotheses; absent ones are None."""

    C: Optional[float] = None
    tau: Optional[float] = None
    D: Optional[float] = None
    Lambda: Optional[float] = None
    theta: Optional[float] = None
    B: Optional[float] = None
    mu: Optional[float] = None
    B1: Optional[float] = None
    B2: Optional[float] = None
    Dtilde: Optional[float] = None

    def __post_init__(self):
        """Check declared ranges."""
        checks = {
            "C": lambda v: v >= 1,
            "tau": lambda v: v >= 0,
            "D": lambda v: v > 0,
            "Lambda": lambda v: v > 0,
            "theta": lambda v: v < 2,
            "B": lambda v: v > 0,
            "mu": lambda v: 0 <= v < 1,
            "B1": lambda v: v > 0,
            "B2": lambda v: v > 0,
            "Dtilde": lambda v: v > 0,
        }
        for name, ok in checks.items():
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and ok(value)):
                raise ValueError(f"constant {name}={value} is out of range")

    def require(self, *names: str) -> Tuple[float, ...]:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise MissingConstantError(f"missing constants: {', '.join(missing)}")
        return tuple(getattr(self, n) for n in names)

    def has(self, *names: str) -> bool:
        return all(getattr(self, n) is not None for n in names)

    def to_dict(self) -> Dict[str, float]:
        return {n: getattr(self, n) for n in _CONSTANT_NAMES if getattr(self, n) is not None}

    @classmethod
    def from_dict(cls, data: Dict[str, float]) -> "StructuralConstants":
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class GradientProduct:
    """Right-hand side f(u) l(|grad u|)."""

    f: Profile
    l: Profile

    form = "product"


@dataclass(frozen=True)
class GradientDifference:
    """Right-hand side f(u) - h(u) g(|grad u|)."""

    f: Profile
    h: Profile
    g: Profile

    form = "difference"


Rhs = Union[GradientProduct, GradientDifference]

_UNIT = Profile.constant(1.0, name="l")


@dataclass(frozen=True)
class ProblemSpec:
    """Geometry, operator profile, right-hand side and constants."""

    geometry: Geometry
    phi: Profile
    rhs: Rhs
    constants: StructuralConstants = field(default_factory=StructuralConstants)

    @property
    def f(self) -> Profile:
        return self.rhs.f

    @property
    def l(self) -> Profile:
        # the difference form carries no gradient factor in its transforms
        return self.rhs.l if isinstance(self.rhs, GradientProduct) else _UNIT

    @property
    def h(self) -> Optional[Profile]:
        return self.rhs.h if isinstance(self.rhs, GradientDifference) else None

    @property
    def g(self) -> Optional[Profile]:
        return self.rhs.g if isinstance(self.rhs, GradientDifference) else None

    @property
    def is_difference(self) -> bool:
        return isinstance(self.rhs, GradientDifference)

    @property
    def p(self) -> Optional[float]:
        """Exponent p when phi = c*t^(p-1), else None."""
        mono = self.phi.monomial
        return None if mono is None else mono.a + 1.0

    def with_geometry(self, geometry: Geometry) -> "ProblemSpec":
        return ProblemSpec(geometry, self.phi, self.rhs, self.constants)

    def to_dict(self) -> Dict[str, Any]:
        rhs: Dict[str, str] = {"form": self.rhs.form, "f": self.f.source}
        if isinstance(self.rhs, GradientProduct):
            rhs["l"] = self.rhs.l.source
        else:
            rhs["h"] = self.rhs.h.source
            rhs["g"] = self.rhs.g.source
        return {
            "geometry": self.geometry.to_dict(),
            "phi": self.phi.source,
            "rhs": rhs,
            "constants": self.constants.to_dict(),
        }


def product_spec(
    phi: str, f: str, l: str = "1", m: int = 1, euclidean: bool = False, **constants
) -> ProblemSpec:
    """Convenience constructor for a gradient-product problem."""
    return ProblemSpec(
        Geometry.euclidean(m) if euclidean else Geometry.heisenberg(m),
        Profile(phi, "phi"),
        GradientProduct(Profile(f, "f"), Profile(l, "l")),
        StructuralConstants(**constants),
    )


def difference_spec(
    phi: str, f: str, h: str, g: str, m: int = 1, euclidean: bool = False, **constants
) -> ProblemSpec:
    """Convenience constructor for a gradient-difference problem."""
    return ProblemSpec(
        Geometry.euclidean(m) if euclidean else Geometry.heisenberg(m),
        Profile(phi, "phi"),
        GradientDifference(Profile(f, "f"), Profile(h, "h"), Profile(g, "g")),
        StructuralConstants(**constants),
    )
