"""Expression language for coefficients, weights, and shift lifts.

Supported grammar: decimal literals, the constant ``pi``, the variable
``t``, unary functions ``sin cos exp log abs sqrt``, prefix minus, and
binary ``+ - * / ^``.  Exponents of ``^`` must not contain ``t`` so that
symbolic differentiation stays inside the grammar.

Precedence is ``^`` > prefix minus > ``* /`` > ``+ -`` with left
associativity; the canonical serialization is fully parenthesized infix.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "Expr", "Num", "Pi", "Var", "Unary", "Binary",
    "ExprError", "ParseError", "EvalDomainError",
    "parse", "serialize", "evaluate", "as_function",
    "differentiate", "is_periodic",
    "ZeroHit", "find_zeros", "zero_points",
]

FUNCTIONS = ("sin", "cos", "exp", "log", "abs", "sqrt")


class ExprError(ValueError):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class EvalDomainError(ExprError):
    def __init__(self, message: str, node: "Expr | None" = None, t: float | None = None):
        if node is not None:
            message = f"{message} in {serialize(node)}"
        if t is not None:
            message = f"{message} at t={t!r}"
        super().__init__(message)
        self.node = node
        self.t = t


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Pi, Var, Unary, Binary]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad = pos + (len(text[pos:]) - len(stripped))
            raise ParseError(f"unexpected character {text[bad]!r}", _byte_offset(text, bad))
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def contains_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Unary):
        return contains_var(e.arg)
    if isinstance(e, Binary):
        return contains_var(e.left) or contains_var(e.right)
    return False


class _Parser:
    def __init__(self, text: str):
        if not text or not text.strip():
            raise ParseError("empty expression", 0)
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, _byte_offset(self.text, tok[2]))

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, _ = self.peek()
        if kind != "end":
            self.error(f"unexpected token {val!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.next()[1]
            e = Binary(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.next()[1]
            e = Binary(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.next()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        e = self.atom()
        while self.peek()[:2] == ("op", "^"):
            tok = self.next()
            exponent = self.pow_rhs()
            if contains_var(exponent):
                raise ParseError("exponent of ^ must not contain t", _byte_offset(self.text, tok[2]))
            e = Binary("^", e, exponent)
        return e

    def pow_rhs(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.next()
            return Unary("neg", self.pow_rhs())
        return self.atom()

    def atom(self) -> Expr:
        kind, val, pos = self.next()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val == "pi":
                return Pi()
            if val == "t":
                return Var()
            if val in FUNCTIONS:
                if self.peek()[:2] != ("op", "("):
                    self.error(f"{val} requires parenthesized argument")
                self.next()
                arg = self.expr()
                nk, nv, npos = self.next()
                if (nk, nv) == ("op", ","):
                    raise ParseError(f"{val} takes exactly one argument", _byte_offset(self.text, npos))
                if (nk, nv) != ("op", ")"):
                    raise ParseError("expected ')'", _byte_offset(self.text, npos))
                return Unary(val, arg)
            raise ParseError(f"unknown identifier {val!r}", _byte_offset(self.text, pos))
        if (kind, val) == ("op", "("):
            e = self.expr()
            nk, nv, npos = self.next()
            if (nk, nv) != ("op", ")"):
                raise ParseError("expected ')'", _byte_offset(self.text, npos))
            return e
        raise ParseError(f"unexpected token {val!r}", _byte_offset(self.text, pos))


def parse(text: str) -> Expr:
    """Parse an expression string into an AST."""
    return _Parser(text).parse()


def serialize(e: Expr) -> str:
    """Canonical fully parenthesized infix form; parse(serialize(e)) == e."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-{serialize(e.arg)})"
        return f"{e.op}({serialize(e.arg)})"
    return f"({serialize(e.left)} {e.op} {serialize(e.right)})"


def evaluate(e: Expr, t: float) -> float:
    """Evaluate at a scalar t with precise domain-error reporting."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Pi):
        return math.pi
    if isinstance(e, Var):
        return float(t)
    if isinstance(e, Unary):
        x = evaluate(e.arg, t)
        try:
            if e.op == "neg":
                return -x
            if e.op == "sin":
                return math.sin(x)
            if e.op == "cos":
                return math.cos(x)
            if e.op == "exp":
                return math.exp(x)
            if e.op == "log":
                if x <= 0.0:
                    raise EvalDomainError("log of non-positive value", e, t)
                return math.log(x)
            if e.op == "abs":
                return abs(x)
            if e.op == "sqrt":
                if x < 0.0:
                    raise EvalDomainError("sqrt of negative value", e, t)
                return math.sqrt(x)
        except OverflowError:
            raise EvalDomainError("overflow", e, t) from None
        raise ExprError(f"unknown unary operator {e.op!r}")
    if isinstance(e, Binary):
        a = evaluate(e.left, t)
        b = evaluate(e.right, t)
        try:
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if e.op == "/":
                if b == 0.0:
                    raise EvalDomainError("division by zero", e, t)
                return a / b
            if e.op == "^":
                return math.pow(a, b)
        except EvalDomainError:
            raise
        except OverflowError:
            raise EvalDomainError("overflow", e, t) from None
        except ValueError:
            raise EvalDomainError("invalid power", e, t) from None
        raise ExprError(f"unknown binary operator {e.op!r}")
    raise ExprError(f"malformed node {e!r}")


def _eval_array(e: Expr, t: np.ndarray) -> np.ndarray:
    if isinstance(e, Num):
        return np.full_like(t, e.value, dtype=float)
    if isinstance(e, Pi):
        return np.full_like(t, math.pi, dtype=float)
    if isinstance(e, Var):
        return np.asarray(t, dtype=float)
    if isinstance(e, Unary):
        x = _eval_array(e.arg, t)
        if e.op == "neg":
            return -x
        if e.op == "abs":
            return np.abs(x)
        fn = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log, "sqrt": np.sqrt}[e.op]
        return fn(x)
    a = _eval_array(e.left, t)
    b = _eval_array(e.right, t)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        return a / b
    return np.power(a, b)


def as_function(e) -> Callable:
    """Turn an Expr (or pass through a callable) into an array-capable function.

    Domain violations surface as non-finite entries; scanning code checks
    for those and re-evaluates pointwise for a precise error.
    """
    if callable(e):
        return e

    def fn(t):
        arr = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = _eval_array(e, arr)
        if np.ndim(t) == 0:
            return float(out)
        return out

    return fn


def _n(x: float) -> Expr:
    return Num(float(x))


def _add(a: Expr, b: Expr) -> Expr:
    if a == Num(0.0):
        return b
    if b == Num(0.0):
        return a
    return Binary("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if b == Num(0.0):
        return a
    if a == Num(0.0):
        return Unary("neg", b)
    return Binary("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if a == Num(0.0) or b == Num(0.0):
        return Num(0.0)
    if a == Num(1.0):
        return b
    if b == Num(1.0):
        return a
    return Binary("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if a == Num(0.0):
        return Num(0.0)
    if b == Num(1.0):
        return a
    return Binary("/", a, b)


def differentiate(e: Expr) -> Expr:
    """Symbolic derivative with respect to t.

    abs differentiates to arg*arg'/abs(arg), which is the sign rule away
    from zeros of the argument and a domain error at them.
    """
    if isinstance(e, (Num, Pi)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0)
    if isinstance(e, Unary):
        u = e.arg
        du = differentiate(u)
        if e.op == "neg":
            return Unary("neg", du) if du != Num(0.0) else Num(0.0)
        if e.op == "sin":
            return _mul(Unary("cos", u), du)
        if e.op == "cos":
            return _mul(Unary("neg", Unary("sin", u)), du)
        if e.op == "exp":
            return _mul(Unary("exp", u), du)
        if e.op == "log":
            return _div(du, u)
        if e.op == "sqrt":
            return _div(du, _mul(_n(2.0), Unary("sqrt", u)))
        if e.op == "abs":
            return _div(_mul(u, du), Unary("abs", u))
        raise ExprError(f"unknown unary operator {e.op!r}")
    if isinstance(e, Binary):
        a, b = e.left, e.right
        da, db = differentiate(a), differentiate(b)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if e.op == "/":
            return _div(_sub(_mul(da, b), _mul(a, db)), Binary("^", b, _n(2.0)))
        if e.op == "^":
            # exponent is t-free by construction
            return _mul(_mul(b, Binary("^", a, _sub(b, _n(1.0)))), da)
        raise ExprError(f"unknown binary operator {e.op!r}")
    raise ExprError(f"malformed node {e!r}")


def is_periodic(e, tol: float = 1e-9) -> bool:
    """Numeric 1-periodicity check: |f(0) - f(1)| <= tol*(1+|f(0)|)."""
    fn = as_function(e)
    f0, f1 = float(fn(0.0)), float(fn(1.0))
    return abs(f0 - f1) <= tol * (1.0 + abs(f0))


@dataclass(frozen=True)
class ZeroHit:
    """One zero of a scanned function.

    kind is "crossing" for a sign change, "tangential" for a refined
    touch/near-touch of zero (always suspect), or "interval" for a flat
    stretch inside the flat tolerance band.
    """

    location: float
    kind: str
    value: float = 0.0
    lo: float | None = None
    hi: float | None = None
    suspect: bool = False

    def certain(self, scale: float = 1.0) -> bool:
        """Whether the hit is definitely a zero (vs an ambiguous near-zero dip)."""
        return self.kind != "tangential" or abs(self.value) <= 64 * np.finfo(float).eps * scale


def zero_points(hits) -> list[float]:
    return [h.location for h in hits if h.kind != "interval"]


def _bisect(fn, a: float, b: float, fa: float, fb: float, tol: float) -> float:
    for _ in range(200):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        fm = float(fn(m))
        if fm == 0.0:
            return m
        if (fa < 0) != (fm < 0):
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _refine_min(fn, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section minimization of |fn| on [a, b]."""
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - gr * (b - a)
    x2 = a + gr * (b - a)
    f1, f2 = abs(float(fn(x1))), abs(float(fn(x2)))
    while b - a > tol:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - gr * (b - a)
            f1 = abs(float(fn(x1)))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + gr * (b - a)
            f2 = abs(float(fn(x2)))
    x = x1 if f1 < f2 else x2
    return x, abs(float(fn(x)))


def find_zeros(e, lo: float, hi: float, tol: float = 1e-12,
               cells: int = 4096, flat_tol: float = 1e-11) -> list[ZeroHit]:
    """Locate zeros of e on the half-open interval [lo, hi).

    Grid scan (``cells`` cells) plus bisection of sign changes to ``tol``;
    grid-local minima of |e| small enough to be candidate tangencies are
    refined and flagged suspect; runs of samples inside ``flat_tol`` become
    interval records.  A zero at ``hi`` is excluded (on periodic inputs it
    coincides with ``lo``).
    """
    if not lo < hi:
        raise ValueError("find_zeros requires lo < hi")
    fn = as_function(e)
    xs = np.linspace(lo, hi, cells + 1)
    fx = np.asarray(fn(xs), dtype=float)
    if not np.all(np.isfinite(fx)):
        bad = xs[~np.isfinite(fx)][0]
        if not callable(e):
            evaluate(e, float(bad))  # raises with the offending node
        raise EvalDomainError("non-finite evaluation", t=float(bad))

    scale = max(1.0, float(np.max(np.abs(fx))))
    node_atol = 1e-13 * scale
    screen = scale * (10.0 / cells) ** 2
    certain_atol = 64 * np.finfo(float).eps * scale

    flat = np.abs(fx) <= flat_tol
    hits: list[ZeroHit] = []
    in_flat = np.zeros(cells + 1, dtype=bool)

    # flat runs spanning at least two cells
    i = 0
    while i <= cells:
        if flat[i]:
            j = i
            while j + 1 <= cells and flat[j + 1]:
                j += 1
            if j - i >= 2:
                a = xs[i]
                if i > 0:
                    g = lambda x: abs(float(fn(x))) - flat_tol
                    a = _bisect(g, xs[i - 1], xs[i], g(xs[i - 1]), g(xs[i]), tol)
                b = xs[j]
                if j < cells:
                    g = lambda x: abs(float(fn(x))) - flat_tol
                    b = _bisect(g, xs[j], xs[j + 1], -flat_tol, g(xs[j + 1]), tol)
                hits.append(ZeroHit(0.5 * (a + b), "interval", 0.0, a, b))
                in_flat[i:j + 1] = True
            i = j + 1
        else:
            i += 1

    sgn = np.where(np.abs(fx) <= node_atol, 0, np.sign(fx))

    # node zeros and sign-change crossings outside flat runs
    for i in range(cells + 1):
        if in_flat[i] or sgn[i] != 0:
            continue
        left = sgn[i - 1] if i > 0 else 0
        right = sgn[i + 1] if i < cells else 0
        kind = "tangential" if (left != 0 and left == right) else "crossing"
        hits.append(ZeroHit(xs[i], kind, float(fx[i]), suspect=kind == "tangential"))
    for i in range(cells):
        if in_flat[i] or in_flat[i + 1]:
            continue
        if sgn[i] != 0 and sgn[i + 1] != 0 and sgn[i] != sgn[i + 1]:
            x = _bisect(fn, xs[i], xs[i + 1], fx[i], fx[i + 1], tol)
            hits.append(ZeroHit(x, "crossing", float(fn(x))))

    # tangential candidates: small interior local minima of |f| without sign change
    absf = np.abs(fx)
    for i in range(1, cells):
        if in_flat[i] or sgn[i] == 0 or sgn[i - 1] != sgn[i] or sgn[i] != sgn[i + 1]:
            continue
        if absf[i] <= screen and absf[i] < absf[i - 1] and absf[i] <= absf[i + 1]:
            x, v = _refine_min(fn, xs[i - 1], xs[i + 1], tol)
            if v <= screen:
                hits.append(ZeroHit(x, "tangential", v, suspect=True))

    # dedup points, drop anything at hi, keep intervals as-is
    points = sorted((h for h in hits if h.kind != "interval"), key=lambda h: h.location)
    merged: list[ZeroHit] = []
    span = hi - lo
    dedup = max(10 * tol, 1e-12 * span)
    for h in points:
        if h.location >= hi - max(tol, 1e-12 * span):
            continue
        if merged and h.location - merged[-1].location <= dedup:
            if merged[-1].kind == "tangential" and h.kind == "crossing":
                merged[-1] = h
            continue
        merged.append(h)
    intervals = [h for h in hits if h.kind == "interval"]
    out = sorted(merged + intervals, key=lambda h: h.location)
    return out
