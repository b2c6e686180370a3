"""Symbolic scalar fields on coordinate space.

Expression trees over variables ``x0..x3`` (or chain parameters ``u1..uk``)
built from constants, arithmetic, integer powers and sin/cos/exp.  They are
immutable, exactly differentiable, and evaluable either at a single point or
over batches of points through the tape kernel.

Simplification is best-effort constant folding and 0/1 elimination performed
by the smart constructors; equality of expressions is decided numerically at
sample points, never by syntactic comparison.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import DomainError, ExpressionError

__all__ = [
    "ScalarField",
    "Const",
    "Var",
    "const",
    "var",
    "coords",
    "sin",
    "cos",
    "exp",
    "parse",
    "DEFAULT_NAMES",
]


def _coerce(value) -> "ScalarField":
    if isinstance(value, ScalarField):
        return value
    if isinstance(value, (int, float)):
        return Const(float(value))
    raise ExpressionError(f"cannot treat {value!r} as a scalar field")


class ScalarField:
    """Base node of the expression tree."""

    __slots__ = ("args",)
    op = "?"

    def __init__(self, *args):
        self.args = args

    # -- arithmetic sugar ---------------------------------------------------
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, n):
        return pow_int(self, n)

    def __neg__(self):
        return neg(self)

    # -- queries ------------------------------------------------------------
    @property
    def is_const(self) -> bool:
        return isinstance(self, Const)

    @property
    def const_value(self) -> float:
        raise ExpressionError(f"{self!r} is not a constant")

    def nvars(self) -> int:
        """1 + highest variable index appearing in the tree (0 if none)."""
        n = 0
        stack = [self]
        while stack:
            e = stack.pop()
            if isinstance(e, Var):
                n = max(n, e.index + 1)
            stack.extend(a for a in e.args if isinstance(a, ScalarField))
        return n

    # -- core operations ----------------------------------------------------
    def diff(self, index: int) -> "ScalarField":
        """Exact partial derivative with respect to variable ``index``."""
        raise NotImplementedError

    def subs(self, replacements: Sequence["ScalarField"]) -> "ScalarField":
        """Substitute ``replacements[i]`` for variable ``i`` (composition)."""
        raise NotImplementedError

    def __call__(self, point: Sequence[float]) -> float:
        try:
            v = self._eval(point)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise DomainError(f"evaluation failed at {tuple(point)}: {exc}") from exc
        if not math.isfinite(v):
            raise DomainError(f"non-finite value at {tuple(point)}")
        return v

    def _eval(self, p) -> float:
        raise NotImplementedError

    def eval_many(self, points):
        """Evaluate over an (N, nvars) array of points; returns shape (N,)."""
        from .tape import compile_tape
        from .kernel import run_tape

        return run_tape(compile_tape([self]), points)[0]

    def __repr__(self):
        return self.to_str()

    def to_str(self, names: Sequence[str] | None = None) -> str:
        raise NotImplementedError


class Const(ScalarField):
    __slots__ = ("value",)
    op = "const"

    def __init__(self, value: float):
        super().__init__()
        self.value = float(value)

    @property
    def const_value(self) -> float:
        return self.value

    def diff(self, index):
        return ZERO

    def subs(self, replacements):
        return self

    def _eval(self, p):
        return self.value

    def to_str(self, names=None):
        return repr(self.value) if self.value != int(self.value) else str(int(self.value))


class Var(ScalarField):
    __slots__ = ("index",)
    op = "var"

    def __init__(self, index: int):
        super().__init__()
        if index < 0:
            raise ExpressionError(f"variable index must be >= 0, got {index}")
        self.index = index

    def diff(self, index):
        return ONE if index == self.index else ZERO

    def subs(self, replacements):
        if self.index >= len(replacements):
            raise ExpressionError(
                f"substitution provides {len(replacements)} fields, "
                f"expression uses variable {self.index}"
            )
        return replacements[self.index]

    def _eval(self, p):
        return float(p[self.index])

    def to_str(self, names=None):
        if names is not None and self.index < len(names):
            return names[self.index]
        return f"x{self.index}"


class _Binary(ScalarField):
    __slots__ = ()
    symbol = "?"

    def to_str(self, names=None):
        a, b = self.args
        return f"({a.to_str(names)} {self.symbol} {b.to_str(names)})"


class Add(_Binary):
    __slots__ = ()
    op, symbol = "add", "+"

    def diff(self, i):
        a, b = self.args
        return add(a.diff(i), b.diff(i))

    def subs(self, r):
        a, b = self.args
        return add(a.subs(r), b.subs(r))

    def _eval(self, p):
        return self.args[0]._eval(p) + self.args[1]._eval(p)


class Sub(_Binary):
    __slots__ = ()
    op, symbol = "sub", "-"

    def diff(self, i):
        a, b = self.args
        return sub(a.diff(i), b.diff(i))

    def subs(self, r):
        a, b = self.args
        return sub(a.subs(r), b.subs(r))

    def _eval(self, p):
        return self.args[0]._eval(p) - self.args[1]._eval(p)


class Mul(_Binary):
    __slots__ = ()
    op, symbol = "mul", "*"

    def diff(self, i):
        a, b = self.args
        return add(mul(a.diff(i), b), mul(a, b.diff(i)))

    def subs(self, r):
        a, b = self.args
        return mul(a.subs(r), b.subs(r))

    def _eval(self, p):
        return self.args[0]._eval(p) * self.args[1]._eval(p)


class Div(_Binary):
    __slots__ = ()
    op, symbol = "div", "/"

    def diff(self, i):
        a, b = self.args
        num = sub(mul(a.diff(i), b), mul(a, b.diff(i)))
        return div(num, pow_int(b, 2))

    def subs(self, r):
        a, b = self.args
        return div(a.subs(r), b.subs(r))

    def _eval(self, p):
        return self.args[0]._eval(p) / self.args[1]._eval(p)


class Pow(ScalarField):
    """Integer power of a subexpression (exponent may be negative)."""

    __slots__ = ("exponent",)
    op = "pow"

    def __init__(self, base: ScalarField, exponent: int):
        super().__init__(base)
        self.exponent = int(exponent)

    def diff(self, i):
        (base,) = self.args
        n = self.exponent
        return mul(mul(Const(n), pow_int(base, n - 1)), base.diff(i))

    def subs(self, r):
        return pow_int(self.args[0].subs(r), self.exponent)

    def _eval(self, p):
        return self.args[0]._eval(p) ** self.exponent

    def to_str(self, names=None):
        return f"{self.args[0].to_str(names)}^{self.exponent}"


class _Unary(ScalarField):
    __slots__ = ()

    def to_str(self, names=None):
        return f"{self.op}({self.args[0].to_str(names)})"


class Neg(_Unary):
    __slots__ = ()
    op = "neg"

    def diff(self, i):
        return neg(self.args[0].diff(i))

    def subs(self, r):
        return neg(self.args[0].subs(r))

    def _eval(self, p):
        return -self.args[0]._eval(p)

    def to_str(self, names=None):
        return f"(-{self.args[0].to_str(names)})"


class Sin(_Unary):
    __slots__ = ()
    op = "sin"

    def diff(self, i):
        (a,) = self.args
        return mul(cos(a), a.diff(i))

    def subs(self, r):
        return sin(self.args[0].subs(r))

    def _eval(self, p):
        return math.sin(self.args[0]._eval(p))


class Cos(_Unary):
    __slots__ = ()
    op = "cos"

    def diff(self, i):
        (a,) = self.args
        return neg(mul(sin(a), a.diff(i)))

    def subs(self, r):
        return cos(self.args[0].subs(r))

    def _eval(self, p):
        return math.cos(self.args[0]._eval(p))


class Exp(_Unary):
    __slots__ = ()
    op = "exp"

    def diff(self, i):
        (a,) = self.args
        return mul(self, a.diff(i))

    def subs(self, r):
        return exp(self.args[0].subs(r))

    def _eval(self, p):
        return math.exp(self.args[0]._eval(p))


# -- smart constructors (fold constants, drop 0/1 units) ---------------------

ZERO = Const(0.0)
ONE = Const(1.0)


def const(value: float) -> Const:
    return Const(value)


def var(index: int) -> Var:
    return Var(index)


def coords() -> tuple[Var, Var, Var, Var]:
    """The four spacetime coordinate fields (t, x, y, z)."""
    return Var(0), Var(1), Var(2), Var(3)


def _cv(e: ScalarField):
    return e.value if isinstance(e, Const) else None


def add(a: ScalarField, b: ScalarField) -> ScalarField:
    av, bv = _cv(a), _cv(b)
    if av is not None and bv is not None:
        return Const(av + bv)
    if av == 0.0:
        return b
    if bv == 0.0:
        return a
    return Add(a, b)


def sub(a: ScalarField, b: ScalarField) -> ScalarField:
    av, bv = _cv(a), _cv(b)
    if av is not None and bv is not None:
        return Const(av - bv)
    if bv == 0.0:
        return a
    if av == 0.0:
        return neg(b)
    return Sub(a, b)


def neg(a: ScalarField) -> ScalarField:
    av = _cv(a)
    if av is not None:
        return Const(-av)
    if isinstance(a, Neg):
        return a.args[0]
    return Neg(a)


def mul(a: ScalarField, b: ScalarField) -> ScalarField:
    av, bv = _cv(a), _cv(b)
    if av is not None and bv is not None:
        return Const(av * bv)
    if av == 0.0 or bv == 0.0:
        return ZERO
    if av == 1.0:
        return b
    if bv == 1.0:
        return a
    if av == -1.0:
        return neg(b)
    if bv == -1.0:
        return neg(a)
    return Mul(a, b)


def div(a: ScalarField, b: ScalarField) -> ScalarField:
    av, bv = _cv(a), _cv(b)
    if bv == 0.0:
        raise ExpressionError("division by the constant zero")
    if av is not None and bv is not None:
        return Const(av / bv)
    if av == 0.0:
        return ZERO
    if bv == 1.0:
        return a
    return Div(a, b)


def pow_int(base: ScalarField, exponent) -> ScalarField:
    if isinstance(exponent, float) and not exponent.is_integer():
        raise ExpressionError(f"only integer powers are supported, got ^{exponent}")
    n = int(exponent)
    if n == 0:
        return ONE
    if n == 1:
        return base
    bv = _cv(base)
    if bv is not None:
        if bv == 0.0 and n < 0:
            raise ExpressionError("zero raised to a negative power")
        return Const(bv**n)
    return Pow(base, n)


def sin(a) -> ScalarField:
    a = _coerce(a)
    av = _cv(a)
    return Const(math.sin(av)) if av is not None else Sin(a)


def cos(a) -> ScalarField:
    a = _coerce(a)
    av = _cv(a)
    return Const(math.cos(av)) if av is not None else Cos(a)


def exp(a) -> ScalarField:
    a = _coerce(a)
    av = _cv(a)
    return Const(math.exp(av)) if av is not None else Exp(a)


# -- parsing ------------------------------------------------------------------

DEFAULT_NAMES = {
    "t": 0, "x": 1, "y": 2, "z": 3,
    "x0": 0, "x1": 1, "x2": 2, "x3": 3,
    "u1": 0, "u2": 1, "u3": 2, "u4": 3,
}

_FUNCTIONS = {"sin": sin, "cos": cos, "exp": exp}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, msg: str):
        raise ExpressionError(f"{msg} at position {self.pos} in {self.text!r}")


def parse(text: str, names: dict[str, int] | None = None) -> ScalarField:
    """Parse an infix expression over t,x,y,z (and u1..u4) into a ScalarField.

    Grammar: ``+ - * / ^`` with usual precedence (``^`` binds tightest,
    right-associative, integer exponents), unary minus, parentheses, and the
    functions sin, cos, exp.
    """
    tk = _Tokens(text)
    result = _parse_sum(tk, names or DEFAULT_NAMES)
    if tk.peek():
        tk.error(f"unexpected {tk.peek()!r}")
    return result


def _parse_sum(tk, names):
    node = _parse_product(tk, names)
    while True:
        c = tk.peek()
        if c == "+":
            tk.pos += 1
            node = add(node, _parse_product(tk, names))
        elif c == "-":
            tk.pos += 1
            node = sub(node, _parse_product(tk, names))
        else:
            return node


def _parse_product(tk, names):
    node = _parse_unary(tk, names)
    while True:
        c = tk.peek()
        if c == "*":
            tk.pos += 1
            node = mul(node, _parse_unary(tk, names))
        elif c == "/":
            tk.pos += 1
            node = div(node, _parse_unary(tk, names))
        else:
            return node


def _parse_unary(tk, names):
    if tk.peek() == "-":
        tk.pos += 1
        return neg(_parse_unary(tk, names))
    if tk.peek() == "+":
        tk.pos += 1
        return _parse_unary(tk, names)
    return _parse_power(tk, names)


def _parse_power(tk, names):
    base = _parse_atom(tk, names)
    if tk.peek() == "^":
        tk.pos += 1
        if tk.peek() == "-":
            tk.pos += 1
            expo = _parse_exponent(tk)
            return pow_int(base, -expo)
        return pow_int(base, _parse_exponent(tk))
    return base


def _parse_exponent(tk) -> int:
    c = tk.peek()
    if c == "(":
        tk.pos += 1
        sign = 1
        if tk.peek() == "-":
            tk.pos += 1
            sign = -1
        n = sign * _parse_exponent(tk)
        if tk.peek() != ")":
            tk.error("expected ')' after exponent")
        tk.pos += 1
        return n
    start = tk.pos
    while tk.pos < len(tk.text) and tk.text[tk.pos].isdigit():
        tk.pos += 1
    if tk.pos == start:
        tk.error("expected integer exponent")
    return int(tk.text[start : tk.pos])


def _parse_atom(tk, names):
    c = tk.peek()
    if c == "(":
        tk.pos += 1
        node = _parse_sum(tk, names)
        if tk.peek() != ")":
            tk.error("expected ')'")
        tk.pos += 1
        return node
    if c.isdigit() or c == ".":
        start = tk.pos
        seen_e = False
        while tk.pos < len(tk.text):
            ch = tk.text[tk.pos]
            if ch.isdigit() or ch == ".":
                tk.pos += 1
            elif ch in "eE" and not seen_e and tk.pos + 1 < len(tk.text):
                nxt = tk.text[tk.pos + 1]
                if nxt.isdigit() or nxt in "+-":
                    seen_e = True
                    tk.pos += 2
                else:
                    break
            else:
                break
        try:
            return Const(float(tk.text[start : tk.pos]))
        except ValueError:
            tk.error(f"bad number {tk.text[start:tk.pos]!r}")
    if c.isalpha() or c == "_":
        start = tk.pos
        while tk.pos < len(tk.text) and (tk.text[tk.pos].isalnum() or tk.text[tk.pos] == "_"):
            tk.pos += 1
        name = tk.text[start : tk.pos]
        if name in _FUNCTIONS:
            if tk.peek() != "(":
                tk.error(f"expected '(' after {name}")
            tk.pos += 1
            arg = _parse_sum(tk, names)
            if tk.peek() != ")":
                tk.error("expected ')'")
            tk.pos += 1
            return _FUNCTIONS[name](arg)
        if name in names:
            return Var(names[name])
        tk.error(f"unknown name {name!r}")
    tk.error("expected a term")
