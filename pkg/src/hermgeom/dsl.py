"""Metric component expressions in ``z`` and ``conj(z)``.

Grammar (whitespace insensitive)::

    source  := { line }          one assignment per line or per ';'
    line    := NAME '=' expr     NAME is h<i><j> or h_<i>_<j>; '#' starts a comment
    expr    := term { ('+' | '-') term }
    term    := unary { ('*' | '/') unary }
    unary   := '-' unary | power
    power   := atom [ '^' ['-'] INT ]
    atom    := NUMBER | NUMBER 'i' | 'i' | '(' re (+|-) im 'i' ')' | zK
             | conj '(' zK ')' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := exp | log | sqrt

A parenthesised literal written without spaces, such as ``(1.5-2i)``, is a
single complex constant.  Exponents are integers so jets stay exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionError, ParseError
from .jets import Jet, MetricField, MetricJet2

FUNCTIONS = ("exp", "log", "sqrt")


@dataclass(frozen=True)
class Num:
    value: complex

    def __eq__(self, other):
        return isinstance(other, Num) and complex(self.value) == complex(other.value)

    def __hash__(self):
        return hash(("Num", complex(self.value)))


@dataclass(frozen=True)
class Var:
    index: int  # 1-based
    conj: bool = False


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"


Expr = Union[Num, Var, BinOp, Pow, Neg, Func]


# --------------------------------------------------------------------------
# lexer

_NUM = r"(?:\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>\s+)
  | (?P<cplx>\((?P<cre>[+-]?{_NUM})(?P<cim>[+-]{_NUM})[ij]\))
  | (?P<num>{_NUM})(?P<imag>[ij](?![A-Za-z0-9_]))?
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int
    value: object = None


def _tokenize(text: str, offset: int = 0, source: str | None = None) -> list[_Tok]:
    toks = []
    pos = 0
    src = source if source is not None else text
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", offset + pos, src)
        kind = m.lastgroup
        if m.group("cplx"):
            toks.append(_Tok("num", m.group(0), offset + pos,
                             complex(float(m.group("cre")), float(m.group("cim")))))
        elif m.group("num"):
            v = float(m.group("num"))
            toks.append(_Tok("num", m.group(0), offset + pos, complex(0, v) if m.group("imag") else complex(v)))
        elif m.group("name"):
            toks.append(_Tok("name", m.group(0), offset + pos))
        elif m.group("op"):
            op = "^" if m.group(0) == "**" else m.group(0)
            toks.append(_Tok("op", op, offset + pos))
        elif kind != "ws":
            raise ParseError(f"unexpected token {m.group(0)!r}", offset + pos, src)
        pos = m.end()
    toks.append(_Tok("end", "", offset + len(text.rstrip())))
    return toks


class _Parser:
    def __init__(self, text: str, n: int, offset: int = 0, source: str | None = None):
        self.source = source if source is not None else text
        self.toks = _tokenize(text, offset, self.source)
        self.i = 0
        self.n = n

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.pos, self.source)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, op) -> bool:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op):
        if not self.accept(op):
            tok = self.peek()
            self.error(f"expected {op!r}, found {tok.text or 'end of input'!r}")

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().text!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.next()
                left = BinOp(tok.text, left, self.term())
            else:
                return left

    def term(self) -> Expr:
        left = self.unary()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.next()
                left = BinOp(tok.text, left, self.unary())
            else:
                return left

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            sign = -1 if self.accept("-") else 1
            tok = self.next()
            if tok.kind != "num" or tok.value.imag != 0 or not re.fullmatch(r"\d+", tok.text):
                self.error("exponent must be an integer literal", tok)
            return Pow(base, sign * int(tok.text))
        return base

    def variable(self, tok: _Tok) -> int:
        m = re.fullmatch(r"z(\d+)", tok.text)
        if m is None:
            self.error(f"unknown variable {tok.text!r}; only z1..z{self.n} are allowed", tok)
        k = int(m.group(1))
        if not 1 <= k <= self.n:
            raise DimensionError(
                f"variable {tok.text!r} exceeds declared dimension {self.n} "
                f"(position {tok.pos})")
        return k

    def atom(self) -> Expr:
        tok = self.next()
        if tok.kind == "num":
            return Num(tok.value)
        if tok.kind == "op" and tok.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            if tok.text in ("i", "j"):
                return Num(1j)
            if tok.text == "conj":
                self.expect("(")
                vt = self.next()
                if vt.kind != "name":
                    self.error("conj() takes a single variable zK", vt)
                k = self.variable(vt)
                self.expect(")")
                return Var(k, True)
            if tok.text in FUNCTIONS:
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return Func(tok.text, e)
            return Var(self.variable(tok), False)
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def parse_expr(text: str, n: int) -> Expr:
    """Parse one scalar expression over ``z1..zn``."""
    return _Parser(text, n).parse()


# --------------------------------------------------------------------------
# rendering and structural helpers

def _fmt(x: float) -> str:
    return repr(float(x))


def render(e: Expr) -> str:
    """Fully parenthesised text that parses back to an equal tree."""
    if isinstance(e, Num):
        c = complex(e.value)
        if c.imag == 0 and c.real >= 0 and not np.signbit(c.real):
            return _fmt(c.real)
        if c.real == 0 and c.imag > 0 and not np.signbit(c.real):
            return _fmt(c.imag) + "i"
        sign = "-" if np.signbit(c.imag) else "+"
        return f"({_fmt(c.real)}{sign}{_fmt(abs(c.imag))}i)"
    if isinstance(e, Var):
        return f"conj(z{e.index})" if e.conj else f"z{e.index}"
    if isinstance(e, BinOp):
        return f"({render(e.left)} {e.op} {render(e.right)})"
    if isinstance(e, Pow):
        return f"({render(e.base)}^{e.exponent})"
    if isinstance(e, Neg):
        return f"(-{render(e.arg)})"
    if isinstance(e, Func):
        return f"{e.name}({render(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


def conjugate(e: Expr) -> Expr:
    """Tree of the complex-conjugate function (principal branches commute with conj)."""
    if isinstance(e, Num):
        return Num(complex(e.value).conjugate())
    if isinstance(e, Var):
        return Var(e.index, not e.conj)
    if isinstance(e, BinOp):
        return BinOp(e.op, conjugate(e.left), conjugate(e.right))
    if isinstance(e, Pow):
        return Pow(conjugate(e.base), e.exponent)
    if isinstance(e, Neg):
        return Neg(conjugate(e.arg))
    if isinstance(e, Func):
        return Func(e.name, conjugate(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def max_index(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Num):
        return 0
    if isinstance(e, BinOp):
        return max(max_index(e.left), max_index(e.right))
    return max_index(e.base if isinstance(e, Pow) else e.arg)


# --------------------------------------------------------------------------
# evaluation

_NUMPY_FUNCS = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt}


def evaluate(e: Expr, z) -> np.ndarray:
    """Value of ``e`` at complex points ``z`` of shape ``(..., n)``."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _evaluate(e, z)


def _evaluate(e, z):
    if isinstance(e, Num):
        return np.full(z.shape[:-1], complex(e.value))
    if isinstance(e, Var):
        v = z[..., e.index - 1]
        return np.conj(v) if e.conj else v
    if isinstance(e, BinOp):
        a, b = _evaluate(e.left, z), _evaluate(e.right, z)
        return {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide}[e.op](a, b)
    if isinstance(e, Pow):
        base = _evaluate(e.base, z)
        if e.exponent >= 0:
            return base ** e.exponent
        return 1.0 / base ** (-e.exponent)
    if isinstance(e, Neg):
        return -_evaluate(e.arg, z)
    if isinstance(e, Func):
        return _NUMPY_FUNCS[e.name](_evaluate(e.arg, z))
    raise TypeError(f"not an expression: {e!r}")


def eval_scalar_jet(e: Expr, z) -> Jet:
    """Exact second-order Wirtinger jet of ``e`` at points ``z`` of shape ``(N, n)``."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    cache: dict = {}
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        jet = _jet(e, z, n, cache)
    if jet.val.shape != z.shape[:-1]:
        jet = Jet(np.broadcast_to(jet.val, z.shape[:-1]),
                  np.broadcast_to(jet.grad, z.shape[:-1] + jet.grad.shape[-1:]),
                  np.broadcast_to(jet.hess, z.shape[:-1] + jet.hess.shape[-2:]))
    return jet


def _jet(e, z, n, cache) -> Jet:
    if isinstance(e, Num):
        return Jet.constant(complex(e.value), 2 * n)
    if isinstance(e, Var):
        key = (e.index, e.conj)
        if key not in cache:
            v = z[..., e.index - 1]
            slot = e.index - 1 + (n if e.conj else 0)
            cache[key] = Jet.variable(np.conj(v) if e.conj else v, slot, 2 * n)
        return cache[key]
    if isinstance(e, BinOp):
        a, b = _jet(e.left, z, n, cache), _jet(e.right, z, n, cache)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return a / b
    if isinstance(e, Pow):
        return _jet(e.base, z, n, cache) ** e.exponent
    if isinstance(e, Neg):
        return -_jet(e.arg, z, n, cache)
    if isinstance(e, Func):
        return getattr(_jet(e.arg, z, n, cache), e.name)()
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# metric sources

_LHS_RE = re.compile(r"\s*h(?:_(\d+)_(\d+)|(\d)(\d))\s*$")


def _statements(source: str):
    """Yield (text, offset) for each assignment, stripping comments."""
    pos = 0
    for line in source.splitlines(keepends=True):
        body = line.split("#", 1)[0]
        start = 0
        for part in body.split(";"):
            if part.strip():
                yield part, pos + start
            start += len(part) + 1
        pos += len(line)


def parse_metric(source: str, n: int, check_points: int = 8, seed: int = 0) -> list[list[Expr]]:
    """Parse a metric declaration into an ``n x n`` matrix of expressions.

    Upper-triangle entries suffice; missing lower entries are filled with the
    conjugate tree and missing off-diagonal pairs are zero.  A lower entry
    declared explicitly must agree with the conjugate of its partner, checked
    structurally and then numerically at ``check_points`` random points.
    """
    if n < 1:
        raise DimensionError("dimension must be positive")
    decl: dict = {}
    for text, offset in _statements(source):
        if "=" not in text:
            raise ParseError("expected an assignment 'hIJ = expr'", offset, source)
        lhs, rhs = text.split("=", 1)
        m = _LHS_RE.fullmatch(lhs)
        if m is None:
            raise ParseError(f"bad component name {lhs.strip()!r}", offset, source)
        i, j = (int(g) for g in (m.group(1, 2) if m.group(1) else m.group(3, 4)))
        if not (1 <= i <= n and 1 <= j <= n):
            raise DimensionError(f"component h{i}{j} exceeds declared dimension {n}")
        if (i, j) in decl:
            raise ParseError(f"component h{i}{j} declared twice", offset, source)
        rhs_off = offset + len(lhs) + 1
        decl[(i, j)] = _Parser(rhs, n, rhs_off, source).parse()

    rng = np.random.default_rng(seed)
    probe = rng.normal(size=(check_points, n)) + 1j * rng.normal(size=(check_points, n))
    mat: list[list[Expr]] = [[Num(0)] * n for _ in range(n)]
    for i in range(1, n + 1):
        if (i, i) not in decl:
            raise DimensionError(f"diagonal component h{i}{i} is missing")
        for j in range(i, n + 1):
            upper, lower = decl.get((i, j)), decl.get((j, i))
            if upper is None and lower is None:
                continue
            if upper is None:
                upper = conjugate(lower)
            if lower is not None and i != j and lower != conjugate(upper):
                if not _numerically_equal(lower, conjugate(upper), probe):
                    raise ParseError(f"h{j}{i} is not the conjugate of h{i}{j}: "
                                     "metric declaration is not Hermitian")
            if i == j and upper != conjugate(upper) and not _numerically_equal(upper, conjugate(upper), probe):
                raise ParseError(f"diagonal component h{i}{i} is not real-valued")
            mat[i - 1][j - 1] = upper
            mat[j - 1][i - 1] = upper if i == j else conjugate(upper)
    return mat


def _numerically_equal(a: Expr, b: Expr, probe) -> bool:
    va, vb = evaluate(a, probe), evaluate(b, probe)
    finite = np.isfinite(va) & np.isfinite(vb)
    if not np.any(finite):
        return False
    va, vb = va[finite], vb[finite]
    return bool(np.all(np.abs(va - vb) <= 1e-10 * np.maximum(1.0, np.abs(va))))


def render_metric(mat) -> str:
    """Source text declaring the upper triangle of an expression matrix."""
    n = len(mat)
    lines = []
    for i in range(n):
        for j in range(i, n):
            if i == j or mat[i][j] != Num(0):
                lines.append(f"h_{i + 1}_{j + 1} = {render(mat[i][j])}")
    return "\n".join(lines) + "\n"


def _upper_pairs(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def metric_field_from_exprs(mat, name: str = "dsl", valid=None, params=None) -> MetricField:
    """Wrap an expression matrix as a :class:`MetricField` with exact jets."""
    n = len(mat)

    def jet_fn(points):
        points = np.asarray(points, dtype=complex)
        N = points.shape[0]
        val = np.empty((N, n, n), complex)
        grad = np.empty((N, n, n, 2 * n), complex)
        hess = np.empty((N, n, n, 2 * n, 2 * n), complex)
        for i, j in _upper_pairs(n):
            jt = eval_scalar_jet(mat[i][j], points)
            val[:, i, j], grad[:, i, j], hess[:, i, j] = jt.val, jt.grad, jt.hess
            if i != j:
                cj = jt.conj_swap()
                val[:, j, i], grad[:, j, i], hess[:, j, i] = cj.val, cj.grad, cj.hess
        return MetricJet2.from_jet(Jet(val, grad, hess))

    def matrix_fn(points):
        points = np.asarray(points, dtype=complex)
        out = np.empty(points.shape[:-1] + (n, n), complex)
        for i, j in _upper_pairs(n):
            v = evaluate(mat[i][j], points)
            out[..., i, j] = v
            if i != j:
                out[..., j, i] = np.conj(v)
        return out

    return MetricField(n=n, name=name, jet_fn=jet_fn, matrix_fn=matrix_fn, valid=valid,
                       params=dict(params or {}))


def load_metric(source: str, n: int, name: str = "dsl", valid=None) -> MetricField:
    """Parse DSL text and return the corresponding :class:`MetricField`."""
    return metric_field_from_exprs(parse_metric(source, n), name=name, valid=valid,
                                   params={"source": source})
