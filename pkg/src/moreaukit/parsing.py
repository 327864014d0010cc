"""Expression parser for user-defined functions and the definition-file loader.

Grammar (whitespace-insensitive):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unsigned-integer)?
    atom    := NUMBER | VAR | '(' expr ')'
             | 'abs' '(' expr ')' | 'sqrt' '(' expr ')'
             | 'min' '(' expr (',' expr)+ ')' | 'max' '(' expr (',' expr)+ ')'
             | 'ind' '(' const ',' const ')'

VAR is x1..xn.  ind(a, b) is the indicator of the box [a, b]^n over all
variables (0 inside, +inf outside); its bounds must be constant
subexpressions.  NaN results (e.g. sqrt of a negative) are treated as +inf,
keeping every parsed function extended-real-valued.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ArityError, InvalidArgument, ParseError
from .functions import (
    FunctionSpec,
    KnownMinimizer,
    ProxBoundCertificate,
    as_point,
)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\^|\*|/|\+|-|\(|\)|,))"
)

_FUNCS = {"abs", "sqrt", "min", "max", "ind"}


@dataclass(frozen=True)
class _Token:
    kind: str  # 'number' | 'name' | one of the operator lexemes | 'end'
    text: str
    offset: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            raise ParseError("unexpected character", len(src) - len(stripped),
                             {"number", "name", "operator"})
        if m.lastgroup == "op":
            tokens.append(_Token(m.group("op"), m.group("op"), m.start("op")))
        else:
            tokens.append(_Token(m.lastgroup, m.group(m.lastgroup),
                                 m.start(m.lastgroup)))
        pos = m.end()
    tokens.append(_Token("end", "", len(src)))
    return tokens


class _Parser:
    """Recursive-descent parser producing vectorized numpy evaluators.

    Each node is a callable taking an (m, n) array and returning shape (m,).
    """

    def __init__(self, src: str, dim: int):
        if dim < 1:
            raise InvalidArgument("dimension must be >= 1")
        self.src = src
        self.dim = dim
        self.tokens = _tokenize(src)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        if self.cur.kind != kind:
            raise ParseError(f"got {self.cur.text or 'end of input'!r}",
                             self.cur.offset, {kind})
        return self.advance()

    # -- grammar ------------------------------------------------------------

    def parse(self) -> Callable:
        node = self.expr()
        if self.cur.kind != "end":
            raise ParseError(f"trailing input {self.cur.text!r}",
                             self.cur.offset, {"end"})
        return node

    def expr(self) -> Callable:
        node = self.term()
        while self.cur.kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.term()
            if op == "+":
                node = (lambda a, b: lambda p: a(p) + b(p))(node, rhs)
            else:
                node = (lambda a, b: lambda p: a(p) - b(p))(node, rhs)
        return node

    def term(self) -> Callable:
        node = self.unary()
        while self.cur.kind in ("*", "/"):
            op = self.advance().kind
            rhs = self.unary()
            if op == "*":
                node = (lambda a, b: lambda p: a(p) * b(p))(node, rhs)
            else:
                def div(a, b):
                    def run(p):
                        with np.errstate(divide="ignore", invalid="ignore"):
                            return a(p) / b(p)
                    return run
                node = div(node, rhs)
        return node

    def unary(self) -> Callable:
        if self.cur.kind == "-":
            self.advance()
            inner = self.unary()
            return lambda p: -inner(p)
        return self.power()

    def power(self) -> Callable:
        base = self.atom()
        if self.cur.kind == "^":
            self.advance()
            tok = self.expect("number")
            if not re.fullmatch(r"\d+", tok.text):
                raise ParseError("exponent must be a nonnegative integer",
                                 tok.offset, {"integer"})
            k = int(tok.text)
            return (lambda a, n: lambda p: a(p) ** n)(base, k)
        return base

    def atom(self) -> Callable:
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            val = float(tok.text)
            return lambda p: np.full(p.shape[:-1], val)
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            self.advance()
            name = tok.text
            if name in _FUNCS:
                return self.call(name, tok)
            m = re.fullmatch(r"x(\d+)", name)
            if m is None:
                raise ParseError(f"unknown identifier {name!r}", tok.offset,
                                 {"variable", "function"})
            idx = int(m.group(1))
            if not 1 <= idx <= self.dim:
                raise ArityError(
                    f"variable x{idx} out of range for dimension {self.dim}"
                )
            return (lambda j: lambda p: p[..., j])(idx - 1)
        raise ParseError(f"got {tok.text or 'end of input'!r}", tok.offset,
                         {"number", "name", "("})

    def call(self, name: str, tok: _Token) -> Callable:
        self.expect("(")
        args = [self.expr()]
        while self.cur.kind == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if name == "abs":
            if len(args) != 1:
                raise ParseError("abs takes one argument", tok.offset, {")"})
            a = args[0]
            return lambda p: np.abs(a(p))
        if name == "sqrt":
            if len(args) != 1:
                raise ParseError("sqrt takes one argument", tok.offset, {")"})
            a = args[0]

            def run_sqrt(p):
                with np.errstate(invalid="ignore"):
                    return np.sqrt(a(p))
            return run_sqrt
        if name in ("min", "max"):
            if len(args) < 2:
                raise ParseError(f"{name} takes at least two arguments",
                                 tok.offset, {","})
            red = np.minimum if name == "min" else np.maximum
            fns = tuple(args)

            def run_red(p, _red=red, _fns=fns):
                out = _fns[0](p)
                for g in _fns[1:]:
                    out = _red(out, g(p))
                return out
            return run_red
        # ind(a, b): bounds must be constant subexpressions
        if len(args) != 2:
            raise ParseError("ind takes two arguments", tok.offset, {","})
        probe = np.zeros((1, self.dim))
        try:
            lo = float(args[0](probe)[0])
            hi = float(args[1](probe)[0])
            probe2 = np.ones((1, self.dim))
            if (float(args[0](probe2)[0]) != lo
                    or float(args[1](probe2)[0]) != hi):
                raise ValueError
        except Exception:
            raise ParseError("ind bounds must be constants", tok.offset,
                             {"constant"}) from None
        if not lo <= hi:
            raise ParseError("ind requires lower bound <= upper bound",
                             tok.offset, {"constant"})

        def run_ind(p):
            inside = np.all((p >= lo) & (p <= hi), axis=-1)
            return np.where(inside, 0.0, np.inf)
        return run_ind


def _fit_default_certificate(evaluator: Callable, dim: int,
                             box_radius: float = 10.0,
                             samples: int = 4000) -> ProxBoundCertificate:
    """Fit a sampled lower-quadratic witness anchored at the origin.

    The result is flagged unverified; callers re-validate by independent
    sampling before any envelope computation.
    """
    rng = np.random.default_rng(12345)
    pts = rng.uniform(-box_radius, box_radius, size=(samples, dim))
    vals = np.asarray(evaluator(pts), dtype=float)
    vals = np.where(np.isnan(vals), np.inf, vals)
    finite = np.isfinite(vals)
    if not np.any(finite):
        return ProxBoundCertificate(0.0, 0.0, np.zeros(dim), verified=False)
    sq = np.sum(pts[finite] ** 2, axis=1)
    lo = float(np.min(vals[finite]))
    scale = float(np.max(np.abs(vals[finite][np.isfinite(vals[finite])]),
                         initial=1.0))
    # slack proportional to the observed value range guards against points
    # slightly more extreme than the fitting sample
    beta = lo - 1.0 - 0.05 * scale
    mask = sq > 0.25
    if np.any(mask):
        alpha = float(np.min((vals[finite][mask] - beta) / sq[mask]))
        alpha = min(alpha, 0.0) * 1.05 - 0.01
    else:
        alpha = -0.01
    return ProxBoundCertificate(alpha, beta, np.zeros(dim), verified=False)


def parse_function(expr: str, dim: int,
                   certificate: Optional[ProxBoundCertificate] = None,
                   known_minimizers: tuple = (),
                   name: str = "") -> FunctionSpec:
    """Build a FunctionSpec from an expression in the grammar above.

    When no certificate is supplied, a sampled lower-quadratic fit is used
    and flagged unverified.
    """
    node = _Parser(expr, dim).parse()

    def evaluator(pts):
        with np.errstate(over="ignore", invalid="ignore"):
            return node(np.asarray(pts, dtype=float))

    cert = certificate or _fit_default_certificate(evaluator, dim)
    return FunctionSpec(
        dim=dim,
        evaluator=evaluator,
        certificate=cert,
        closed_form_prox=None,
        known_minimizers=known_minimizers,
        name=name or expr,
        expr=expr,
    )


def load_function_file(path) -> FunctionSpec:
    """Load a function from a plain-text key-value definition file.

    Recognized keys: expr, dim, alpha, beta, anchor (space-separated coords),
    and repeatable 'minimizer' lines of the form
    'coord [coord ...] kind modulus epsilon'.
    """
    entries: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidArgument(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            entries.append((key.strip(), value.strip()))

    kv = dict(entries)
    if "expr" not in kv or "dim" not in kv:
        raise InvalidArgument(f"{path}: definition file requires expr and dim")
    dim = int(kv["dim"])

    cert = None
    if "alpha" in kv and "beta" in kv:
        anchor = as_point(
            [float(t) for t in kv.get("anchor", "0").split()] or [0.0]
        )
        if anchor.size == 1 and dim > 1:
            anchor = np.full(dim, float(anchor[0]))
        cert = ProxBoundCertificate(float(kv["alpha"]), float(kv["beta"]),
                                    anchor, verified=False)

    minimizers = []
    for key, value in entries:
        if key != "minimizer":
            continue
        parts = value.split()
        if len(parts) != dim + 3:
            raise InvalidArgument(
                f"{path}: minimizer needs {dim} coords, kind, modulus, epsilon"
            )
        coords = [float(t) for t in parts[:dim]]
        kind = parts[dim]
        minimizers.append(KnownMinimizer(np.array(coords), kind,
                                         float(parts[dim + 1]),
                                         float(parts[dim + 2])))

    return parse_function(kv["expr"], dim, certificate=cert,
                          known_minimizers=tuple(minimizers),
                          name=kv.get("name", kv["expr"]))
