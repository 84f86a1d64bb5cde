"""Formula syntax: AST nodes, a recursive-descent parser and a printer.

Concrete syntax::

    phi   := or_ ( 'S' or_ )*
    or_   := and_ ( '|' and_ )*
    and_  := unary ( '&' unary )*
    unary := '!' unary | 'N' unary | 'D' '[' dpred ']' '(' phi ')'
           | 'SCMP' '(' num ',' int ',' int ',' num ',' num ',' ident ',' phi ')'
           | 'tt' | atom | '(' phi ')'
    atom  := ident | ident cmp num | num cmp ident
    dpred := 'z' cmp num | num ('<' | '<=') 'z' ('<' | '<=') num
    cmp   := '<' | '<=' | '=' | '>=' | '>'

All binary operators are left-associative. A bare identifier ``p`` means
``p = 1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Mapping

from .distance import DistancePredicate

COMPARATORS = ("<", "<=", "=", ">=", ">")
_FLIP = {"<": ">", "<=": ">=", "=": "=", ">=": "<=", ">": "<"}
KEYWORDS = frozenset({"tt", "N", "S", "D", "SCMP"})


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class Formula:
    """Base class of all formula nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class TT(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    """Constraint ``attribute op value`` evaluated pointwise."""

    attribute: str
    op: str = "="
    value: float = 1.0

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.op!r}")
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ValueError("constraint threshold must be finite")


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Near(Formula):
    arg: Formula


@dataclass(frozen=True)
class Surrounded(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Dist(Formula):
    pred: DistancePredicate
    arg: Formula


@dataclass(frozen=True)
class ScmpParams:
    threshold: float
    radius: int
    nbins: int
    vmin: float
    vmax: float
    attribute: str

    def problems(self) -> list[str]:
        out = []
        if not -1.0 <= self.threshold <= 1.0:
            out.append(f"SCMP threshold {self.threshold} outside [-1, 1]")
        if self.radius < 1:
            out.append(f"SCMP radius must be a positive integer, got {self.radius}")
        if self.nbins < 1:
            out.append(f"SCMP bin count must be a positive integer, got {self.nbins}")
        if not self.vmin < self.vmax:
            out.append(f"SCMP range needs vmin < vmax, got [{self.vmin}, {self.vmax}]")
        return out


@dataclass(frozen=True)
class Scmp(Formula):
    params: ScmpParams
    arg: Formula


def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order walk over all nodes."""
    for child in children(f):
        yield from subformulas(child)
    yield f


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, Near, Dist, Scmp)):
        return (f.arg,)
    if isinstance(f, (And, Or, Surrounded)):
        return (f.left, f.right)
    return ()


# --- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|<|>|=|!|&|\||\(|\)|\[|\]|,)
""", re.VERBOSE)


@dataclass
class Token:
    kind: str  # num, ident, kw, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind == "ws":
            nl = tok.count("\n")
            if nl:
                line += nl
                line_start = pos + tok.rfind("\n") + 1
        else:
            if kind == "ident" and tok in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, tok, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text, bindings, strict):
        self.toks = tokenize(text)
        self.i = 0
        self.bindings = bindings or {}
        self.strict = strict

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return FormulaSyntaxError(msg, tok.line, tok.col)

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def at(self, text) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def expect(self, text) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def number(self) -> float:
        if self.tok.kind != "num":
            raise self.error(f"expected a number, found {self.tok.text or 'end of input'!r}")
        return float(self.advance().text)

    def integer(self) -> int:
        tok = self.tok
        value = self.number()
        if value != int(value) or not re.fullmatch(r"-?\d+", tok.text):
            raise self.error(f"expected an integer, found {tok.text!r}", tok)
        return int(value)

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise self.error(f"expected an identifier, found {self.tok.text or 'end of input'!r}")
        return self.advance().text

    def comparator(self) -> str:
        if self.tok.kind == "op" and self.tok.text in COMPARATORS:
            return self.advance().text
        raise self.error(f"expected a comparator, found {self.tok.text or 'end of input'!r}")

    def parse(self) -> Formula:
        f = self.phi()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def phi(self):
        f = self.or_()
        while self.at("S"):
            self.advance()
            f = Surrounded(f, self.or_())
        return f

    def or_(self):
        f = self.and_()
        while self.at("|"):
            self.advance()
            f = Or(f, self.and_())
        return f

    def and_(self):
        f = self.unary()
        while self.at("&"):
            self.advance()
            f = And(f, self.unary())
        return f

    def unary(self):
        tok = self.tok
        if self.at("!"):
            self.advance()
            return Not(self.unary())
        if self.at("N"):
            self.advance()
            return Near(self.unary())
        if self.at("tt"):
            self.advance()
            return TT()
        if self.at("D"):
            self.advance()
            self.expect("[")
            pred = self.dpred()
            self.expect("]")
            self.expect("(")
            arg = self.phi()
            self.expect(")")
            return Dist(pred, arg)
        if self.at("SCMP"):
            self.advance()
            self.expect("(")
            threshold = self.number()
            self.expect(",")
            radius = self.integer()
            self.expect(",")
            nbins = self.integer()
            self.expect(",")
            vmin = self.number()
            self.expect(",")
            vmax = self.number()
            self.expect(",")
            attr = self.ident()
            self.expect(",")
            arg = self.phi()
            self.expect(")")
            return Scmp(ScmpParams(threshold, radius, nbins, vmin, vmax, attr), arg)
        if self.at("("):
            self.advance()
            f = self.phi()
            self.expect(")")
            return f
        if tok.kind == "ident":
            name = self.advance().text
            if self.tok.kind == "op" and self.tok.text in COMPARATORS:
                op = self.advance().text
                return self._atom(name, op, self.number(), tok)
            if name in self.bindings:
                return self.bindings[name]
            if self.strict:
                raise self.error(f"unbound name {name!r}", tok)
            return Atom(name)
        if tok.kind == "num":
            value = self.number()
            op = self.comparator()
            return self._atom(self.ident(), _FLIP[op], value, tok)
        if tok.kind == "kw":
            raise self.error(f"unexpected operator {tok.text!r}")
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def _atom(self, name, op, value, tok):
        try:
            return Atom(name, op, value)
        except ValueError as exc:
            raise self.error(str(exc), tok) from None

    def dpred(self) -> DistancePredicate:
        start = self.tok
        try:
            if self.tok.kind == "ident" and self.tok.text == "z":
                self.advance()
                op = self.comparator()
                k = self.number()
                return {
                    "<": lambda: DistancePredicate(upper=k, upper_strict=True),
                    "<=": lambda: DistancePredicate(upper=k),
                    "=": lambda: DistancePredicate(lower=k, upper=k),
                    ">=": lambda: DistancePredicate(lower=k),
                    ">": lambda: DistancePredicate(lower=k, lower_strict=True),
                }[op]()
            lo = self.number()
            op1 = self.comparator()
            if self.tok.kind != "ident" or self.tok.text != "z":
                raise self.error("expected 'z' in distance interval")
            self.advance()
            op2 = self.comparator()
            hi = self.number()
            if op1 not in ("<", "<=") or op2 not in ("<", "<="):
                raise self.error("distance interval must read 'k1 <= z <= k2'", start)
            return DistancePredicate(lo, hi, op1 == "<", op2 == "<")
        except ValueError as exc:
            if isinstance(exc, FormulaSyntaxError):
                raise
            raise self.error(str(exc), start) from None


def parse_formula(text: str, bindings: Mapping[str, Formula] | None = None,
                  strict: bool = False) -> Formula:
    """Parse formula text.

    Bare identifiers found in ``bindings`` are replaced by the bound formula.
    With ``strict=True`` any other bare identifier is an error instead of
    the shorthand ``p = 1``.
    """
    return _Parser(text, bindings, strict).parse()


# --- printer ---------------------------------------------------------------

_PREC = {Surrounded: 1, Or: 2, And: 3}
_SYM = {Surrounded: "S", Or: "|", And: "&"}


def _num(x: float) -> str:
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _dpred_text(p: DistancePredicate) -> str:
    lo_op = "<" if p.lower_strict else "<="
    hi_op = "<" if p.upper_strict else "<="
    if p.lower is not None and p.upper is not None:
        return f"{_num(p.lower)} {lo_op} z {hi_op} {_num(p.upper)}"
    if p.upper is not None:
        return f"z {hi_op} {_num(p.upper)}"
    return f"z {'>' if p.lower_strict else '>='} {_num(p.lower)}"


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), 4)


def to_text(f: Formula) -> str:
    """Render ``f`` so that ``parse_formula(to_text(f)) == f``."""
    if isinstance(f, TT):
        return "tt"
    if isinstance(f, Atom):
        if f.attribute in KEYWORDS:
            raise ValueError(f"attribute name {f.attribute!r} collides with a keyword")
        return f"{f.attribute} {f.op} {_num(f.value)}"
    if isinstance(f, Not):
        return "!" + _wrap(f.arg, 4)
    if isinstance(f, Near):
        return "N " + _wrap(f.arg, 4)
    if isinstance(f, Dist):
        return f"D[{_dpred_text(f.pred)}]({to_text(f.arg)})"
    if isinstance(f, Scmp):
        p = f.params
        return (f"SCMP({_num(p.threshold)}, {p.radius}, {p.nbins}, {_num(p.vmin)}, "
                f"{_num(p.vmax)}, {p.attribute}, {to_text(f.arg)})")
    if type(f) in _PREC:
        prec = _PREC[type(f)]
        return f"{_wrap(f.left, prec)} {_SYM[type(f)]} {_wrap(f.right, prec + 1)}"
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, min_prec: int) -> str:
    text = to_text(f)
    return text if _prec(f) >= min_prec else f"({text})"


def validate(f: Formula, grid) -> list[str]:
    """Problems that would prevent checking ``f`` on a model or grid; empty when fine."""
    grid = getattr(grid, "grid", grid)
    errors = []
    seen = set()
    for node in subformulas(f):
        if isinstance(node, Atom):
            name = node.attribute
        elif isinstance(node, Scmp):
            name = node.params.attribute
            errors.extend(node.params.problems())
        else:
            continue
        if name not in grid.attributes and name not in seen:
            seen.add(name)
            errors.append(f"unknown attribute {name}")
    return errors
