"""Line-based text formats for systems, trees and algebras.

Every parser takes the file text plus a path used only in error messages;
errors are :class:`~elgot.errors.ParseError` with ``path:line``.  The syntax
is summarised in :data:`GRAMMAR`.
"""

from __future__ import annotations

import json
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path

from .algebra import (
    CATALOG,
    BanachAlgebra,
    ElgotAlgebra,
    FiniteAlgebra,
    JoinOfLeavesAlgebra,
    KleeneAlgebra,
    MetricAlgebra,
    UnaryAlgebra,
    parse_affine,
)
from .core import App, FlatSystem, Op, Param, Signature, Var, validate
from .errors import AlgebraError, NotInCarrier, ParseError
from .rational import RationalTree

__all__ = [
    "GRAMMAR",
    "TermsDoc",
    "SystemDoc",
    "parse_terms",
    "parse_system",
    "parse_tree",
    "parse_algebra",
    "bind_params",
    "format_system",
    "format_tree",
    "format_solution",
    "solution_json",
    "read_text",
    "dumps",
    "variant_name",
]

GRAMMAR = """\
System file (.eq), one item per line, '#' starts a comment:
  sig NAME ARITY                 declare an operation
  var X = NAME(X1, ..., Xn)      flat equation (a nullary op may omit the parentheses)
  var X = param VALUE            parameter equation
Tree file (.rt): a system file plus one line
  root X
Term file (input of flatten): like a system file, but right-hand sides are
  nested terms: NAME(T1, ..., Tn) | param VALUE | X
  (a bare name is a nullary operation if declared so, otherwise a variable)
Algebra file (.alg):
  carrier A B C ...              finite carrier (omit for metric algebras)
  sig NAME ARITY
  table NAME(A1,...,An) = B      one line per argument tuple (tables must be total)
  order A <= B                   generating pairs of a partial order
  bottom A
  join A B = C                   join table (commutative; listing one order suffices);
                                 with joins and a bottom, an operation without table
                                 lines is the join of its arguments
  unary fixpoint A               chosen fixed point of the single unary operation
  metric epsilon E tolerance T   operations on [0,1], contracting by E
  fn NAME [EXPR]                 affine operation; EXPR in x,y,z,u,v,w or a catalog name
  dagger unary|kleene|join|banach   force the solution operator
Without a dagger line the operator is: banach if 'metric' is present, else
unary if 'unary fixpoint' is present, else join if 'join' lines are present,
else kleene if an order or bottom is present, else unary (no fixed point)
for a single unary operation.
Catalog: """ + ", ".join(f"{k} = {v}" for k, v in CATALOG.items())

_TOKEN = re.compile(r"\s*(?:([(),=])|([^\s(),=#]+))")
_NAME = re.compile(r"[A-Za-z_$][A-Za-z0-9_$.']*\Z")
_BARE = re.compile(r"[^\s(),=#]+\Z")


def read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(exc.strerror or "cannot read file", str(path)) from None
    except UnicodeDecodeError:
        raise ParseError("file is not valid UTF-8", str(path)) from None


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _tokens(s: str, path: str, no: int) -> list[str]:
    out, pos = [], 0
    s = s.rstrip()
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {s[pos]!r}", path, no)
        out.append(m.group(1) or m.group(2))
        pos = m.end()
    return out


def _name(tok: str, what: str, path: str, no: int) -> str:
    if not _NAME.match(tok):
        raise ParseError(f"invalid {what} {tok!r}", path, no)
    return tok


def _declare(sig: dict, rest: str, path: str, no: int, sig_lines: dict) -> None:
    parts = rest.split()
    if len(parts) != 2:
        raise ParseError("expected 'sig NAME ARITY'", path, no)
    name = _name(parts[0], "operation name", path, no)
    try:
        arity = int(parts[1])
    except ValueError:
        arity = -1
    if arity < 0:
        raise ParseError(f"arity of {name} must be a non-negative integer", path, no)
    if name in sig and sig[name] != arity:
        raise ParseError(f"operation {name} declared with arities {sig[name]} and {arity}", path, no)
    sig[name] = arity
    sig_lines.setdefault(name, no)


# -- systems and terms ---------------------------------------------------------


@dataclass
class TermsDoc:
    sig: Signature
    terms: dict
    lines: dict
    root: str | None = None


@dataclass
class SystemDoc:
    system: FlatSystem
    lines: dict = field(default_factory=dict)
    root: str | None = None


class _TermParser:
    def __init__(self, toks, sig, path, no):
        self.toks, self.sig, self.path, self.no, self.i = toks, sig, path, no, 0

    def fail(self, msg):
        raise ParseError(msg, self.path, self.no)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of line")
        self.i += 1
        return tok

    def expect(self, tok):
        got = self.take()
        if got != tok:
            self.fail(f"expected {tok!r}, got {got!r}")

    def term(self):
        tok = self.take()
        if tok in "(),=":
            self.fail(f"unexpected {tok!r}")
        if tok == "param":
            value = self.take()
            if value in "(),=":
                self.fail("expected a parameter value after 'param'")
            return Param(value)
        _name(tok, "name", self.path, self.no)
        if self.peek() == "(":
            self.take()
            args = []
            if self.peek() != ")":
                args.append(self.term())
                while self.peek() == ",":
                    self.take()
                    args.append(self.term())
            self.expect(")")
            return self.app(tok, args)
        if self.sig.get(tok) == 0:
            return App(tok, ())
        return Var(tok)

    def app(self, op, args):
        if op not in self.sig:
            self.fail(f"unknown operation {op}")
        if self.sig[op] != len(args):
            self.fail(f"operation {op} has arity {self.sig[op]}, applied to {len(args)} arguments")
        return App(op, tuple(args))


def parse_terms(text: str, path: str = "<string>") -> TermsDoc:
    """Parse a system or term file into (possibly nested) terms."""
    sig: dict = {}
    sig_lines: dict = {}
    terms: dict = {}
    lines: dict = {}
    root = None
    pending = []
    for no, line in _lines(text):
        kw, _, rest = line.partition(" ")
        if kw == "sig":
            _declare(sig, rest, path, no, sig_lines)
        elif kw == "var":
            pending.append((no, rest))
        elif kw == "root":
            if root is not None:
                raise ParseError("more than one root line", path, no)
            root = _name(rest.strip(), "variable name", path, no)
            lines.setdefault(("root",), no)
        else:
            raise ParseError(f"unknown line kind {kw!r}", path, no)
    frozen = Signature(sig)
    for no, rest in pending:
        toks = _tokens(rest, path, no)
        if len(toks) < 3 or toks[1] != "=":
            raise ParseError("expected 'var NAME = RHS'", path, no)
        x = _name(toks[0], "variable name", path, no)
        if x in frozen:
            raise ParseError(f"{x} is both a variable and an operation", path, no)
        if x in terms:
            raise ParseError(f"variable {x} defined twice (first on line {lines[x]})", path, no)
        p = _TermParser(toks[2:], frozen, path, no)
        t = p.term()
        if p.peek() is not None:
            raise ParseError(f"unexpected {p.peek()!r} after the right-hand side", path, no)
        terms[x] = t
        lines[x] = no
    if root is not None and root not in terms:
        raise ParseError(f"root {root} is not a variable", path, lines[("root",)])
    lines.pop(("root",), None)
    _check_vars(terms, lines, path)
    return TermsDoc(frozen, terms, lines, root)


def _check_vars(terms: dict, lines: dict, path: str) -> None:
    def walk(t, x):
        if isinstance(t, Var):
            if t.name not in terms:
                raise ParseError(f"unknown variable {t.name} in equation for {x}", path, lines[x])
        elif isinstance(t, App):
            for a in t.args:
                walk(a, x)

    for x, t in terms.items():
        walk(t, x)


def parse_system(text: str, path: str = "<string>") -> SystemDoc:
    """Parse a flat system file; parameters stay strings."""
    doc = parse_terms(text, path)
    eqs = []
    for x, t in doc.terms.items():
        no = doc.lines[x]
        if isinstance(t, Var):
            raise ParseError(f"equation for {x} is a bare variable", path, no)
        if isinstance(t, App):
            if not all(isinstance(a, Var) for a in t.args):
                raise ParseError(f"equation for {x} is not flat (run flatten first)", path, no)
            eqs.append((x, Op(t.op, tuple(a.name for a in t.args))))
        else:
            eqs.append((x, t))
    system = FlatSystem(doc.sig, eqs)
    for err in validate(system):
        raise ParseError(str(err), path, doc.lines.get(err.var))
    return SystemDoc(system, doc.lines, doc.root)


def parse_tree(text: str, path: str = "<string>") -> RationalTree:
    doc = parse_system(text, path)
    if doc.root is None:
        raise ParseError("tree file needs a 'root X' line", path)
    return RationalTree(doc.system, doc.root)


def bind_params(doc: SystemDoc, alg: ElgotAlgebra, path: str = "<string>") -> FlatSystem:
    """Replace the textual parameters of ``doc`` by elements of ``alg``."""
    eqs = []
    for x, r in doc.system.items():
        if isinstance(r, Param):
            try:
                r = Param(alg.parse_element(str(r.value)))
            except NotInCarrier as exc:
                raise ParseError(str(exc), path, doc.lines.get(x)) from None
        eqs.append((x, r))
    system = FlatSystem(doc.system.sig, eqs)
    for x, r in system.items():
        if isinstance(r, Op) and alg.sig.get(r.op) != len(r.args):
            raise ParseError(f"operation {r.op}/{len(r.args)} is not in the algebra", path, doc.lines.get(x))
    return system


def _check_token(value, what: str) -> str:
    s = str(value)
    if not _BARE.match(s):
        raise ValueError(f"{what} {s!r} cannot be written as a single token")
    return s


def format_system(sys: FlatSystem) -> str:
    """Serialize in declaration order; ``parse_system`` reads it back unchanged."""
    out = [f"sig {op} {n}" for op, n in sys.sig.items()]
    for x, r in sys.items():
        _check_token(x, "variable")
        if isinstance(r, Op):
            out.append(f"var {x} = {r.op}({', '.join(map(str, r.args))})")
        else:
            out.append(f"var {x} = param {_check_token(r.value, 'parameter')}")
    return "\n".join(out) + "\n"


def format_tree(t: RationalTree) -> str:
    return format_system(t.system) + f"root {t.root}\n"


# -- algebras ------------------------------------------------------------------

VARIANT_NAMES = {
    UnaryAlgebra: "unary",
    KleeneAlgebra: "kleene",
    JoinOfLeavesAlgebra: "join",
    BanachAlgebra: "banach",
}


def variant_name(alg: ElgotAlgebra) -> str:
    return VARIANT_NAMES.get(type(alg), type(alg).__name__)


@dataclass
class _AlgebraDecl:
    carrier: list | None = None
    sig: dict = field(default_factory=dict)
    sig_lines: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    order: list = field(default_factory=list)
    bottom: str | None = None
    joins: dict = field(default_factory=dict)
    fixpoint: str | None = None
    metric: tuple | None = None
    fns: dict = field(default_factory=dict)
    fn_lines: dict = field(default_factory=dict)
    dagger: str | None = None
    first: dict = field(default_factory=dict)


def _number(tok: str, what: str, path: str, no: int) -> float:
    try:
        return float(Fraction(tok))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{what} must be a number, got {tok!r}", path, no) from None


def _read_algebra_lines(text: str, path: str) -> _AlgebraDecl:
    decl = _AlgebraDecl()

    def elem(tok, no):
        if decl.carrier is None:
            raise ParseError("'carrier' must come before lines that mention elements", path, no)
        if tok not in decl.carrier:
            raise ParseError(f"{tok!r} is not a carrier element", path, no)
        return tok

    for no, line in _lines(text):
        kw, _, rest = line.partition(" ")
        rest = rest.strip()
        decl.first.setdefault(kw, no)
        if kw == "carrier":
            if decl.carrier is not None:
                raise ParseError("carrier declared twice", path, no)
            items = rest.split()
            if not items:
                raise ParseError("carrier must be non-empty", path, no)
            if len(set(items)) != len(items):
                raise ParseError("carrier elements must be distinct", path, no)
            decl.carrier = items
        elif kw == "sig":
            _declare(decl.sig, rest, path, no, decl.sig_lines)
        elif kw == "table":
            toks = _tokens(rest, path, no)
            if len(toks) < 5 or toks[1] != "(" or toks[-2] != "=" or toks[-3] != ")":
                raise ParseError("expected 'table NAME(A1,...,An) = B'", path, no)
            op = toks[0]
            if op not in decl.sig:
                raise ParseError(f"unknown operation {op}", path, no)
            inner = toks[2:-3]
            args = tuple(elem(t, no) for t in inner[::2])
            if any(t != "," for t in inner[1::2]) or (inner and inner[-1] == ","):
                raise ParseError("arguments must be separated by commas", path, no)
            if len(args) != decl.sig[op]:
                raise ParseError(f"operation {op} has arity {decl.sig[op]}, table row has {len(args)}", path, no)
            table = decl.tables.setdefault(op, {})
            if args in table:
                raise ParseError(f"{op}({','.join(args)}) given twice", path, no)
            table[args] = (elem(toks[-1], no), no)
        elif kw == "order":
            parts = rest.split()
            if len(parts) != 3 or parts[1] != "<=":
                raise ParseError("expected 'order A <= B'", path, no)
            decl.order.append((elem(parts[0], no), elem(parts[2], no)))
        elif kw == "bottom":
            decl.bottom = elem(rest, no)
        elif kw == "join":
            parts = rest.split()
            if len(parts) != 4 or parts[2] != "=":
                raise ParseError("expected 'join A B = C'", path, no)
            a, b, c = (elem(p, no) for p in (parts[0], parts[1], parts[3]))
            for key in ((a, b), (b, a)):
                if decl.joins.get(key, c) != c:
                    raise ParseError(f"join of {a} and {b} given as both {decl.joins[key]} and {c}", path, no)
                decl.joins[key] = c
        elif kw == "unary":
            parts = rest.split()
            if len(parts) != 2 or parts[0] != "fixpoint":
                raise ParseError("expected 'unary fixpoint A'", path, no)
            decl.fixpoint = elem(parts[1], no)
        elif kw == "metric":
            parts = rest.split()
            if len(parts) != 4 or parts[0] != "epsilon" or parts[2] != "tolerance":
                raise ParseError("expected 'metric epsilon E tolerance T'", path, no)
            decl.metric = (_number(parts[1], "epsilon", path, no), _number(parts[3], "tolerance", path, no))
        elif kw == "fn":
            name, _, expr = rest.partition(" ")
            name = _name(name, "function name", path, no)
            expr = expr.strip() or name
            expr = CATALOG.get(expr, expr)
            if name in decl.fns:
                raise ParseError(f"function {name} defined twice", path, no)
            try:
                decl.fns[name] = parse_affine(expr)
            except AlgebraError as exc:
                raise ParseError(str(exc), path, no) from None
            decl.fn_lines[name] = no
        elif kw == "dagger":
            if rest not in VARIANT_NAMES.values():
                raise ParseError(f"unknown dagger {rest!r}; use one of {', '.join(VARIANT_NAMES.values())}", path, no)
            decl.dagger = rest
        else:
            raise ParseError(f"unknown line kind {kw!r}", path, no)
    return decl


def _choose_variant(decl: _AlgebraDecl, path: str) -> str:
    if decl.dagger:
        return decl.dagger
    if decl.metric is not None:
        return "banach"
    if decl.fixpoint is not None:
        return "unary"
    if decl.joins:
        return "join"
    if decl.order or decl.bottom is not None:
        return "kleene"
    if len(decl.sig) == 1 and next(iter(decl.sig.values())) == 1:
        return "unary"
    raise ParseError("cannot tell which solution operator to use; add a 'dagger' line", path)


def _banach(decl: _AlgebraDecl, path: str) -> BanachAlgebra:
    if decl.metric is None:
        raise ParseError("a banach algebra needs 'metric epsilon E tolerance T'", path)
    for kw in ("carrier", "table", "order", "bottom", "join", "unary"):
        if kw in decl.first:
            raise ParseError(f"'{kw}' lines do not apply to a metric algebra", path, decl.first[kw])
    for op, n in decl.sig.items():
        if op not in decl.fns:
            raise ParseError(f"operation {op} has no 'fn' line", path, decl.sig_lines[op])
    for name, fn in decl.fns.items():
        if name in decl.sig and decl.sig[name] != fn.arity:
            raise ParseError(
                f"fn {name} uses {fn.arity} variables but is declared with arity {decl.sig[name]}",
                path,
                decl.fn_lines[name],
            )
    eps, tol = decl.metric
    try:
        return BanachAlgebra(MetricAlgebra(decl.fns, eps, tol))
    except AlgebraError as exc:
        bad = next((n for n in decl.fns if str(exc).startswith(n + " ")), None)
        raise ParseError(str(exc), path, decl.fn_lines.get(bad, decl.first.get("metric"))) from None


def _tables(decl: _AlgebraDecl, path: str, required: bool) -> dict:
    tables = {}
    for op, n in decl.sig.items():
        given = decl.tables.get(op)
        if given is None and not required:
            continue
        given = given or {}
        for args in product(decl.carrier, repeat=n):
            if args not in given:
                raise ParseError(
                    f"table for {op} is not total: missing {op}({','.join(args)})", path, decl.sig_lines[op]
                )
        tables[op] = {args: v for args, (v, _) in given.items()}
    return tables


def parse_algebra(text: str, path: str = "<string>") -> ElgotAlgebra:
    decl = _read_algebra_lines(text, path)
    variant = _choose_variant(decl, path)
    if variant == "banach":
        return _banach(decl, path)
    if decl.carrier is None:
        raise ParseError("a finite algebra needs a 'carrier' line", path)
    if "fn" in decl.first or "metric" in decl.first:
        raise ParseError("'fn' and 'metric' lines need the banach dagger", path, decl.first.get("fn", decl.first.get("metric")))
    joins = decl.joins or None
    if joins is not None:
        for a, b in product(decl.carrier, repeat=2):
            if (a, b) not in joins:
                raise ParseError(f"join table is not total: missing join {a} {b}", path, decl.first["join"])
    try:
        if variant == "join" and (joins is None or decl.bottom is None):
            raise ParseError("the join dagger needs 'join' lines and a 'bottom' line", path)
        tables = _tables(decl, path, required=joins is None or decl.bottom is None)
        if len(tables) < len(decl.sig):
            derived = JoinOfLeavesAlgebra.from_lattice(decl.sig, decl.carrier, joins, decl.bottom)
            tables = {**derived.base.tables, **tables}
        if variant == "unary":
            return UnaryAlgebra(FiniteAlgebra(decl.sig, decl.carrier, tables), decl.fixpoint)
        base = FiniteAlgebra(
            decl.sig, decl.carrier, tables, order=decl.order or None, bottom=decl.bottom, joins=joins
        )
        return JoinOfLeavesAlgebra(base) if variant == "join" else KleeneAlgebra(base)
    except AlgebraError as exc:
        raise ParseError(str(exc), path) from None


# -- solutions -----------------------------------------------------------------


def _json_value(alg: ElgotAlgebra, a):
    if isinstance(a, float):
        return a
    return alg.format_element(a)


def format_solution(sys: FlatSystem, solution: Mapping, alg: ElgotAlgebra) -> str:
    """``x = a`` lines in declaration order."""
    return "".join(f"{x} = {alg.format_element(solution[x])}\n" for x in sys.vars)


def solution_json(solution: Mapping, alg: ElgotAlgebra) -> dict:
    return {str(x): _json_value(alg, a) for x, a in solution.items()}


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
