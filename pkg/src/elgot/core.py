"""Signatures, flat equation systems and the operations on them.

A flat system over a signature assigns to every recursion variable either a
flat term ``op(x1, ..., xn)`` whose arguments are variables of the same
system, or a parameter.  Parameters are arbitrary hashable values; the core
layer never looks inside them.
"""

from __future__ import annotations

from collections.abc import Callable, Hashable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Union

from .errors import (
    ArityMismatch,
    DuplicateVar,
    EquationError,
    MissingParamImage,
    SignatureMismatch,
    UnguardedVar,
    UnknownOp,
    UnknownVar,
    VarClash,
)

__all__ = [
    "Signature",
    "Op",
    "Param",
    "Var",
    "App",
    "FlatSystem",
    "validate",
    "ensure_valid",
    "rename_params",
    "pair",
    "inl",
    "inr",
    "is_equation_morphism",
    "flatten",
    "expand",
]

LEFT = "L."
RIGHT = "R."
FRESH = "$"


class Signature(Mapping):
    """Finite map from operation symbols to arities.

    Iteration follows declaration order; equality ignores it.
    """

    __slots__ = ("_ops",)

    def __init__(self, ops: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = list(ops.items()) if isinstance(ops, Mapping) else list(ops)
        table: dict[str, int] = {}
        for name, arity in items:
            if not isinstance(name, str) or not name:
                raise ValueError(f"operation symbol must be a non-empty string, got {name!r}")
            if not isinstance(arity, int) or arity < 0:
                raise ValueError(f"arity of {name} must be a non-negative integer, got {arity!r}")
            if name in table and table[name] != arity:
                raise ArityMismatch(f"operation {name} declared with arities {table[name]} and {arity}")
            table[name] = arity
        self._ops = table

    def __getitem__(self, op: str) -> int:
        return self._ops[op]

    def __iter__(self) -> Iterator[str]:
        return iter(self._ops)

    def __len__(self) -> int:
        return len(self._ops)

    def __hash__(self) -> int:
        return hash(frozenset(self._ops.items()))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Signature):
            return self._ops == other._ops
        return NotImplemented

    def __repr__(self) -> str:
        return f"Signature({self._ops!r})"

    def union(self, other: Signature) -> Signature:
        """Join two signatures, refusing symbols with conflicting arities."""
        merged = dict(self._ops)
        for name, arity in other.items():
            if merged.get(name, arity) != arity:
                raise SignatureMismatch(
                    f"operation {name} has arity {merged[name]} in one signature and {arity} in the other"
                )
            merged[name] = arity
        return Signature(merged)


@dataclass(frozen=True)
class Op:
    """Flat right-hand side ``op(args...)``; the args are variables."""

    op: str
    args: tuple = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def __repr__(self) -> str:
        return f"{self.op}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Param:
    """Right-hand side that is a parameter (a leaf label, or a carrier element)."""

    value: Hashable

    def __repr__(self) -> str:
        return f"param {self.value!r}"


Rhs = Union[Op, Param]


@dataclass(frozen=True)
class Var:
    """A variable occurrence inside a non-flat term."""

    name: str


@dataclass(frozen=True)
class App:
    """Operation applied to arbitrary sub-terms (used only as flatten input)."""

    op: str
    args: tuple = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


Term = Union[Var, App, Param]


class FlatSystem:
    """An immutable flat equation system ``x = rhs(x)`` over a signature.

    ``equations`` may be a mapping or a sequence of ``(var, rhs)`` pairs.  The
    raw sequence is kept so that :func:`validate` can report duplicates; for
    lookups the last equation of a duplicated variable wins.
    """

    __slots__ = ("sig", "equations", "_rhs", "_hash")

    def __init__(self, sig: Signature | Mapping[str, int], equations):
        if not isinstance(sig, Signature):
            sig = Signature(sig)
        pairs = equations.items() if isinstance(equations, Mapping) else equations
        eqs = tuple((x, r) for x, r in pairs)
        object.__setattr__(self, "sig", sig)
        object.__setattr__(self, "equations", eqs)
        object.__setattr__(self, "_rhs", dict(eqs))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("FlatSystem is immutable")

    @property
    def vars(self) -> tuple:
        return tuple(self._rhs)

    @property
    def rhs(self) -> Mapping:
        return MappingProxyType(self._rhs)

    def __getitem__(self, x) -> Rhs:
        return self._rhs[x]

    def __contains__(self, x) -> bool:
        return x in self._rhs

    def __len__(self) -> int:
        return len(self._rhs)

    def __iter__(self):
        return iter(self._rhs)

    def items(self):
        return self._rhs.items()

    def params(self) -> list:
        """Distinct parameter values in order of first occurrence."""
        seen: dict = {}
        for r in self._rhs.values():
            if isinstance(r, Param):
                seen.setdefault(r.value, None)
        return list(seen)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FlatSystem):
            return NotImplemented
        return self.sig == other.sig and self.equations == other.equations

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.sig, self.equations)))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{x} = {r!r}" for x, r in self.equations)
        return f"FlatSystem({{{body}}})"


def validate(sys: FlatSystem) -> list[EquationError]:
    """Return every invariant violation of ``sys``; an empty list means valid."""
    problems: list[EquationError] = []
    seen = set()
    for x, _ in sys.equations:
        if x in seen:
            problems.append(DuplicateVar(f"variable {x} is defined more than once", var=x))
        seen.add(x)
    for x, r in sys.equations:
        if isinstance(r, Param):
            continue
        if not isinstance(r, Op):
            problems.append(EquationError(f"right-hand side of {x} is not flat: {r!r}", var=x))
            continue
        if r.op not in sys.sig:
            problems.append(UnknownOp(f"unknown operation {r.op} in equation for {x}", var=x))
        elif sys.sig[r.op] != len(r.args):
            problems.append(
                ArityMismatch(
                    f"{r.op} has arity {sys.sig[r.op]} but is applied to {len(r.args)} argument(s) in equation for {x}",
                    var=x,
                )
            )
        for a in r.args:
            if a not in seen:
                problems.append(UnknownVar(f"undeclared variable {a} in equation for {x}", var=x))
    return problems


def ensure_valid(sys: FlatSystem) -> FlatSystem:
    problems = validate(sys)
    if problems:
        raise problems[0]
    return sys


def _image(h, p):
    if isinstance(h, Mapping):
        try:
            return h[p]
        except KeyError:
            raise MissingParamImage(f"no image given for parameter {p!r}") from None
    return h(p)


def rename_params(h: Mapping | Callable[[Any], Any], e: FlatSystem) -> FlatSystem:
    """Change parameter names along ``h``; op equations are left untouched."""
    eqs = []
    for x, r in e.equations:
        if isinstance(r, Param):
            r = Param(_image(h, r.value))
        eqs.append((x, r))
    return FlatSystem(e.sig, eqs)


def inl(x) -> str:
    return f"{LEFT}{x}"


def inr(y) -> str:
    return f"{RIGHT}{y}"


def _retag(r: Rhs, tag: Callable) -> Rhs:
    if isinstance(r, Op):
        return Op(r.op, tuple(tag(a) for a in r.args))
    return r


def pair(f: FlatSystem, e: FlatSystem, *, tag: bool = True) -> FlatSystem:
    """Combine ``f`` on variables Y with ``e`` whose parameters are Y-variables.

    The result lives on the disjoint union of both variable sets, tagged with
    ``L.`` (variables of ``e``) and ``R.`` (variables of ``f``).  With
    ``tag=False`` the variables keep their names and must already be disjoint.
    """
    sig = f.sig.union(e.sig)
    ys = set(f.vars)
    for p in e.params():
        if p not in ys:
            raise UnknownVar(f"parameter {p!r} of the inner system is not a variable of the outer one", var=p)
    if tag:
        left, right = inl, inr
    else:
        clash = set(e.vars) & ys
        if clash:
            raise VarClash(f"variables {sorted(map(str, clash))} occur in both systems")
        left = right = lambda v: v
    eqs = []
    for x, r in e.items():
        if isinstance(r, Op):
            eqs.append((left(x), _retag(r, left)))
        else:
            eqs.append((left(x), _retag(f[r.value], right)))
    for y, r in f.items():
        eqs.append((right(y), _retag(r, right)))
    return FlatSystem(sig, eqs)


def is_equation_morphism(h: Mapping, e: FlatSystem, f: FlatSystem) -> bool:
    """Is ``h`` a coalgebra homomorphism from ``e`` to ``f``?"""
    for x, r in e.items():
        if x not in h or h[x] not in f:
            return False
        target = f[h[x]]
        if isinstance(r, Param):
            if not isinstance(target, Param) or target.value != r.value:
                return False
        else:
            if not isinstance(target, Op) or target.op != r.op:
                return False
            if any(a not in h for a in r.args):
                return False
            if tuple(h[a] for a in r.args) != target.args:
                return False
    return True


def flatten(
    nonflat: Mapping[str, Term], sig: Signature | Mapping[str, int], *, start: int = 1
) -> tuple[FlatSystem, dict]:
    """Turn arbitrary finite terms into a flat system.

    Every proper sub-term that is not a variable gets its own auxiliary
    variable ``$k`` (no sharing of equal sub-terms).  Auxiliaries are numbered
    from ``start``, breadth first, and are listed after the original
    variables.  Returns the system and the embedding of the original
    variables (the identity on names).
    """
    if not isinstance(sig, Signature):
        sig = Signature(sig)
    taken = set(nonflat)
    counter = start

    def fresh() -> str:
        nonlocal counter
        while f"{FRESH}{counter}" in taken:
            counter += 1
        name = f"{FRESH}{counter}"
        counter += 1
        taken.add(name)
        return name

    main: list = []
    aux: list = []
    for x, term in nonflat.items():
        queue = [(x, term)]
        while queue:
            v, t = queue.pop(0)
            if isinstance(t, Param):
                rhs: Rhs = t
            elif isinstance(t, Var):
                raise UnguardedVar(f"equation for {v} is a bare variable {t.name}", var=v)
            elif isinstance(t, App):
                args = []
                for sub in t.args:
                    if isinstance(sub, Var):
                        args.append(sub.name)
                    else:
                        z = fresh()
                        args.append(z)
                        queue.append((z, sub))
                rhs = Op(t.op, tuple(args))
            else:
                raise TypeError(f"not a term: {t!r}")
            (main if v == x else aux).append((v, rhs))
    sys = ensure_valid(FlatSystem(sig, main + aux))
    return sys, {x: x for x in nonflat}


def expand(sys: FlatSystem, x, keep: Iterable = ()) -> Term:
    """Rebuild the term for ``x`` by substituting equations, stopping at
    variables in ``keep`` (which are returned as :class:`Var`).

    Only terminates on the acyclic part reachable from ``x`` outside ``keep``.
    """
    keep = set(keep)

    def go(v, top: bool) -> Term:
        if not top and v in keep:
            return Var(v)
        r = sys[v]
        if isinstance(r, Param):
            return r
        return App(r.op, tuple(go(a, False) for a in r.args))

    return go(x, True)
