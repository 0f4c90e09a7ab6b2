"""Elgot algebras: an operation interpreter plus a chosen solution for every
flat system, and the checks for the two axioms that choice must satisfy.

Built-in dagger variants:

* :class:`UnaryAlgebra` - one unary operation and a chosen fixed point.
* :class:`KleeneAlgebra` - monotone operations on a finite poset with bottom;
  least solutions by iteration from bottom.
* :class:`BanachAlgebra` - contracting operations on ``[0, 1]``; unique
  solutions by iteration to a tolerance.
* :class:`JoinOfLeavesAlgebra` - a finite join-semilattice with bottom; the
  solution of ``x`` is the join of the leaf labels of its rational tree.
* :class:`ExtendedAlgebra` - the algebra on ``HA + Y`` built from another
  algebra ``A`` and a map ``m: Y -> A``.
* :class:`FreeRationalAlgebra` - rational trees themselves.
"""

from __future__ import annotations

import ast
import math
import random
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .core import (
    FlatSystem,
    Op,
    Param,
    Signature,
    ensure_valid,
    inl,
    inr,
    is_equation_morphism,
    pair,
    rename_params,
)
from .errors import (
    AlgebraError,
    EmptyCycle,
    NoFixedPoint,
    NonConvergence,
    NotAMorphism,
    NotInCarrier,
    SignatureMismatch,
)
from .rational import RationalTree, apply_layer, bisimilar, eta, minimize, solve_in_R

__all__ = [
    "FiniteAlgebra",
    "AffineFn",
    "CATALOG",
    "parse_affine",
    "MetricAlgebra",
    "ElgotAlgebra",
    "UnaryAlgebra",
    "KleeneAlgebra",
    "BanachAlgebra",
    "JoinOfLeavesAlgebra",
    "ExtendedAlgebra",
    "FreeRationalAlgebra",
    "Layer",
    "Label",
    "Iteration",
    "dagger",
    "check_solution",
    "check_functoriality",
    "check_compositionality",
    "check_solution_preserving",
    "homomorphism_from_solution_preserving",
    "single_layer_systems",
    "canonical_system",
    "build_stream_system",
]


# -- finite carriers -----------------------------------------------------------


class FiniteAlgebra:
    """Operation tables over a finite carrier, optionally with an order and joins.

    ``order`` is any generating set of pairs ``(a, b)`` meaning ``a <= b``; its
    reflexive-transitive closure must be antisymmetric.  When only ``joins`` is
    given the order is the one induced by them.
    """

    def __init__(
        self,
        sig: Signature | Mapping[str, int],
        carrier: Sequence[Hashable],
        tables: Mapping[str, Mapping[tuple, Hashable]],
        *,
        order: Iterable[tuple] | None = None,
        bottom: Hashable | None = None,
        joins: Mapping[tuple, Hashable] | None = None,
    ):
        self.sig = sig if isinstance(sig, Signature) else Signature(sig)
        self.carrier = tuple(carrier)
        if len(set(self.carrier)) != len(self.carrier):
            raise AlgebraError("carrier elements must be distinct")
        if not self.carrier:
            raise AlgebraError("carrier must be non-empty")
        elems = set(self.carrier)
        self.tables = {}
        for op, n in self.sig.items():
            if op not in tables:
                raise AlgebraError(f"no table for operation {op}")
            table = {tuple(k): v for k, v in tables[op].items()}
            for args in product(self.carrier, repeat=n):
                if args not in table:
                    raise AlgebraError(f"table for {op} is not total: missing {op}({', '.join(map(str, args))})")
                if table[args] not in elems:
                    raise AlgebraError(f"table for {op} is not closed: {op}{args} = {table[args]!r}")
            for args in table:
                if len(args) != n or not set(args) <= elems:
                    raise AlgebraError(f"table for {op} has a stray entry {args!r}")
            self.tables[op] = table
        extra = set(tables) - set(self.sig)
        if extra:
            raise AlgebraError(f"tables for undeclared operations {sorted(extra)}")

        self.joins = None
        if joins is not None:
            self.joins = self._check_joins(joins, bottom)
        self.bottom = bottom
        self._leq = None
        if order is not None:
            self._leq = self._close_order(order)
            if self.joins is not None:
                for a, b in product(self.carrier, repeat=2):
                    if ((a, b) in self._leq) != (self.joins[a, b] == b):
                        raise AlgebraError(f"order and joins disagree on {a!r} <= {b!r}")
        elif self.joins is not None:
            self._leq = {(a, b) for a, b in product(self.carrier, repeat=2) if self.joins[a, b] == b}
        if bottom is not None:
            if bottom not in elems:
                raise AlgebraError(f"bottom {bottom!r} is not a carrier element")
            if self._leq is not None and any((bottom, a) not in self._leq for a in self.carrier):
                raise AlgebraError(f"{bottom!r} is not the least element")

    @classmethod
    def from_functions(cls, sig, carrier, fns: Mapping[str, Callable], **kw) -> FiniteAlgebra:
        sig = sig if isinstance(sig, Signature) else Signature(sig)
        tables = {op: {args: fns[op](*args) for args in product(carrier, repeat=n)} for op, n in sig.items()}
        return cls(sig, carrier, tables, **kw)

    def _close_order(self, pairs) -> set:
        leq = {(a, a) for a in self.carrier}
        for a, b in pairs:
            if a not in self.carrier or b not in self.carrier:
                raise AlgebraError(f"order mentions unknown element in {a!r} <= {b!r}")
            leq.add((a, b))
        changed = True
        while changed:
            changed = False
            for a, b in list(leq):
                for c, d in list(leq):
                    if b == c and (a, d) not in leq:
                        leq.add((a, d))
                        changed = True
        for a, b in leq:
            if a != b and (b, a) in leq:
                raise AlgebraError(f"order is not antisymmetric: {a!r} <= {b!r} <= {a!r}")
        return leq

    def _check_joins(self, joins, bottom) -> dict:
        table = {tuple(k): v for k, v in joins.items()}
        for a, b in list(table):
            table.setdefault((b, a), table[a, b])
        for a, b in product(self.carrier, repeat=2):
            if (a, b) not in table:
                raise AlgebraError(f"join table is not total: missing {a!r} v {b!r}")
            if table[a, b] not in self.carrier:
                raise AlgebraError(f"join table is not closed at {a!r} v {b!r}")
            if table[a, b] != table[b, a]:
                raise AlgebraError(f"join is not commutative at {a!r}, {b!r}")
        for a in self.carrier:
            if table[a, a] != a:
                raise AlgebraError(f"join is not idempotent at {a!r}")
            if bottom is not None and table[bottom, a] != a:
                raise AlgebraError(f"{bottom!r} is not a unit for join at {a!r}")
        for a, b, c in product(self.carrier, repeat=3):
            if table[table[a, b], c] != table[a, table[b, c]]:
                raise AlgebraError(f"join is not associative at {a!r}, {b!r}, {c!r}")
        if bottom is None:
            raise AlgebraError("a join table needs a designated bottom")
        return table

    @property
    def ordered(self) -> bool:
        return self._leq is not None

    def apply(self, op: str, args: Sequence) -> Hashable:
        return self.tables[op][tuple(args)]

    def leq(self, a, b) -> bool:
        return (a, b) in self._leq

    def join(self, a, b):
        return self.joins[a, b]

    def height(self) -> int:
        """Number of strict steps in a longest chain."""
        memo: dict = {}

        def up(a):
            if a not in memo:
                memo[a] = max((1 + up(b) for b in self.carrier if b != a and (a, b) in self._leq), default=0)
            return memo[a]

        return max(up(a) for a in self.carrier)

    def is_monotone(self) -> bool:
        for op, n in self.sig.items():
            for xs in product(self.carrier, repeat=n):
                for i in range(n):
                    for b in self.carrier:
                        if b != xs[i] and (xs[i], b) in self._leq:
                            ys = xs[:i] + (b,) + xs[i + 1:]
                            if (self.tables[op][xs], self.tables[op][ys]) not in self._leq:
                                return False
        return True

    def with_cell(self, op: str, args: tuple, value) -> FiniteAlgebra:
        """Copy with one table entry replaced (order and joins dropped)."""
        tables = {k: dict(v) for k, v in self.tables.items()}
        tables[op][tuple(args)] = value
        return FiniteAlgebra(self.sig, self.carrier, tables)


# -- metric carriers -----------------------------------------------------------

VARIABLES = ("x", "y", "z", "u", "v", "w")

CATALOG = {
    "avg4": "(x+y)/4",
    "half": "x/2",
    "halfup": "x/2 + 1/2",
    "third": "x/3",
    "mix6": "(x + 2*y)/6",
    "shift4": "1/4 + x/4 + y/4",
    "zero": "0",
}


@dataclass(frozen=True)
class AffineFn:
    """``const + sum(coeffs[i] * arg_i)`` with exact rational coefficients."""

    const: Fraction
    coeffs: tuple

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    @property
    def lipschitz(self) -> Fraction:
        return sum((abs(c) for c in self.coeffs), Fraction(0))

    def maps_unit_cube(self) -> bool:
        lo = self.const + sum((min(c, 0) for c in self.coeffs), Fraction(0))
        hi = self.const + sum((max(c, 0) for c in self.coeffs), Fraction(0))
        return 0 <= lo and hi <= 1

    def __call__(self, *xs: float) -> float:
        return float(self.const) + sum(float(c) * x for c, x in zip(self.coeffs, xs))


def parse_affine(text: str) -> AffineFn:
    """Parse an affine expression in ``x, y, z, u, v, w`` with rational coefficients.

    The arity is one more than the index of the last variable that occurs.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise AlgebraError(f"cannot parse function {text!r}: {exc.msg}") from None

    def lin(node) -> dict:
        # affine form as {None: const, var: coeff}
        if isinstance(node, ast.Expression):
            return lin(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return {None: Fraction(ast.get_source_segment(text.strip(), node))}
        if isinstance(node, ast.Name):
            if node.id not in VARIABLES:
                raise AlgebraError(f"unknown variable {node.id} in {text!r}")
            return {node.id: Fraction(1)}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = lin(node.operand)
            sign = -1 if isinstance(node.op, ast.USub) else 1
            return {k: sign * v for k, v in inner.items()}
        if isinstance(node, ast.BinOp):
            a, b = lin(node.left), lin(node.right)
            if isinstance(node.op, (ast.Add, ast.Sub)):
                sign = 1 if isinstance(node.op, ast.Add) else -1
                out = dict(a)
                for k, v in b.items():
                    out[k] = out.get(k, 0) + sign * v
                return out
            if isinstance(node.op, ast.Mult):
                if set(a) <= {None}:
                    a, b = b, a
                if not set(b) <= {None}:
                    raise AlgebraError(f"{text!r} is not affine")
                c = b.get(None, Fraction(0))
                return {k: v * c for k, v in a.items()}
            if isinstance(node.op, ast.Div):
                if not set(b) <= {None} or b.get(None, 0) == 0:
                    raise AlgebraError(f"{text!r} divides by a non-constant or zero")
                c = b[None]
                return {k: v / c for k, v in a.items()}
        raise AlgebraError(f"{text!r} is not an affine expression")

    form = lin(tree)
    used = [VARIABLES.index(k) for k in form if k is not None]
    arity = max(used) + 1 if used else 0
    coeffs = tuple(form.get(VARIABLES[i], Fraction(0)) for i in range(arity))
    return AffineFn(form.get(None, Fraction(0)), coeffs)


class MetricAlgebra:
    """Operations on ``[0, 1]`` contracting with factor ``epsilon`` for the max metric.

    ``ops`` maps each symbol to an :class:`AffineFn`, to an affine expression
    string, or to an ``(arity, callable)`` pair.  Affine functions are checked
    exactly; callables are spot-checked on seeded random samples.
    """

    def __init__(self, ops: Mapping, epsilon: float, tolerance: float, *, check: bool = True, samples: int = 200):
        if not 0 <= epsilon < 1:
            raise AlgebraError(f"contraction factor must lie in [0, 1), got {epsilon}")
        if not tolerance > 0:
            raise AlgebraError("tolerance must be positive")
        self.epsilon = float(epsilon)
        self.tolerance = float(tolerance)
        self.fns: dict = {}
        arities = {}
        for name, fdef in ops.items():
            if isinstance(fdef, str):
                fdef = parse_affine(fdef)
            if isinstance(fdef, AffineFn):
                if check and fdef.lipschitz > Fraction(epsilon):
                    raise AlgebraError(f"{name} is not {epsilon}-contracting (Lipschitz constant {fdef.lipschitz})")
                if check and not fdef.maps_unit_cube():
                    raise AlgebraError(f"{name} does not map [0,1] into [0,1]")
                arities[name] = fdef.arity
                self.fns[name] = fdef
            else:
                arity, fn = fdef
                arities[name] = arity
                self.fns[name] = fn
                if check:
                    self._spot_check(name, arity, fn, samples)
        self.sig = Signature(arities)

    def _spot_check(self, name, arity, fn, samples):
        rng = random.Random(0)
        for _ in range(samples):
            xs = [rng.random() for _ in range(arity)]
            ys = [rng.random() for _ in range(arity)]
            fx, fy = fn(*xs), fn(*ys)
            if not (0 <= fx <= 1):
                raise AlgebraError(f"{name} leaves [0,1] at {xs}")
            d = max((abs(a - b) for a, b in zip(xs, ys)), default=0.0)
            if abs(fx - fy) > self.epsilon * d + 1e-12:
                raise AlgebraError(f"{name} is not {self.epsilon}-contracting near {xs}, {ys}")

    def apply(self, op, args) -> float:
        return self.fns[op](*args)


# -- Elgot algebras ------------------------------------------------------------


@dataclass
class Iteration:
    """Outcome of an iterative dagger: the solution and how it was reached."""

    solution: dict
    steps: int
    last_step: float = 0.0


class ElgotAlgebra:
    """Common surface of every dagger variant.

    Subclasses provide ``sig``, ``carrier`` (``None`` when infinite),
    :meth:`apply` and :meth:`_solve`.
    """

    sig: Signature
    carrier: tuple | None = None
    exact = True

    def apply(self, op: str, args: Sequence):
        raise NotImplementedError

    def _solve(self, e: FlatSystem) -> dict:
        raise NotImplementedError

    def dagger(self, e: FlatSystem) -> dict:
        self.check_system(e)
        return self._solve(e)

    def close(self, a, b, slack: float = 1.0) -> bool:
        return a == b

    def contains(self, a) -> bool:
        return self.carrier is None or a in self._elements

    @property
    def _elements(self) -> frozenset:
        cached = self.__dict__.get("_elements_cache")
        if cached is None:
            cached = frozenset(self.carrier)
            self.__dict__["_elements_cache"] = cached
        return cached

    def check_system(self, e: FlatSystem) -> None:
        ensure_valid(e)
        for x, r in e.items():
            if isinstance(r, Op):
                if self.sig.get(r.op) != len(r.args):
                    raise SignatureMismatch(f"operation {r.op}/{len(r.args)} in equation for {x} is not in the algebra")
            elif not self.contains(r.value):
                raise NotInCarrier(f"parameter {r.value!r} of {x} is not a carrier element")

    def sample(self, rng: random.Random):
        return rng.choice(self.carrier)

    def parse_element(self, text: str):
        for a in self.carrier or ():
            if self.format_element(a) == text:
                return a
        raise NotInCarrier(f"{text!r} is not a carrier element")

    def format_element(self, a) -> str:
        return str(a)


class _FiniteBacked(ElgotAlgebra):
    def __init__(self, base: FiniteAlgebra):
        self.base = base
        self.sig = base.sig
        self.carrier = base.carrier

    def apply(self, op, args):
        return self.base.apply(op, args)


class UnaryAlgebra(_FiniteBacked):
    """One unary operation; cyclic variables get the chosen fixed point."""

    def __init__(self, base: FiniteAlgebra, fixpoint: Hashable | None = None):
        if len(base.sig) != 1 or next(iter(base.sig.values())) != 1:
            raise AlgebraError("a unary algebra needs exactly one operation, of arity 1")
        super().__init__(base)
        self.op = next(iter(base.sig))
        if fixpoint is not None:
            if fixpoint not in base.carrier:
                raise AlgebraError(f"fixed point {fixpoint!r} is not a carrier element")
            if base.apply(self.op, (fixpoint,)) != fixpoint:
                raise AlgebraError(f"{fixpoint!r} is not a fixed point of {self.op}")
        self.fixpoint = fixpoint

    def _solve(self, e):
        out = {}
        for x in e.vars:
            seen = set()
            cur, k = x, 0
            while isinstance(e[cur], Op) and cur not in seen:
                seen.add(cur)
                cur = e[cur].args[0]
                k += 1
            r = e[cur]
            if isinstance(r, Param):
                a = r.value
                for _ in range(k):
                    a = self.base.apply(self.op, (a,))
                out[x] = a
            else:
                if self.fixpoint is None:
                    raise NoFixedPoint(f"variable {x} lies on a cycle and no fixed point is configured")
                out[x] = self.fixpoint
        return out

    def flat_cpo(self) -> KleeneAlgebra:
        """The same operation, solved by least solutions for the flat order below the fixed point."""
        if self.fixpoint is None:
            raise NoFixedPoint("the flat order needs a fixed point as its bottom")
        b = self.base
        ordered = FiniteAlgebra(
            b.sig, b.carrier, b.tables, order=[(self.fixpoint, a) for a in b.carrier], bottom=self.fixpoint
        )
        return KleeneAlgebra(ordered)


def _step(alg, e: FlatSystem, s: dict) -> dict:
    out = {}
    for x, r in e.items():
        if isinstance(r, Op):
            out[x] = alg.apply(r.op, [s[a] for a in r.args])
        else:
            out[x] = r.value
    return out


class KleeneAlgebra(_FiniteBacked):
    """Least solutions by iteration from bottom on a finite poset."""

    def __init__(self, base: FiniteAlgebra):
        if not base.ordered or base.bottom is None:
            raise AlgebraError("least solutions need an order with a bottom element")
        if not base.is_monotone():
            raise AlgebraError("operations are not monotone for the given order")
        super().__init__(base)
        self._height = base.height()

    def iterates(self, e: FlatSystem) -> list:
        """The approximation chain, from constant bottom up to its first repeat."""
        s = {x: self.base.bottom for x in e.vars}
        chain = [s]
        cap = len(e) * self._height + 1
        while True:
            t = _step(self, e, s)
            for x in e.vars:
                if not self.base.leq(s[x], t[x]):
                    raise AlgebraError(f"approximation of {x} decreased from {s[x]!r} to {t[x]!r}")
            if t == s:
                return chain
            if len(chain) > cap:
                raise NonConvergence("approximation chain did not stabilize within its height bound")
            chain.append(t)
            s = t

    def iterate(self, e: FlatSystem) -> Iteration:
        self.check_system(e)
        chain = self.iterates(e)
        return Iteration(chain[-1], len(chain) - 1)

    def _solve(self, e):
        return self.iterates(e)[-1]


class JoinOfLeavesAlgebra(_FiniteBacked):
    """Each variable gets the join of the leaf labels of its rational tree.

    The operations must be the joins of their arguments (nullary ones give
    bottom); if the base has no tables for them they are derived.
    """

    def __init__(self, base: FiniteAlgebra):
        if base.joins is None or base.bottom is None:
            raise AlgebraError("join of leaves needs a join table and a bottom element")
        for op, n in base.sig.items():
            for args in product(base.carrier, repeat=n):
                if base.apply(op, args) != self._join_all(base, args):
                    raise AlgebraError(f"{op}{args} must be the join of its arguments")
        super().__init__(base)

    @staticmethod
    def _join_all(base, xs):
        acc = base.bottom
        for a in xs:
            acc = base.joins[acc, a]
        return acc

    @classmethod
    def from_lattice(cls, sig, carrier, joins, bottom, **kw) -> JoinOfLeavesAlgebra:
        sig = sig if isinstance(sig, Signature) else Signature(sig)
        tmp = FiniteAlgebra(Signature(), carrier, {}, joins=joins, bottom=bottom)
        tables = {op: {xs: cls._join_all(tmp, xs) for xs in product(carrier, repeat=n)} for op, n in sig.items()}
        return cls(FiniteAlgebra(sig, carrier, tables, joins=joins, bottom=bottom, **kw))

    def kleene(self) -> KleeneAlgebra:
        """Least solutions on the same lattice."""
        return KleeneAlgebra(self.base)

    def _solve(self, e):
        # the leaves of x's tree are the parameters reachable from x, so walk
        # back from each parameter instead of building one tree per variable
        preds: dict = {x: [] for x in e.vars}
        for x, r in e.items():
            if isinstance(r, Op):
                for a in r.args:
                    preds[a].append(x)
        out = {x: self.base.bottom for x in e.vars}
        for p in e.params():
            stack = [x for x, r in e.items() if r == Param(p)]
            seen = set(stack)
            while stack:
                v = stack.pop()
                out[v] = self.base.joins[out[v], p]
                for u in preds[v]:
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
        return out

    def evaluate(self, t: RationalTree):
        return self._join_all(self.base, minimize(t).leaves())


class BanachAlgebra(ElgotAlgebra):
    """Unique solutions on ``[0, 1]`` by iterating from the constant 0."""

    exact = False

    def __init__(self, metric: MetricAlgebra):
        self.metric = metric
        self.sig = metric.sig
        self.carrier = None
        self.tolerance = metric.tolerance
        eps = metric.epsilon
        if eps == 0:
            self.threshold = math.inf
            self.cap = 2
        else:
            self.threshold = self.tolerance * (1 - eps) / eps
            self.cap = max(1, 10 * math.ceil(math.log(self.tolerance) / math.log(eps)))

    def apply(self, op, args):
        return self.metric.apply(op, args)

    def contains(self, a) -> bool:
        return isinstance(a, (int, float)) and not isinstance(a, bool) and 0 <= a <= 1

    def close(self, a, b, slack=1.0):
        return abs(a - b) <= slack * self.tolerance

    def iterate(self, e: FlatSystem) -> Iteration:
        self.check_system(e)
        s = {x: 0.0 for x in e.vars}
        for n in range(1, self.cap + 1):
            t = _step(self, e, s)
            delta = max((abs(t[x] - s[x]) for x in e.vars), default=0.0)
            s = t
            if delta < self.threshold:
                return Iteration(s, n, delta)
        raise NonConvergence(f"no convergence within {self.cap} iterations; is every operation contracting?")

    def _solve(self, e):
        return self.iterate(e).solution

    def error_bound(self, it: Iteration) -> float:
        eps = self.metric.epsilon
        return eps / (1 - eps) * it.last_step

    def sample(self, rng):
        return rng.choice((0.0, 0.25, 0.5, 0.75, 1.0, round(rng.random(), 6)))

    def parse_element(self, text):
        try:
            v = float(Fraction(text))
        except (ValueError, ZeroDivisionError):
            raise NotInCarrier(f"{text!r} is not a number") from None
        if not 0 <= v <= 1:
            raise NotInCarrier(f"{text!r} lies outside [0, 1]")
        return v

    def format_element(self, a):
        return repr(float(a))


@dataclass(frozen=True)
class Layer:
    """Element ``op(args)`` of ``HA`` (the left summand of ``HA + Y``)."""

    op: str
    args: tuple = ()

    def __str__(self) -> str:
        return f"{self.op}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Label:
    """Element ``y`` of ``Y`` (the right summand of ``HA + Y``)."""

    value: Hashable

    def __str__(self) -> str:
        return f"'{self.value}"


class ExtendedAlgebra(ElgotAlgebra):
    """The algebra on ``HA + Y`` induced by ``inner`` on ``A`` and ``m: Y -> A``.

    Operations build a layer over the collapsed arguments; a system is solved
    by collapsing its parameters with ``[alpha, m]``, solving in ``inner`` and
    re-reading every op equation as a layer over those values.
    """

    def __init__(self, inner: ElgotAlgebra, m: Mapping):
        self.inner = inner
        self.m = dict(m)
        self.sig = inner.sig
        self.exact = inner.exact
        for y, a in self.m.items():
            if not inner.contains(a):
                raise AlgebraError(f"m({y!r}) = {a!r} is not an element of the inner algebra")
        if inner.carrier is None:
            self.carrier = None
        else:
            layers = [Layer(op, args) for op, n in self.sig.items() for args in product(inner.carrier, repeat=n)]
            self.carrier = tuple(layers) + tuple(Label(y) for y in self.m)

    def collapse(self, c):
        """The map ``[alpha, m]: HA + Y -> A``."""
        if isinstance(c, Layer):
            return self.inner.apply(c.op, c.args)
        return self.m[c.value]

    def apply(self, op, args):
        return Layer(op, tuple(self.collapse(c) for c in args))

    def contains(self, c) -> bool:
        if isinstance(c, Layer):
            return self.sig.get(c.op) == len(c.args) and all(self.inner.contains(a) for a in c.args)
        return isinstance(c, Label) and c.value in self.m

    def _solve(self, e):
        s = self.inner.dagger(rename_params(self.collapse, e))
        out = {}
        for x, r in e.items():
            out[x] = Layer(r.op, tuple(s[a] for a in r.args)) if isinstance(r, Op) else r.value
        return out

    def close(self, a, b, slack=1.0):
        if isinstance(a, Layer) and isinstance(b, Layer):
            return (
                a.op == b.op
                and len(a.args) == len(b.args)
                and all(self.inner.close(p, q, slack) for p, q in zip(a.args, b.args))
            )
        return a == b

    def sample(self, rng):
        if self.m and rng.random() < 0.4:
            return Label(rng.choice(list(self.m)))
        op = rng.choice(list(self.sig))
        return Layer(op, tuple(self.inner.sample(rng) for _ in range(self.sig[op])))

    def parse_element(self, text):
        if text.startswith("'"):
            return Label(text[1:])
        return super().parse_element(text)


class FreeRationalAlgebra(ElgotAlgebra):
    """Rational trees over ``labels``; parameters may be labels or trees."""

    def __init__(self, sig: Signature | Mapping[str, int], labels: Iterable[Hashable]):
        self.sig = sig if isinstance(sig, Signature) else Signature(sig)
        self.labels = tuple(labels)
        self.carrier = None

    def _lift(self, p) -> RationalTree:
        return p if isinstance(p, RationalTree) else eta(p, self.sig)

    def contains(self, p) -> bool:
        if isinstance(p, RationalTree):
            return all(self.sig.get(op) == n for op, n in p.sig.items() if op in self.sig) and all(
                lab in self.labels for lab in p.leaves()
            )
        return p in self.labels

    def apply(self, op, args):
        return apply_layer(op, [self._lift(a) for a in args], self.sig)

    def _solve(self, e):
        return solve_in_R(rename_params(self._lift, e))

    def close(self, a, b, slack=1.0):
        return bisimilar(self._lift(a), self._lift(b))

    def sample(self, rng):
        if rng.random() < 0.5:
            return rng.choice(self.labels)
        from .laws import random_system

        sys = random_system(rng, self.sig, lambda r: r.choice(self.labels), rng.randint(1, 3))
        return RationalTree(sys, sys.vars[0])


# -- the dagger and its laws ---------------------------------------------------


def dagger(alg: ElgotAlgebra, e: FlatSystem) -> dict:
    """The chosen solution of ``e`` in ``alg``."""
    return alg.dagger(e)


def check_solution(alg: ElgotAlgebra, e: FlatSystem, s: Mapping, slack: float = 1.0) -> bool:
    """Does ``s`` solve ``e`` in ``alg`` (within tolerance for inexact carriers)?"""
    for x, r in e.items():
        if x not in s:
            return False
        if isinstance(r, Op):
            want = alg.apply(r.op, [s[a] for a in r.args])
        else:
            want = r.value
        if not alg.close(s[x], want, slack):
            return False
    return True


def check_functoriality(alg: ElgotAlgebra, h: Mapping, e: FlatSystem, f: FlatSystem) -> bool:
    """Solutions are invariant along the equation morphism ``h: e -> f``."""
    if not is_equation_morphism(h, e, f):
        raise NotAMorphism("h is not a morphism of equations from e to f")
    se, sf = alg.dagger(e), alg.dagger(f)
    return all(alg.close(se[x], sf[h[x]], 2.0) for x in e.vars)


def compositionality_sides(alg: ElgotAlgebra, e: FlatSystem, f: FlatSystem) -> tuple[dict, dict, dict]:
    """``(dagger(f† ▹ e), dagger(f ⊞ e), f†)`` for inspection."""
    sf = alg.dagger(f)
    sequential = alg.dagger(rename_params(sf, e))
    simultaneous = alg.dagger(pair(f, e))
    return sequential, simultaneous, sf


def check_compositionality(alg: ElgotAlgebra, e: FlatSystem, f: FlatSystem) -> bool:
    """Solving ``f`` then ``e`` agrees with solving both at once, on both summands."""
    sequential, simultaneous, sf = compositionality_sides(alg, e, f)
    left = all(alg.close(sequential[x], simultaneous[inl(x)], 4.0) for x in e.vars)
    right = all(alg.close(sf[y], simultaneous[inr(y)], 4.0) for y in f.vars)
    return left and right


def _call(h, a):
    return h[a] if isinstance(h, Mapping) else h(a)


def check_solution_preserving(h, alg_a: ElgotAlgebra, alg_b: ElgotAlgebra, e: FlatSystem) -> bool:
    """``h . dagger_A(e) == dagger_B(h ▹ e)``."""
    sa = alg_a.dagger(e)
    sb = alg_b.dagger(rename_params(h, e))
    return all(alg_b.close(_call(h, sa[x]), sb[x], 2.0) for x in e.vars)


def homomorphism_from_solution_preserving(h, alg_a: ElgotAlgebra, alg_b: ElgotAlgebra) -> bool:
    """Check ``h(alpha_A(op, xs)) == alpha_B(op, h(xs))`` for every op and tuple.

    Solution-preserving maps always pass; passing does not imply preservation.
    """
    if alg_a.carrier is None:
        raise AlgebraError("the homomorphism check needs a finite source carrier")
    for op, n in alg_a.sig.items():
        for xs in product(alg_a.carrier, repeat=n):
            lhs = _call(h, alg_a.apply(op, xs))
            rhs = alg_b.apply(op, [_call(h, a) for a in xs])
            if not alg_b.close(lhs, rhs):
                return False
    return True


def single_layer_systems(alg: ElgotAlgebra) -> list[FlatSystem]:
    """Systems ``{x = op(p1..pn), p_i = param a_i}``, one per op and argument tuple."""
    out = []
    for op, n in alg.sig.items():
        for xs in product(alg.carrier, repeat=n):
            eqs = [("x", Op(op, tuple(f"p{i}" for i in range(n))))]
            eqs += [(f"p{i}", Param(a)) for i, a in enumerate(xs)]
            out.append(FlatSystem(alg.sig, eqs))
    return out


def _layer_name(op, args, fmt) -> str:
    return f"{op}({','.join(fmt(a) for a in args)})"


def canonical_system(alg: ElgotAlgebra) -> tuple[FlatSystem, dict]:
    """The system on ``HA + A`` sending ``op(as)`` to ``op(a1..an)`` and ``a`` to
    ``param a``, together with the assignment ``[alpha, id]`` that solves it.

    Variables for ``HA`` are tagged with :func:`inl`, those for ``A`` with :func:`inr`.
    """
    if alg.carrier is None:
        raise AlgebraError("the canonical system needs a finite carrier")
    fmt = alg.format_element
    name = {a: inr(fmt(a)) for a in alg.carrier}
    if len(set(name.values())) != len(name):
        raise AlgebraError("carrier elements must have distinct printed names")
    eqs, expected = [], {}
    for op, n in alg.sig.items():
        for xs in product(alg.carrier, repeat=n):
            v = inl(_layer_name(op, xs, fmt))
            eqs.append((v, Op(op, tuple(name[a] for a in xs))))
            expected[v] = alg.apply(op, xs)
    for a in alg.carrier:
        eqs.append((name[a], Param(a)))
        expected[name[a]] = a
    return FlatSystem(alg.sig, eqs), expected


def build_stream_system(prefix: Sequence, cycle: Sequence, op: str, sig: Signature | None = None) -> FlatSystem:
    """Flat system for ``x_n = op(a_n, x_{n+1})`` along the stream ``prefix . cycle^omega``.

    Variables ``x0 .. x{k-1}`` carry the stream positions and ``a0 .. a{k-1}``
    the elements; the last position loops back to the start of the cycle.
    """
    if not cycle:
        raise EmptyCycle("the periodic part of the stream must be non-empty")
    sig = Signature({op: 2}) if sig is None else sig
    if sig.get(op) != 2:
        raise SignatureMismatch(f"{op} must be a binary operation")
    items = list(prefix) + list(cycle)
    k = len(items)
    eqs = []
    for n in range(k):
        nxt = n + 1 if n + 1 < k else len(prefix)
        eqs.append((f"x{n}", Op(op, (f"a{n}", f"x{nxt}"))))
    eqs += [(f"a{n}", Param(a)) for n, a in enumerate(items)]
    return FlatSystem(sig, eqs)
