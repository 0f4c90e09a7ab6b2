"""Random instances and the randomized law suites.

Every trial draws from its own ``random.Random(trial_seed)``, with
``trial_seed`` derived from the suite seed and the trial index, so a failing
trial can be replayed on its own and reports do not depend on scheduling.
"""

from __future__ import annotations

import random
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .algebra import (
    AffineFn,
    BanachAlgebra,
    ElgotAlgebra,
    ExtendedAlgebra,
    FiniteAlgebra,
    FreeRationalAlgebra,
    JoinOfLeavesAlgebra,
    KleeneAlgebra,
    MetricAlgebra,
    UnaryAlgebra,
    check_compositionality,
    check_functoriality,
    check_solution,
)
from .core import FlatSystem, Op, Param, Signature

MAX_VARS = 8
MAX_CARRIER = 6
MAX_OPS = 3

SUITES = ("solution", "functoriality", "compositionality")


def trial_seed(seed: int, i: int) -> int:
    return seed * 1_000_003 + i


# -- systems -------------------------------------------------------------------


def random_system(
    rng: random.Random,
    sig: Signature,
    sample: Callable[[random.Random], object],
    n_vars: int,
    *,
    p_param: float = 0.35,
    forward: float = 0.6,
    prefix: str = "x",
) -> FlatSystem:
    """Random valid system on ``x0 .. x{n-1}``.

    An argument of ``x_i`` is drawn from the later variables with probability
    ``forward`` (so parameters are usually reachable) and from all variables
    otherwise (so cycles occur).
    """
    names = [f"{prefix}{i}" for i in range(n_vars)]
    ops = list(sig)
    eqs = []
    for i, x in enumerate(names):
        if not ops or rng.random() < p_param:
            eqs.append((x, Param(sample(rng))))
        else:
            op = rng.choice(ops)
            later = names[i + 1:]
            args = tuple(
                rng.choice(later) if later and rng.random() < forward else rng.choice(names) for _ in range(sig[op])
            )
            eqs.append((x, Op(op, args)))
    return FlatSystem(sig, eqs)


def random_morphism_triple(rng, sig, sample):
    """``(h, e, f)`` with ``h: e -> f`` an equation morphism.

    ``f`` is random; ``e`` is pulled back along a random surjection ``h``.
    """
    n_y = rng.randint(1, 5)
    f = random_system(rng, sig, sample, n_y, prefix="y")
    n_x = rng.randint(n_y, MAX_VARS)
    xs = [f"x{i}" for i in range(n_x)]
    ys = list(f.vars)
    targets = ys + [rng.choice(ys) for _ in range(n_x - n_y)]
    rng.shuffle(targets)
    h = dict(zip(xs, targets))
    pre: dict = {}
    for x, y in h.items():
        pre.setdefault(y, []).append(x)
    eqs = []
    for x in xs:
        r = f[h[x]]
        if isinstance(r, Op):
            r = Op(r.op, tuple(rng.choice(pre[a]) for a in r.args))
        eqs.append((x, r))
    return h, FlatSystem(sig, eqs), f


def random_composition_pair(rng, sig, sample):
    """``(e, f)``: ``f`` over the carrier, ``e`` with ``f``'s variables as parameters."""
    f = random_system(rng, sig, sample, rng.randint(1, 4), prefix="y")
    ys = list(f.vars)
    e = random_system(rng, sig, lambda r: r.choice(ys), rng.randint(1, 4), prefix="x")
    return e, f


# -- algebras ------------------------------------------------------------------


def random_signature(rng, *, max_ops=MAX_OPS, max_arity=2, min_arity=0) -> Signature:
    n = rng.randint(1, max_ops)
    names = ["mul", "s", "c", "g"][:n]
    return Signature({op: rng.randint(min_arity, max_arity) for op in names})


def random_lattice(rng, max_size=MAX_CARRIER):
    """A finite lattice as a union-closed family of subsets.

    Returns ``(carrier, joins, bottom, sets)`` with string element names.
    """
    while True:
        k = rng.randint(1, 3)
        universe = frozenset(range(k))
        subsets = [frozenset(c) for r in range(k + 1) for c in combinations(range(k), r)]
        fam = {frozenset(), universe}
        fam |= {s for s in subsets if rng.random() < 0.5}
        changed = True
        while changed:
            changed = False
            for a, b in list(product(fam, repeat=2)):
                if a | b not in fam:
                    fam.add(a | b)
                    changed = True
        if len(fam) <= max_size:
            break
    ordered = sorted(fam, key=lambda s: (len(s), sorted(s)))
    names = {}
    for i, s in enumerate(ordered):
        if not s:
            names[s] = "bot"
        elif s == universe:
            names[s] = "top"
        else:
            names[s] = "abcd"[len(names) - 1]
    carrier = [names[s] for s in ordered]
    joins = {(names[a], names[b]): names[a | b] for a, b in product(ordered, repeat=2)}
    return carrier, joins, "bot", {names[s]: s for s in ordered}


def random_monotone_tables(rng, sig, carrier, sets):
    """Monotone operations on the lattice ``sets`` (name -> frozenset)."""
    tables = {}
    for op, n in sig.items():
        table = {}
        tuples = sorted(product(carrier, repeat=n), key=lambda t: sum(len(sets[a]) for a in t))
        for t in tuples:
            need = frozenset()
            for i, a in enumerate(t):
                for b in carrier:
                    if sets[b] < sets[a]:
                        need |= sets[table[t[:i] + (b,) + t[i + 1:]]]
            choices = [c for c in carrier if need <= sets[c]]
            table[t] = rng.choice(choices)
        tables[op] = table
    return tables


def random_kleene_algebra(rng) -> KleeneAlgebra:
    sig = random_signature(rng)
    carrier, joins, bottom, sets = random_lattice(rng)
    tables = random_monotone_tables(rng, sig, carrier, sets)
    order = [(a, b) for a, b in product(carrier, repeat=2) if sets[a] <= sets[b]]
    return KleeneAlgebra(FiniteAlgebra(sig, carrier, tables, order=order, bottom=bottom))


def random_join_algebra(rng) -> JoinOfLeavesAlgebra:
    sig = random_signature(rng)
    carrier, joins, bottom, _ = random_lattice(rng)
    return JoinOfLeavesAlgebra.from_lattice(sig, carrier, joins, bottom)


def random_unary_algebra(rng, *, with_fixpoint=True) -> UnaryAlgebra:
    n = rng.randint(1, MAX_CARRIER)
    carrier = [f"a{i}" for i in range(n)]
    table = {(a,): rng.choice(carrier) for a in carrier}
    a0 = None
    if with_fixpoint:
        a0 = rng.choice(carrier)
        table[(a0,)] = a0
    return UnaryAlgebra(FiniteAlgebra({"s": 1}, carrier, {"s": table}), a0)


def random_affine(rng, arity, epsilon=Fraction(1, 2)) -> AffineFn:
    raw = [rng.randint(0, 4) for _ in range(arity)]
    total = sum(raw)
    scale = epsilon / total if total else Fraction(0)
    coeffs = tuple(Fraction(w) * scale * Fraction(rng.randint(1, 4), 4) for w in raw)
    room = 1 - sum(coeffs, Fraction(0))
    const = room * Fraction(rng.randint(0, 8), 8)
    return AffineFn(const, coeffs)


def random_banach_algebra(rng, tolerance=1e-9) -> BanachAlgebra:
    sig = random_signature(rng)
    ops = {op: random_affine(rng, n) for op, n in sig.items()}
    return BanachAlgebra(MetricAlgebra(ops, 0.5, tolerance))


def random_extended_algebra(rng) -> ExtendedAlgebra:
    inner = rng.choice([random_kleene_algebra, random_join_algebra, random_unary_algebra])(rng)
    labels = ["p", "q"][: rng.randint(1, 2)]
    return ExtendedAlgebra(inner, {y: rng.choice(inner.carrier) for y in labels})


def random_free_algebra(rng) -> FreeRationalAlgebra:
    return FreeRationalAlgebra(random_signature(rng), ["a", "b", "c"])


VARIANTS: dict[str, Callable[[random.Random], ElgotAlgebra]] = {
    "unary": random_unary_algebra,
    "kleene": random_kleene_algebra,
    "banach": random_banach_algebra,
    "join": random_join_algebra,
    "extended": random_extended_algebra,
    "free": random_free_algebra,
}


# -- suites --------------------------------------------------------------------


@dataclass
class LawReport:
    law: str
    trials: int
    seed: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {"law": self.law, "trials": self.trials, "seed": self.seed, "failures": self.failures}


def _one_trial(suite: str, alg: ElgotAlgebra, rng: random.Random):
    """Run one random instance; return ``None`` on success or a failure record."""
    sample = alg.sample
    if suite == "solution":
        e = random_system(rng, alg.sig, sample, rng.randint(1, MAX_VARS))
        s = alg.dagger(e)
        if not check_solution(alg, e, s):
            return {"system": repr(e), "solution": _show(alg, s)}
    elif suite == "functoriality":
        h, e, f = random_morphism_triple(rng, alg.sig, sample)
        if not check_functoriality(alg, h, e, f):
            return {"e": repr(e), "f": repr(f), "h": h}
    elif suite == "compositionality":
        e, f = random_composition_pair(rng, alg.sig, sample)
        if not check_compositionality(alg, e, f):
            return {"e": repr(e), "f": repr(f)}
    else:
        raise ValueError(f"unknown suite {suite!r}")
    return None


def _show(alg, s: dict) -> dict:
    return {str(x): alg.format_element(v) for x, v in s.items()}


def run_suite(alg: ElgotAlgebra, suite: str, trials: int, seed: int) -> LawReport:
    """Law suite on random systems over the fixed algebra ``alg``."""
    report = LawReport(suite, trials, seed)
    for i in range(trials):
        ts = trial_seed(seed, i)
        bad = _one_trial(suite, alg, random.Random(ts))
        if bad is not None:
            report.failures.append({"trial": i, "seed": ts, **bad})
    return report


def run_variant_suite(variant: str, suite: str, trials: int, seed: int) -> LawReport:
    """Law suite where every trial also draws a fresh random algebra of ``variant``."""
    make = VARIANTS[variant]
    report = LawReport(f"{suite}:{variant}", trials, seed)
    for i in range(trials):
        ts = trial_seed(seed, i)
        rng = random.Random(ts)
        alg = make(rng)
        bad = _one_trial(suite, alg, rng)
        if bad is not None:
            report.failures.append({"trial": i, "seed": ts, **bad})
    return report
