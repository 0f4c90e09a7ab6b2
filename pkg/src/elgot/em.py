"""Passing between Elgot algebras and algebras for the rational-tree monad.

An :class:`EMAlgebra` evaluates every rational tree over its carrier to a
carrier element.  :func:`elgot_to_em` evaluates a tree by solving its own
defining system; :func:`em_to_elgot` recovers operations and solutions from
an evaluation.  :func:`check_em_laws` tests the unit and multiplication laws
on random nested trees (the multiplication being
:func:`~elgot.rational.substitute`).
"""

from __future__ import annotations

import random
from collections.abc import Callable, Hashable, Sequence

from .algebra import ElgotAlgebra
from .core import FlatSystem, Op, Param, Signature, rename_params
from .errors import AlgebraError, SignatureMismatch
from .laws import trial_seed
from .rational import RationalTree, apply_layer, eta, solve_in_R, substitute, to_sexpr, unfold

__all__ = ["EMAlgebra", "elgot_to_em", "em_to_elgot", "EMDerivedAlgebra", "check_em_laws", "random_nested_tree"]


class EMAlgebra:
    """A finite carrier with an evaluation of rational trees over it."""

    def __init__(self, sig: Signature, carrier: Sequence[Hashable] | None, evaluate: Callable[[RationalTree], Hashable]):
        if carrier is None:
            raise AlgebraError("evaluation algebras are supported on finite carriers only")
        self.sig = sig
        self.carrier = tuple(carrier)
        self.evaluate = evaluate
        for a in self.carrier:
            if evaluate(eta(a, sig)) != a:
                raise AlgebraError(f"unit law fails at {a!r}")

    def __call__(self, t: RationalTree):
        return self.evaluate(t)


def elgot_to_em(alg: ElgotAlgebra) -> EMAlgebra:
    """Evaluate a tree by solving its defining system in ``alg``."""

    def evaluate(t: RationalTree):
        for op, n in t.sig.items():
            if op in alg.sig and alg.sig[op] != n:
                raise SignatureMismatch(f"tree uses {op}/{n}, algebra has {op}/{alg.sig[op]}")
        return alg.dagger(FlatSystem(alg.sig, t.system.equations))[t.root]

    return EMAlgebra(alg.sig, alg.carrier, evaluate)


class EMDerivedAlgebra(ElgotAlgebra):
    """Operations and solutions read off an evaluation of trees."""

    def __init__(self, em: EMAlgebra):
        self.em = em
        self.sig = em.sig
        self.carrier = em.carrier

    def apply(self, op, args):
        return self.em.evaluate(apply_layer(op, [eta(a, self.sig) for a in args], self.sig))

    def _solve(self, e):
        trees = solve_in_R(rename_params(lambda a: eta(a, self.sig), e))
        return {x: self.em.evaluate(t) for x, t in trees.items()}


def em_to_elgot(em: EMAlgebra) -> EMDerivedAlgebra:
    return EMDerivedAlgebra(em)


def random_tree(rng: random.Random, sig: Signature, labels: Sequence, max_states: int) -> RationalTree:
    """Random tree with at most ``max_states`` states.

    Operation states come first and point mostly to later states, with an
    occasional back edge; the remaining states are leaves.
    """
    n = rng.randint(1, max_states)
    ops = [op for op in sig if sig[op] > 0] or list(sig)
    n_ops = rng.randint(1, max(1, n - 2)) if ops and n > 1 else 0
    names = [f"s{i}" for i in range(n)]
    eqs = []
    for i in range(n_ops):
        op = rng.choice(ops)
        later = names[i + 1:]
        args = [rng.choice(later) if rng.random() < 0.85 else rng.choice(names) for _ in range(sig[op])]
        if args and i == n_ops - 1:
            # the last operation state sees the leaves in turn, so most of them stay reachable
            args = [names[n_ops + (j % (n - n_ops))] for j in range(len(args))]
        eqs.append((names[i], Op(op, tuple(args))))
    leaves = names[n_ops:]
    pool = list(labels)
    picks = rng.sample(pool, len(leaves)) if len(pool) >= len(leaves) else [rng.choice(pool) for _ in leaves]
    eqs += list(zip(leaves, map(Param, picks)))
    return RationalTree(FlatSystem(sig, eqs), "s0")


def random_nested_tree(rng: random.Random, sig: Signature, carrier: Sequence) -> RationalTree:
    """A tree (at most 4 states) whose leaves are trees (at most 5 states) over ``carrier``."""
    inner = [random_tree(rng, sig, carrier, 5) for _ in range(rng.randint(1, 3))]
    return random_tree(rng, sig, inner, 4)


def _show(t: RationalTree) -> str:
    return to_sexpr(unfold(t, 4))


def check_em_laws(em: EMAlgebra, trials: int, seed: int) -> list[dict]:
    """Unit law on every element and the multiplication law on ``trials`` random
    nested trees; returns one report per law."""
    unit = {"law": "unit", "trials": len(em.carrier), "seed": seed, "failures": []}
    for a in em.carrier:
        got = em.evaluate(eta(a, em.sig))
        if got != a:
            unit["failures"].append({"seed": seed, "tree": str(a), "lhs": str(got), "rhs": str(a)})
    mult = {"law": "multiplication", "trials": trials, "seed": seed, "failures": []}
    for i in range(trials):
        ts = trial_seed(seed, i)
        nested = random_nested_tree(random.Random(ts), em.sig, em.carrier)
        lhs = em.evaluate(substitute(nested))
        rhs = em.evaluate(RationalTree(rename_params(em.evaluate, nested.system), nested.root))
        if lhs != rhs:
            mult["failures"].append({"seed": ts, "tree": _show_nested(nested), "lhs": str(lhs), "rhs": str(rhs)})
    return [unit, mult]


def _show_nested(t: RationalTree) -> str:
    sys = rename_params(lambda inner: f"[{_show(inner)}]", t.system)
    return _show(RationalTree(sys, t.root))
