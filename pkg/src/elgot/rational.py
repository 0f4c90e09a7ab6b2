"""Rational trees as pointed finite coalgebras.

A :class:`RationalTree` is a flat system over leaf labels together with a
root variable; it denotes the (possibly infinite) tree obtained by unfolding
the system from the root.  Two trees are equal iff they unfold to the same
tree, so ``==`` and ``hash`` go through a canonical minimal form, and trees
can be used as leaf labels of other trees.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Mapping, Sequence
import weakref
from dataclasses import dataclass

from .core import FlatSystem, Op, Param, Signature, ensure_valid, pair, rename_params
from .errors import ArityMismatch

__all__ = [
    "RationalTree",
    "Node",
    "Leaf",
    "CUT",
    "solve_free",
    "bisimilar",
    "minimize",
    "subtree_count",
    "solve_in_R",
    "eta",
    "apply_layer",
    "substitute",
    "unfold",
    "to_sexpr",
]


def _reachable(rhs: Mapping, root) -> list:
    order = [root]
    seen = {root}
    i = 0
    while i < len(order):
        r = rhs[order[i]]
        i += 1
        if isinstance(r, Op):
            for a in r.args:
                if a not in seen:
                    seen.add(a)
                    order.append(a)
    return order


class RationalTree:
    """A pointed flat system; unreachable states are pruned on construction."""

    __slots__ = ("system", "root", "_canon")

    def __init__(self, system: FlatSystem, root):
        ensure_valid(system)
        if root not in system:
            raise KeyError(f"root {root!r} is not a variable of the system")
        keep = _reachable(system.rhs, root)
        if len(keep) != len(system):
            keep_set = set(keep)
            system = FlatSystem(system.sig, [(x, r) for x, r in system.items() if x in keep_set])
        object.__setattr__(self, "system", system)
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "_canon", None)

    def __setattr__(self, name, value):
        raise AttributeError("RationalTree is immutable")

    @property
    def sig(self) -> Signature:
        return self.system.sig

    @property
    def states(self) -> tuple:
        return self.system.vars

    def leaves(self) -> list:
        """Distinct leaf labels, in breadth-first order from the root."""
        out: dict = {}
        for x in _reachable(self.system.rhs, self.root):
            r = self.system[x]
            if isinstance(r, Param):
                out.setdefault(r.value, None)
        return list(out)

    def canonical(self) -> tuple:
        """Key shared by exactly the trees that unfold to the same tree."""
        if self._canon is None:
            m = minimize(self)
            key = tuple(
                (r.op, tuple(int(a[1:]) for a in r.args)) if isinstance(r, Op) else ("", r.value)
                for _, r in m.system.equations
            )
            object.__setattr__(self, "_canon", key)
        return self._canon

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalTree):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def __repr__(self) -> str:
        return f"RationalTree({to_sexpr(unfold(self, 4))})"


# -- truncations -------------------------------------------------------------


class _Cut:
    __slots__ = ()

    def __repr__(self) -> str:
        return "CUT"


CUT = _Cut()


@dataclass(frozen=True, eq=False)
class Node:
    op: str
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.op, self.children)))

    def __eq__(self, other):
        # truncations from unfold are hash-consed: equal ones are usually the
        # same object, and the identity short-cut keeps comparisons cheap
        if self is other:
            return True
        if not isinstance(other, Node):
            return NotImplemented
        return self._hash == other._hash and self.op == other.op and self.children == other.children

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True)
class Leaf:
    label: Hashable


_SHARED: weakref.WeakValueDictionary = weakref.WeakValueDictionary()


def _shared(key, make):
    # an entry lives only as long as its value, which keeps alive the children
    # whose ids appear in the key
    obj = _SHARED.get(key)
    if obj is None:
        obj = make()
        _SHARED[key] = obj
    return obj


def _leaf(label) -> Leaf:
    return _shared(("leaf", type(label), label), lambda: Leaf(label))


def _node(op: str, children: tuple) -> Node:
    return _shared(("node", op, tuple(map(id, children))), lambda: Node(op, children))


def unfold(t: RationalTree, depth: int):
    """Depth-bounded prefix of ``t``.

    Operation nodes at depth ``depth`` (root has depth 0) become :data:`CUT`;
    leaves are always shown.  The prefix is built bottom-up with shared
    sub-truncations, so its size is ``O(depth * states)`` even though the
    tree it denotes is exponentially large.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    rhs = t.system.rhs
    leaves = {x: _leaf(r.value) for x, r in rhs.items() if isinstance(r, Param)}
    # level[x] is the truncation of x when ``remaining`` more levels may be shown
    level = {x: leaves.get(x, CUT) for x in rhs}
    for _ in range(depth):
        level = {
            x: leaves[x] if x in leaves else _node(r.op, tuple(level[a] for a in r.args)) for x, r in rhs.items()
        }
    return level[t.root]


def to_sexpr(trunc) -> str:
    if trunc is CUT:
        return "^"
    if isinstance(trunc, Leaf):
        return str(trunc.label)
    if not trunc.children:
        return f"({trunc.op})"
    return f"({trunc.op} {' '.join(to_sexpr(c) for c in trunc.children)})"


# -- equality ----------------------------------------------------------------


def bisimilar(s: RationalTree, t: RationalTree) -> bool:
    """Decide whether ``s`` and ``t`` unfold to the same tree.

    Explores the pairs of states reachable from the two roots; any pair that
    disagrees locally witnesses a difference.
    """
    ls, lt = s.system.rhs, t.system.rhs
    seen = set()
    stack = [(s.root, t.root)]
    while stack:
        p, q = stack.pop()
        if (p, q) in seen:
            continue
        seen.add((p, q))
        rp, rq = ls[p], lt[q]
        if isinstance(rp, Param) or isinstance(rq, Param):
            if not (isinstance(rp, Param) and isinstance(rq, Param) and rp.value == rq.value):
                return False
            continue
        if rp.op != rq.op or len(rp.args) != len(rq.args):
            return False
        stack.extend(zip(rp.args, rq.args))
    return True


def _partition(rhs: Mapping) -> dict:
    """Coarsest stable partition of the states, as a map state -> block id."""

    def key0(r):
        return (r.op, len(r.args)) if isinstance(r, Op) else ("", r.value)

    block: dict = {}
    ids: dict = {}
    for x, r in rhs.items():
        block[x] = ids.setdefault(key0(r), len(ids))
    count = len(ids)
    while True:
        ids = {}
        new = {}
        for x, r in rhs.items():
            k = (block[x], tuple(block[a] for a in r.args) if isinstance(r, Op) else ())
            new[x] = ids.setdefault(k, len(ids))
        block = new
        if len(ids) == count:
            return block
        count = len(ids)


def minimize(t: RationalTree) -> RationalTree:
    """Minimal representation of ``t``; states are renamed ``q0, q1, ...``
    in breadth-first order from the root, so equal trees minimize to equal
    systems."""
    rhs = t.system.rhs
    block = _partition(rhs)
    rep: dict = {}
    for x in rhs:
        rep.setdefault(block[x], x)
    name: dict = {}
    queue = [t.root]
    name[block[t.root]] = "q0"
    eqs = []
    i = 0
    while i < len(queue):
        x = rep[block[queue[i]]]
        i += 1
        r = rhs[x]
        if isinstance(r, Op):
            args = []
            for a in r.args:
                b = block[a]
                if b not in name:
                    name[b] = f"q{len(name)}"
                    queue.append(a)
                args.append(name[b])
            r = Op(r.op, tuple(args))
        eqs.append((name[block[x]], r))
    return RationalTree(FlatSystem(t.sig, eqs), "q0")


def subtree_count(t: RationalTree) -> int:
    """Number of distinct subtrees of ``t`` (leaves included)."""
    return len(minimize(t).system)


# -- the free iterative algebra -----------------------------------------------


def solve_free(e: FlatSystem) -> dict:
    """Unique solution of ``e`` in rational trees over its parameters."""
    ensure_valid(e)
    return {x: RationalTree(e, x) for x in e.vars}


def eta(y: Hashable, sig: Signature | None = None) -> RationalTree:
    """The one-leaf tree labelled ``y``."""
    return RationalTree(FlatSystem(sig or Signature(), [("q0", Param(y))]), "q0")


def _union_sig(sigs: Iterable[Signature]) -> Signature:
    out = Signature()
    for s in sigs:
        out = out.union(s)
    return out


def apply_layer(op: str, children: Sequence[RationalTree], sig: Signature | None = None) -> RationalTree:
    """Tree with root ``op`` and the given subtrees."""
    if sig is None:
        sig = _union_sig(c.sig for c in children)
    if op in sig:
        if sig[op] != len(children):
            raise ArityMismatch(f"{op} has arity {sig[op]}, got {len(children)} children")
    else:
        sig = sig.union(Signature({op: len(children)}))
    for c in children:
        sig = sig.union(c.sig)
    eqs = []
    roots = []
    for i, c in enumerate(children):
        prefix = f"c{i}."
        roots.append(prefix + str(c.root))
        for x, r in c.system.items():
            if isinstance(r, Op):
                r = Op(r.op, tuple(prefix + str(a) for a in r.args))
            eqs.append((prefix + str(x), r))
    eqs.insert(0, ("top", Op(op, tuple(roots))))
    return RationalTree(FlatSystem(sig, eqs), "top")


def solve_in_R(e: FlatSystem) -> dict:
    """Unique solution, in rational trees, of a system whose parameters are trees.

    ``e`` is factored through the disjoint union ``g`` of the parameter trees'
    systems (parameter tree ``t`` becomes the variable naming its root), and
    the answer is read off ``pair(g, e0)`` at the left-tagged variables.
    """
    ensure_valid(e)
    trees = e.params()
    for t in trees:
        if not isinstance(t, RationalTree):
            raise TypeError(f"parameter {t!r} is not a rational tree")
    sig = _union_sig([e.sig, *(t.sig for t in trees)])
    eqs = []
    root_of = {}
    for i, t in enumerate(trees):
        prefix = f"t{i}."
        root_of[t] = prefix + str(t.root)
        for x, r in t.system.items():
            if isinstance(r, Op):
                r = Op(r.op, tuple(prefix + str(a) for a in r.args))
            eqs.append((prefix + str(x), r))
    g = FlatSystem(sig, eqs)
    e0 = rename_params(root_of, FlatSystem(sig, e.equations))
    combined = pair(g, e0)
    return {x: RationalTree(combined, f"L.{x}") for x in e.vars}


def substitute(t: RationalTree) -> RationalTree:
    """Flatten a tree of trees: every leaf is replaced by its label tree."""
    return solve_in_R(t.system)[t.root]
