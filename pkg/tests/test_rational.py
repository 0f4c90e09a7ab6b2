import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elgot.core import FlatSystem, Op, Param, Signature, flatten
from elgot.laws import random_system
from elgot.rational import (
    CUT,
    Leaf,
    Node,
    RationalTree,
    apply_layer,
    bisimilar,
    eta,
    minimize,
    solve_free,
    solve_in_R,
    substitute,
    subtree_count,
    to_sexpr,
    unfold,
)

from .conftest import MUL
from .test_core import PRODUCTS

COMB = RationalTree(
    FlatSystem(
        MUL,
        {"x": Op("mul", ("a", "y")), "y": Op("mul", ("b", "x")), "a": Param("a"), "b": Param("b")},
    ),
    "x",
)
IDEM = RationalTree(FlatSystem(MUL, {"x": Op("mul", ("x", "x"))}), "x")


def test_comb_minimizes_to_four_states():
    m = minimize(COMB)
    assert len(m.system) == 4 == subtree_count(COMB)
    assert m.root == "q0"
    assert to_sexpr(unfold(COMB, 3)) == "(mul a (mul b (mul a ^)))"


def test_unfold_small_cases():
    for k in range(4):
        assert unfold(eta("a"), k) == Leaf("a")
    assert unfold(IDEM, 1) == Node("mul", (CUT, CUT))
    assert unfold(IDEM, 0) is CUT
    with pytest.raises(ValueError):
        unfold(IDEM, -1)


def test_bisimilar_ignores_state_graph_shape():
    two = RationalTree(FlatSystem(MUL, {"x": Op("mul", ("y", "x")), "y": Op("mul", ("x", "y"))}), "x")
    assert bisimilar(IDEM, two) and IDEM == two and hash(IDEM) == hash(two)
    # duplicated root: one step of unfolding
    dup = RationalTree(
        FlatSystem(
            MUL,
            {"r": Op("mul", ("a", "y")), "x": Op("mul", ("a", "y")), "y": Op("mul", ("b", "x")),
             "a": Param("a"), "b": Param("b")},
        ),
        "r",
    )
    assert bisimilar(dup, COMB) and dup == COMB
    assert not bisimilar(COMB, IDEM)


def test_unreachable_states_are_pruned():
    t = RationalTree(FlatSystem(MUL, {"x": Param("a"), "junk": Op("mul", ("junk", "x"))}), "x")
    assert t.states == ("x",)


def test_products_tree_has_five_subtrees():
    sys, _ = flatten(PRODUCTS, MUL)
    t = RationalTree(sys, "x1")
    # independent count: classes of pairwise-bisimilar states reachable from x1
    states = [RationalTree(sys, x) for x in t.states]
    classes = []
    for s in states:
        if not any(bisimilar(s, c) for c in classes):
            classes.append(s)
    internal = [c for c in classes if isinstance(c.system[c.root], Op)]
    assert len(classes) == 5 and len(internal) == 3
    assert subtree_count(t) == 5
    assert sum(isinstance(r, Op) for r in minimize(t).system.rhs.values()) == 3


def test_solve_free_is_a_solution():
    e = FlatSystem(MUL, {"x": Op("mul", ("y", "x")), "y": Param("a")})
    s = solve_free(e)
    assert s["x"] == apply_layer("mul", [s["y"], s["x"]])
    assert s["y"] == eta("a", MUL)


def test_solve_in_R_with_tree_parameters():
    e = FlatSystem(MUL, {"x": Op("mul", ("p", "x")), "p": Param(IDEM)})
    s = solve_in_R(e)
    assert s["p"] == IDEM
    assert s["x"] == apply_layer("mul", [IDEM, s["x"]])


def test_substitute_unit_laws():
    t = COMB
    assert substitute(eta(t, MUL)) == t
    lifted = RationalTree(FlatSystem(MUL, [(x, Param(eta(r.value)) if isinstance(r, Param) else r)
                                           for x, r in t.system.items()]), t.root)
    assert substitute(lifted) == t


def test_apply_layer_arity_checked():
    from elgot.errors import ArityMismatch

    with pytest.raises(ArityMismatch):
        apply_layer("mul", [eta("a")], MUL)


def test_trees_are_immutable():
    with pytest.raises(AttributeError):
        COMB.root = "y"


SIG = Signature({"mul": 2, "s": 1})


def _random_tree(seed):
    rng = random.Random(seed)
    sys = random_system(rng, SIG, lambda r: r.choice("ab"), rng.randint(1, 5))
    return RationalTree(sys, rng.choice(sys.vars))


@settings(max_examples=200)
@given(st.integers(0, 10**9), st.integers(0, 10**9))
def test_bisimilar_iff_equal_bounded_unfoldings(i, j):
    s, t = _random_tree(i), _random_tree(j)
    bound = len(s.states) * len(t.states)
    assert bisimilar(s, t) == (unfold(s, bound) == unfold(t, bound))
    assert bisimilar(s, t) == (s == t)


@settings(max_examples=200)
@given(st.integers(0, 10**9))
def test_minimize_is_idempotent_and_equivalent(i):
    t = _random_tree(i)
    m = minimize(t)
    assert bisimilar(m, t)
    assert minimize(m).system == m.system
    assert len(m.states) <= len(t.states)
    assert set(m.leaves()) == set(t.leaves())
