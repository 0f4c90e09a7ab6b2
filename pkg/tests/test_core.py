import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elgot.core import (
    App,
    FlatSystem,
    Op,
    Param,
    Signature,
    Var,
    ensure_valid,
    expand,
    flatten,
    inl,
    inr,
    is_equation_morphism,
    pair,
    rename_params,
    validate,
)
from elgot.errors import (
    ArityMismatch,
    DuplicateVar,
    MissingParamImage,
    SignatureMismatch,
    UnguardedVar,
    UnknownOp,
    UnknownVar,
    VarClash,
)
from elgot.laws import random_system

from .conftest import MUL


def test_signature_order_and_equality():
    s = Signature({"mul": 2, "c": 0})
    assert list(s) == ["mul", "c"]
    assert s == Signature({"c": 0, "mul": 2})
    assert hash(s) == hash(Signature({"c": 0, "mul": 2}))
    assert s.union(Signature({"s": 1})) == Signature({"mul": 2, "c": 0, "s": 1})
    with pytest.raises(SignatureMismatch):
        s.union(Signature({"mul": 1}))


@pytest.mark.parametrize(
    "eqs, err",
    [
        ([("x", Op("mul", ("x", "y")))], UnknownVar),
        ([("x", Op("add", ("x", "x")))], UnknownOp),
        ([("x", Op("mul", ("x",)))], ArityMismatch),
        ([("x", Param("a")), ("x", Param("b"))], DuplicateVar),
    ],
)
def test_validate_reports_each_violation(eqs, err):
    sys = FlatSystem(MUL, eqs)
    problems = validate(sys)
    assert problems and isinstance(problems[0], err)
    assert problems[0].var == "x"
    with pytest.raises(err):
        ensure_valid(sys)


def test_valid_system_has_no_problems():
    sys = FlatSystem(MUL, {"x": Op("mul", ("x", "y")), "y": Param("a")})
    assert validate(sys) == []
    assert sys.params() == ["a"]


def test_rename_params_keeps_variables():
    e = FlatSystem(MUL, {"x": Op("mul", ("y", "y")), "y": Param("a")})
    f = rename_params({"a": "b"}, e)
    assert f["x"] == e["x"] and f["y"] == Param("b")
    assert rename_params(str.upper, e)["y"] == Param("A")
    with pytest.raises(MissingParamImage):
        rename_params({}, e)


def test_pair_substitutes_parameter_equations():
    # e has parameters in f's variables; a parameter equation of e becomes f's equation
    f = FlatSystem(MUL, {"y": Op("mul", ("y", "z")), "z": Param("a")})
    e = FlatSystem(MUL, {"x": Op("mul", ("x", "w")), "w": Param("y")})
    p = pair(f, e)
    assert p.vars == (inl("x"), inl("w"), inr("y"), inr("z"))
    assert p[inl("x")] == Op("mul", (inl("x"), inl("w")))
    assert p[inl("w")] == Op("mul", (inr("y"), inr("z")))
    assert p[inr("z")] == Param("a")
    ensure_valid(p)


def test_pair_untagged_needs_disjoint_variables():
    f = FlatSystem(MUL, {"y": Param("a")})
    e = FlatSystem(MUL, {"x": Param("y")})
    assert pair(f, e, tag=False).vars == ("x", "y")
    with pytest.raises(VarClash):
        pair(f, FlatSystem(MUL, {"y": Param("y")}), tag=False)


def test_equation_morphism():
    f = FlatSystem(MUL, {"y": Op("mul", ("y", "y"))})
    e = FlatSystem(MUL, {"x1": Op("mul", ("x2", "x1")), "x2": Op("mul", ("x1", "x1"))})
    assert is_equation_morphism({"x1": "y", "x2": "y"}, e, f)
    g = FlatSystem(MUL, {"y": Op("mul", ("y", "z")), "z": Param("a")})
    assert not is_equation_morphism({"x1": "y", "x2": "y"}, e, g)


PRODUCTS = {
    "x1": App("mul", (App("mul", (Var("x2"), Param("a"))), Param("b"))),
    "x2": App("mul", (Var("x1"), Param("b"))),
}


def test_flatten_products_example():
    sys, emb = flatten(PRODUCTS, MUL)
    assert emb == {"x1": "x1", "x2": "x2"}
    # one auxiliary per non-variable sub-term occurrence: 4 of them
    assert sys.vars == ("x1", "x2", "$1", "$2", "$3", "$4")
    assert sys["x1"] == Op("mul", ("$1", "$2"))
    assert sys["$1"] == Op("mul", ("x2", "$3"))
    assert sys["$3"] == Param("a")
    assert sys["x2"] == Op("mul", ("x1", "$4"))
    assert sys["$2"] == sys["$4"] == Param("b")
    for x, t in PRODUCTS.items():
        assert expand(sys, x, keep=PRODUCTS) == t


def test_flatten_skips_taken_fresh_names_and_rejects_bare_vars():
    sys, _ = flatten({"$1": App("mul", (Param("a"), Var("$1")))}, MUL)
    assert "$2" in sys and sys["$1"] == Op("mul", ("$2", "$1"))
    with pytest.raises(UnguardedVar):
        flatten({"x": Var("y"), "y": Param("a")}, MUL)


SIG2 = Signature({"mul": 2, "s": 1, "c": 0})


def terms(depth):
    leaf = st.one_of(st.builds(Param, st.sampled_from("ab")), st.builds(Var, st.sampled_from(["x", "y"])))
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.builds(lambda a, b: App("mul", (a, b)), sub, sub),
            st.builds(lambda a: App("s", (a,)), sub),
            st.just(App("c", ())),
        ),
        max_leaves=depth,
    )


guarded = terms(8).filter(lambda t: not isinstance(t, Var))


@given(guarded, guarded)
def test_flatten_validates_and_expands_back(tx, ty):
    nonflat = {"x": tx, "y": ty}
    sys, _ = flatten(nonflat, SIG2)
    assert validate(sys) == []
    assert sys.vars[:2] == ("x", "y")
    for x, t in nonflat.items():
        assert expand(sys, x, keep=nonflat) == t


@settings(max_examples=50)
@given(st.integers(0, 10**6), st.integers(1, 6), st.integers(1, 6))
def test_pair_of_valid_systems_is_valid(seed, n, m):
    import random

    rng = random.Random(seed)
    f = random_system(rng, SIG2, lambda r: r.choice("ab"), n, prefix="y")
    e = random_system(rng, SIG2, lambda r: r.choice(f.vars), m)
    p = pair(f, e)
    assert validate(p) == []
    assert len(p) == len(e) + len(f)
    assert all(isinstance(r, Param) and r.value in "ab" for r in p.rhs.values() if isinstance(r, Param))
