import io
import json
import subprocess
import sys

import pytest

from elgot.cli import run

from .conftest import DEMO_DATA, MALFORMED


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    status = run([str(a) for a in argv], out, err)
    return status, out.getvalue(), err.getvalue()


def test_solve_idempotent_in_lattice():
    status, out, _ = call("solve", "--system", DEMO_DATA / "idem.eq", "--algebra", DEMO_DATA / "lattice.alg")
    assert (status, out) == (0, "x = bot\n")


def test_solve_json_keys_sorted():
    status, out, _ = call(
        "solve", "--system", DEMO_DATA / "ones.eq", "--algebra", DEMO_DATA / "mod3.alg", "--format", "json"
    )
    assert status == 0
    data = json.loads(out)
    assert data == {"algebra": "unary", "solution": {"w": "a1", "x": "a3", "y": "a3", "z": "a2"}}
    assert out == json.dumps(data, sort_keys=True, indent=2) + "\n"


def test_text_output_in_declaration_order():
    _, out, _ = call("solve", "--system", DEMO_DATA / "ones.eq", "--algebra", DEMO_DATA / "mod3.alg")
    assert [line.split(" = ")[0] for line in out.splitlines()] == ["x", "y", "z", "w"]


def test_unfold_comb():
    status, out, _ = call("unfold", "--tree", DEMO_DATA / "comb.rt", "--depth", 3)
    assert (status, out) == (0, "(mul a (mul b (mul a ^)))\n")


def test_minimize_comb():
    status, out, _ = call("minimize", "--tree", DEMO_DATA / "comb.rt", "--format", "json")
    assert status == 0 and json.loads(out)["states"] == 4


def test_flatten_products():
    status, out, _ = call("flatten", "--terms", DEMO_DATA / "products.terms")
    assert status == 0
    assert out.splitlines()[1:3] == ["var x1 = mul($1, $2)", "var x2 = mul(x1, $4)"]


def test_stream_avg4():
    status, out, _ = call(
        "stream", "--cycle", "1/2,1", "--op", "avg4", "--algebra", DEMO_DATA / "avg4.alg", "--format", "json"
    )
    data = json.loads(out)
    assert status == 0
    assert abs(data["solution"]["x0"] - (4 * 0.5 + 1) / 15) < 1e-9
    assert data["iterations"] <= 40


def test_laws_summary_and_exit_status():
    status, out, _ = call(
        "laws", "--algebra", DEMO_DATA / "lattice.alg", "--suite", "all", "--trials", 500, "--seed", 7
    )
    assert status == 0
    assert out.splitlines()[-1] == "0 failures"


def test_laws_json_has_seeds():
    status, out, _ = call("laws", "--algebra", DEMO_DATA / "chain.alg", "--trials", 5, "--format", "json")
    data = json.loads(out)
    assert status == 0 and data["seed"] == 1729 and data["failures"] == 0
    assert [r["law"] for r in data["reports"]] == ["solution", "functoriality", "compositionality"]
    assert all(r["seed"] == 1729 for r in data["reports"])


def test_check_em():
    status, out, _ = call("check-em", "--algebra", DEMO_DATA / "lattice.alg", "--trials", 50, "--format", "json")
    data = json.loads(out)
    assert status == 0
    assert [r["law"] for r in data["reports"]] == ["unit", "multiplication"]
    status, _, err = call("check-em", "--algebra", DEMO_DATA / "avg4.alg")
    assert status == 2 and "finite carrier" in err


def test_solver_error_exits_1():
    status, out, err = call(
        "solve", "--system", MALFORMED / "cyclic.eq", "--algebra", MALFORMED / "cyclic_unary.alg"
    )
    assert (status, out) == (1, "")
    assert "fixed point" in err


def test_laws_solver_error_exits_1():
    status, _, err = call("laws", "--algebra", MALFORMED / "cyclic_unary.alg", "--trials", 50)
    assert status == 1 and "fixed point" in err


@pytest.mark.parametrize(
    "name", ["unknown_op.eq", "arity_clash.eq", "unknown_var.eq", "bare_var.eq", "not_flat.eq", "bad_param.eq"]
)
def test_malformed_system_exits_2_with_location(name):
    path = MALFORMED / name
    status, out, err = call("solve", "--system", path, "--algebra", DEMO_DATA / "lattice.alg")
    assert status == 2 and out == ""
    assert err.startswith(f"elgot: {path}:")


@pytest.mark.parametrize("name", ["non_total.alg", "not_in_carrier.alg", "non_monotone.alg", "unknown_kind.alg"])
def test_malformed_algebra_exits_2(name):
    status, _, err = call("laws", "--algebra", MALFORMED / name)
    assert status == 2 and str(MALFORMED / name) in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["unfold", "--tree", DEMO_DATA / "comb.rt", "--depth", "-1"],
        ["laws", "--algebra", DEMO_DATA / "lattice.alg", "--trials", "0"],
        ["laws", "--algebra", DEMO_DATA / "lattice.alg", "--suite", "nonsense"],
        ["solve", "--system", "missing.eq", "--algebra", DEMO_DATA / "lattice.alg"],
        ["stream", "--cycle", "", "--op", "avg4", "--algebra", DEMO_DATA / "avg4.alg"],
        ["stream", "--cycle", "2", "--op", "avg4", "--algebra", DEMO_DATA / "avg4.alg"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert call(*argv)[0] == 2


def test_help_prints_grammar():
    proc = subprocess.run([sys.executable, "-m", "elgot", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sig NAME ARITY" in proc.stdout and "table NAME(A1,...,An) = B" in proc.stdout
    assert "check-em" in proc.stdout and "JSON output" in proc.stdout
