"""Command-line front end.

Exit status: 0 on success, 1 when a law suite finds a counterexample or a
solver fails (no fixed point, no convergence), 2 on parse or usage errors.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from .algebra import BanachAlgebra, KleeneAlgebra, build_stream_system
from .core import flatten
from .em import check_em_laws, elgot_to_em
from .errors import ElgotError, ParseError, SolverError
from .formats import (
    GRAMMAR,
    bind_params,
    dumps,
    format_solution,
    format_system,
    format_tree,
    parse_algebra,
    parse_system,
    parse_terms,
    parse_tree,
    read_text,
    solution_json,
    variant_name,
)
from .laws import SUITES, run_suite
from .rational import minimize, to_sexpr, unfold

DEFAULT_SEED = 1729

JSON_SCHEMAS = """\
JSON output (keys sorted, two-space indent):
  solve     {"algebra": VARIANT, "solution": {VAR: VALUE}, "iterations": N?}
  stream    same as solve
  unfold    {"depth": N, "tree": SEXPR}
  minimize  {"root": "q0", "states": N, "equations": {STATE: RHS}}
  flatten   {"equations": {VAR: RHS}, "order": [VAR...], "embedding": {VAR: VAR}}
  laws      {"algebra": VARIANT, "seed": S, "trials": N, "failures": TOTAL,
             "reports": [{"law", "trials", "seed", "failures": [{"trial", "seed", ...}]}]}
  check-em  {"algebra": VARIANT, "seed": S, "trials": N, "failures": TOTAL,
             "reports": [{"law", "trials", "seed", "failures": [{"seed", "tree", "lhs", "rhs"}]}]}
Every per-trial "seed" replays that trial on its own."""


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _non_negative(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="elgot",
        description="Solve flat recursive equations in Elgot algebras and check their laws.",
        epilog=GRAMMAR + "\n\n" + JSON_SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "json"), default="text")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help):
        return sub.add_parser(
            name, help=help, parents=[fmt], epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter
        )

    s = add("solve", "solve a system file in an algebra")
    s.add_argument("--system", required=True)
    s.add_argument("--algebra", required=True)

    s = add("unfold", "print a depth-bounded prefix of a tree")
    s.add_argument("--tree", required=True)
    s.add_argument("--depth", required=True, type=_non_negative)

    s = add("minimize", "print the minimal system of a tree")
    s.add_argument("--tree", required=True)

    s = add("laws", "run randomized law suites on an algebra")
    s.add_argument("--algebra", required=True)
    s.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    s.add_argument("--trials", type=_positive, default=100)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)

    s = add("check-em", "check the unit and multiplication laws of the induced tree evaluation")
    s.add_argument("--algebra", required=True)
    s.add_argument("--trials", type=_positive, default=300)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)

    s = add("flatten", "flatten a file of nested terms")
    s.add_argument("--terms", required=True)

    s = add("stream", "solve x_n = op(a_n, x_{n+1}) along prefix . cycle^omega")
    s.add_argument("--prefix", default="", help="comma-separated elements")
    s.add_argument("--cycle", required=True, help="comma-separated elements, non-empty")
    s.add_argument("--op", required=True)
    s.add_argument("--algebra", required=True)
    return p


def _load(kind, path):
    return kind(read_text(path), path)


def _solution_output(args, system, solution, alg, iterations=None) -> str:
    if args.format == "json":
        out = {"algebra": variant_name(alg), "solution": solution_json(solution, alg)}
        if iterations is not None:
            out["iterations"] = iterations
        return dumps(out)
    text = format_solution(system, solution, alg)
    if iterations is not None:
        text += f"# {iterations} iterations\n"
    return text


def _solve_with_count(alg, system):
    if isinstance(alg, (BanachAlgebra, KleeneAlgebra)):
        it = alg.iterate(system)
        return it.solution, it.steps
    return alg.dagger(system), None


def cmd_solve(args) -> tuple[str, int]:
    alg = _load(parse_algebra, args.algebra)
    doc = _load(parse_system, args.system)
    system = bind_params(doc, alg, args.system)
    solution, steps = _solve_with_count(alg, system)
    return _solution_output(args, system, solution, alg, steps), 0


def cmd_unfold(args) -> tuple[str, int]:
    t = _load(parse_tree, args.tree)
    sexpr = to_sexpr(unfold(t, args.depth))
    if args.format == "json":
        return dumps({"depth": args.depth, "tree": sexpr}), 0
    return sexpr + "\n", 0


def cmd_minimize(args) -> tuple[str, int]:
    m = minimize(_load(parse_tree, args.tree))
    if args.format == "json":
        eqs = {x: repr(r) for x, r in m.system.items()}
        return dumps({"root": m.root, "states": len(m.system), "equations": eqs}), 0
    return format_tree(m), 0


def _laws_output(args, alg, reports) -> tuple[str, int]:
    total = sum(len(r["failures"]) for r in reports)
    if args.format == "json":
        out = {
            "algebra": variant_name(alg),
            "seed": args.seed,
            "trials": args.trials,
            "failures": total,
            "reports": reports,
        }
        return dumps(out), 1 if total else 0
    lines = [f"{r['law']}: {r['trials']} trials, {len(r['failures'])} failures (seed {r['seed']})" for r in reports]
    for r in reports:
        for f in r["failures"][:3]:
            lines.append(f"  counterexample at seed {f['seed']}: {f}")
    lines.append(f"{total} failures")
    return "\n".join(lines) + "\n", 1 if total else 0


def cmd_laws(args) -> tuple[str, int]:
    alg = _load(parse_algebra, args.algebra)
    suites = SUITES if args.suite == "all" else (args.suite,)
    reports = [run_suite(alg, s, args.trials, args.seed).as_dict() for s in suites]
    return _laws_output(args, alg, reports)


def cmd_check_em(args) -> tuple[str, int]:
    alg = _load(parse_algebra, args.algebra)
    if alg.carrier is None:
        raise UsageError("check-em needs an algebra with a finite carrier")
    reports = check_em_laws(elgot_to_em(alg), args.trials, args.seed)
    return _laws_output(args, alg, reports)


def cmd_flatten(args) -> tuple[str, int]:
    doc = _load(parse_terms, args.terms)
    system, embedding = flatten(doc.terms, doc.sig)
    if args.format == "json":
        eqs = {x: repr(r) for x, r in system.items()}
        return dumps({"equations": eqs, "order": list(system.vars), "embedding": embedding}), 0
    return format_system(system), 0


def _elements(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def cmd_stream(args) -> tuple[str, int]:
    alg = _load(parse_algebra, args.algebra)
    try:
        prefix = [alg.parse_element(t) for t in _elements(args.prefix)]
        cycle = [alg.parse_element(t) for t in _elements(args.cycle)]
    except ElgotError as exc:
        raise UsageError(str(exc)) from None
    if args.op not in alg.sig:
        raise UsageError(f"operation {args.op} is not in the algebra")
    system = build_stream_system(prefix, cycle, args.op, alg.sig)
    solution, steps = _solve_with_count(alg, system)
    return _solution_output(args, system, solution, alg, steps), 0


COMMANDS = {
    "solve": cmd_solve,
    "unfold": cmd_unfold,
    "minimize": cmd_minimize,
    "laws": cmd_laws,
    "check-em": cmd_check_em,
    "flatten": cmd_flatten,
    "stream": cmd_stream,
}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    """Run one command; returns the exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, status = COMMANDS[args.command](args)
    except SolverError as exc:
        print(f"elgot: {exc}", file=err)
        return 1
    except (ParseError, UsageError, ElgotError) as exc:
        print(f"elgot: {exc}", file=err)
        return 2
    out.write(text)
    return status


def main() -> None:
    sys.exit(run())
