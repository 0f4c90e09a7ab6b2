"""
One system, several algebras
============================

The same kind of equation gets its solution from whatever the algebra
chooses: a fixed point for cycles, the least solution, the unique solution
of a contraction, or the join of the leaves.
"""

from pathlib import Path

from elgot.algebra import build_stream_system
from elgot.formats import bind_params, format_solution, parse_algebra, parse_system, read_text

DATA = Path(__file__).parent / "data"


def load(name):
    return parse_algebra(read_text(DATA / name), name)


lattice = load("lattice.alg")
idem = parse_system(read_text(DATA / "idem.eq"))
print(format_solution(idem.system, lattice.dagger(bind_params(idem, lattice)), lattice))

# successor modulo 3: variables on a cycle get the chosen fixed point
mod3 = load("mod3.alg")
ones = parse_system(read_text(DATA / "ones.eq"))
print(format_solution(ones.system, mod3.dagger(bind_params(ones, mod3)), mod3))

# least solutions on a chain, with the number of approximation steps
chain = load("chain.alg")
e = bind_params(parse_system("sig max 2\nsig up 1\nvar x = max(x, y)\nvar y = up(z)\nvar z = param lo\n"), chain)
it = chain.iterate(e)
print(it.solution, "after", it.steps, "steps")

# averaging along a periodic stream: x0 = (4a + b) / 15 for the cycle a, b
avg = load("avg4.alg")
for a, b in [(0.0, 1.0), (0.5, 0.5), (0.3, 0.9)]:
    it = avg.iterate(build_stream_system([], [a, b], "avg4"))
    print(a, b, it.solution["x0"], (4 * a + b) / 15, it.steps)
