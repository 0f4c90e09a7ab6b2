"""
Evaluating trees
================

Solving systems in an algebra is the same thing as evaluating rational trees
over its carrier.  Evaluation must respect single leaves and flattening of
trees of trees.
"""

import random
from functools import reduce
from pathlib import Path

from elgot.em import EMAlgebra, check_em_laws, elgot_to_em, em_to_elgot, random_nested_tree
from elgot.formats import parse_algebra, read_text
from elgot.rational import minimize, substitute, to_sexpr, unfold

DATA = Path(__file__).parent / "data"
lattice = parse_algebra(read_text(DATA / "lattice.alg"))
em = elgot_to_em(lattice)

nested = random_nested_tree(random.Random(3), lattice.sig, lattice.carrier)
print(to_sexpr(unfold(substitute(nested), 3)), "->", em(substitute(nested)))

unit, mult = check_em_laws(em, 300, 7)
print(unit["law"], len(unit["failures"]), mult["law"], len(mult["failures"]))

# and back: operations and solutions recovered from the evaluation
back = em_to_elgot(em)
print(back.apply("mul", ("a", "b")), lattice.apply("mul", ("a", "b")))

# flip one cell of the join table: no longer commutative, and regrouping the
# leaves by flattening exposes it
joins = dict(lattice.base.joins)
joins["a", "b"] = "a"
bad = EMAlgebra(lattice.sig, lattice.carrier, lambda t: reduce(lambda x, y: joins[x, y], minimize(t).leaves(), "bot"))
_, mult = check_em_laws(bad, 300, 7)
print(len(mult["failures"]), "failures; first:", mult["failures"][0])
