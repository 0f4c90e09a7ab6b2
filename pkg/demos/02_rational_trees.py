"""
Rational trees
==============

A pointed flat system denotes an infinite tree with finitely many distinct
subtrees.  Equality is equality of the unfolded trees.
"""

from pathlib import Path

from elgot.core import FlatSystem, Op
from elgot.formats import parse_tree, read_text
from elgot.rational import RationalTree, bisimilar, minimize, subtree_count, to_sexpr, unfold

DATA = Path(__file__).parent / "data"

comb = parse_tree(read_text(DATA / "comb.rt"))
for depth in range(4):
    print(depth, to_sexpr(unfold(comb, depth)))

print("distinct subtrees:", subtree_count(comb))
print(minimize(comb).system)

# x = x*x written with one variable or with two
one = RationalTree(FlatSystem({"mul": 2}, {"x": Op("mul", ("x", "x"))}), "x")
two = RationalTree(FlatSystem({"mul": 2}, {"x": Op("mul", ("y", "x")), "y": Op("mul", ("x", "y"))}), "x")
print(bisimilar(one, two), one == two, len(minimize(two).states))
