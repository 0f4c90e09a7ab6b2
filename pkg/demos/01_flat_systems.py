"""
Flat systems and flattening
===========================

Nested recursive definitions are turned into flat ones, where every equation
applies one operation to variables or names a parameter.
"""

from pathlib import Path

from elgot.core import FlatSystem, Op, Param, flatten, pair, rename_params
from elgot.formats import format_system, parse_terms, read_text

DATA = Path(__file__).parent / "data"

# two mutually recursive products, written with nested terms
doc = parse_terms(read_text(DATA / "products.terms"))

flat, _ = flatten(doc.terms, doc.sig)
print(format_system(flat))

# renaming parameters leaves the variables alone
print(rename_params({"a": "p", "b": "q"}, flat))

# pair: solve f first, then plug its variables into e as parameters
f = FlatSystem({"mul": 2}, {"y": Op("mul", ("y", "z")), "z": Param("a")})
e = FlatSystem({"mul": 2}, {"x": Op("mul", ("x", "w")), "w": Param("y")})
print(pair(f, e))
