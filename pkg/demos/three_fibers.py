#!/usr/bin/env python3
"""Walk through the three-fiber example: deform by b, look at the new differential, find u and v."""
from ainfty.ainfcore import apply_m
from ainfty.chain import class_nonzero, cohomology_degree, complex_from_category
from ainfty.deform import check_mc, deform_ops
from ainfty.worked import ExampleConfig, build_fiber_category

cfg = ExampleConfig(N=4)
cat, B = build_fiber_category(cfg)
b = B["L"]
print(f"window A >= -{cfg.N}: {len(cat.generators)} chords")
print(f"b = {b}, MC residual = {check_mc(cat, 'L', b)}")

D = deform_ops(cat, B)
for x in ("x1", "x2", "x3", "y12", "y13", "y31", "y32"):
    print(f"  m1b({x}) = {apply_m(D, 1, [D.element(x)])}")

u = D.element("x1 + x3 - x2")
v = D.element("x1^-1 + x3^-1 - x2^-1")
C = complex_from_category(D, "L", "L")
vec = lambda e: {g.id: c for g, c in e.terms.items()}
print(f"m1b(u) = {apply_m(D, 1, [u])}, m1b(v) = {apply_m(D, 1, [v])}")
print(f"[u] nonzero: {class_nonzero(C, vec(u))}, [v] nonzero: {class_nonzero(C, vec(v))}")
print(f"m2(u, v) = {apply_m(D, 2, [u, v])}")

# the window rank grows by two per step; the edge of the window contributes the extra classes
print(f"rank H^0 of the window: {cohomology_degree(C, 0).rank}")
