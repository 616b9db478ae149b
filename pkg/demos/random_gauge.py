#!/usr/bin/env python3
"""Random filtered curved category: MC elements, gauge functors, pushforward, and a cyclic solve."""
import sys

from ainfty.deform import MCAssignment, build_gauge_functors, check_mc, cyclic_residual, solve_mc_from_cyclic
from ainfty.functor import compose, functors_equal, identity_functor, pushforward_mc
from ainfty.randgen import planted_cyclic_module, random_instance

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 5

inst, maps, rng = random_instance(seed, transports=2)
A = inst.cat
print(f"seed {seed}: {len(A.objects)} object(s), {len(A.generators)} generators, arity cap {A.arity_cap}")
print(f"curvature: {', '.join(f'{X}: {A.curv(X)}' for X in A.objects)}")

X = sorted(A.objects)[0]
b = inst.mc(rng, X)
print(f"b = {b}")
print(f"residual of b: {check_mc(A, X, b)}   residual of 0: {check_mc(A, X, A.zero())}")

T, S = build_gauge_functors(A, MCAssignment({Y: inst.mc(rng, Y) for Y in A.objects}))
print("S o T = id:", functors_equal(compose(S, T), identity_functor(T.source)))
print("T o S = id:", functors_equal(compose(T, S), identity_functor(T.target)))

(Phi1, _), (Phi2, _) = maps
pb = pushforward_mc(Phi2, X, b)
print(f"Phi2_* b = {pb}")
print("(Phi1 o Phi2)_* b == Phi1_*(Phi2_* b):",
      pushforward_mc(compose(Phi1, Phi2), X, b) == pushforward_mc(Phi1, X, pb))

mod, e, planted = planted_cyclic_module(seed)
found = solve_mc_from_cyclic(mod, e)
print(f"cyclic solve on {mod.name}: recovered planted b: {found == planted}, residual {cyclic_residual(mod, found, e)}")
