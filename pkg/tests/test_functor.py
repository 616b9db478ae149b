import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ainfty.ainfcore import CurvedCategory, structurally_equal
from ainfty.basedmod import QQ, Element, Generator
from ainfty.deform import MCAssignment, build_gauge_functors, check_mc
from ainfty.errors import PreconditionError, ValidationError
from ainfty.functor import (
    CurvedFunctor,
    check_bar_identity,
    check_functor_equation,
    compose,
    deform_functor,
    functors_equal,
    identity_functor,
    pushforward_assignment,
    pushforward_mc,
    table_difference,
)
from ainfty.randgen import random_instance, strict_category
from ainfty.worked import build_fiber_category


def _setup(seed, n_obj=None, transports=2):
    inst, maps, rng = random_instance(seed, n_obj=n_obj, transports=transports)
    return inst, maps, rng


def test_identity_on_worked_example():
    cat, _ = build_fiber_category()
    assert check_functor_equation(identity_functor(cat), 3).passed


def test_non_chain_map_fails_at_arity_one():
    a = Generator("a", "X", "X", 0, 0)
    c = Generator("c", "X", "X", 1, 0)
    src = CurvedCategory("S", QQ, ["X"], [a, c], {1: {("a",): Element.of(c)}})
    tgt = CurvedCategory("T", QQ, ["X"], [a, c])
    F = CurvedFunctor("F", src, tgt, {"X": "X"}, identity_functor(tgt).terms)
    rep = check_functor_equation(F, 2)
    assert [v.inputs for v in rep.violations] == [("a",)]


def test_identity_is_neutral():
    inst, maps, _ = _setup(1)
    Phi = maps[0][0]
    assert functors_equal(compose(Phi, identity_functor(Phi.source)), Phi)
    assert functors_equal(compose(identity_functor(Phi.target), Phi), Phi)


def _scaling(cat, qdeg, alpha, c):
    """Strict endofunctor q -> alpha*q + c*q^2 on matrix units over k[t,q]/(t^3,q^3)."""
    by = {(g.source, g.target, g.id[g.id.index("t") + 1], qdeg[g.id]): g for g in cat.generators.values()}
    # (q + c q^2)^r truncated at q^2, times alpha^r
    powers = {0: {0: 1}, 1: {1: alpha, 2: alpha * c}, 2: {2: alpha * alpha}}
    table = {}
    for g in cat.generators.values():
        t = g.id[g.id.index("t") + 1]
        out = {}
        for r, v in powers[qdeg[g.id]].items():
            out[by[(g.source, g.target, t, r)]] = v
        table[(g.id,)] = Element(cat.field, out)
    return CurvedFunctor("S", cat, cat, {X: X for X in cat.objects}, {1: table})


def _matrix(F, ids):
    return [[F.table(1)[(x,)].coeff(F.source.gen(y)) for x in ids] for y in ids]


@settings(max_examples=10)
@given(st.integers(0, 1000), st.sampled_from([1, -1, 2, Fraction(1, 3)]), st.integers(-2, 2),
       st.sampled_from([1, 3, -1]), st.integers(-2, 2))
def test_strict_maps_compose_as_matrices(seed, a1, c1, a2, c2):
    cat, qdeg, _ = strict_category(1, rng=random.Random(seed), curved=False)
    F, G = _scaling(cat, qdeg, a1, c1), _scaling(cat, qdeg, a2, c2)
    assert check_functor_equation(F, 3).passed
    GF = compose(G, F)
    assert not GF.zeroth and set(GF.terms) == {1}
    ids = sorted(cat.generators)
    MF, MG, MGF = _matrix(F, ids), _matrix(G, ids), _matrix(GF, ids)
    n = len(ids)
    prod = [[sum(MG[i][k] * MF[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    assert MGF == prod


@settings(max_examples=8)
@given(st.integers(0, 10_000))
def test_composite_satisfies_equation(seed):
    inst, maps, _ = _setup(seed)
    (Phi1, Psi1), (Phi2, Psi2) = maps
    for F in (Phi1, Phi2, Psi1):
        assert check_functor_equation(F, 3).passed
    assert check_functor_equation(compose(Phi1, Phi2), 3).passed
    assert check_functor_equation(compose(Psi2, Psi1), 3).passed


def test_mismatched_composition():
    inst, maps, _ = _setup(2)
    Phi1, Phi2 = maps[0][0], maps[1][0]
    with pytest.raises(ValidationError):
        compose(Phi2, Phi1)


def test_push_along_identity():
    inst, _, rng = _setup(3, transports=1)
    X = sorted(inst.cat.objects)[0]
    b = inst.mc(rng, X)
    assert pushforward_mc(identity_functor(inst.cat), X, b) == b


def test_push_zero_gives_zeroth_term():
    inst, _, rng = _setup(4, transports=1)
    B = MCAssignment({X: inst.mc(rng, X) for X in inst.cat.objects})
    T, _ = build_gauge_functors(inst.cat, B)
    for X in T.source.objects:
        assert pushforward_mc(T, X, T.source.zero()) == B[X]


def test_push_requires_mc():
    inst, maps, rng = _setup(5, transports=1)
    Phi = maps[0][0]
    X = sorted(Phi.source.objects)[0]
    b = inst.base_mc(rng, X)
    bad = b + b
    if check_mc(Phi.source, X, bad) != 0:
        with pytest.raises(PreconditionError):
            pushforward_mc(Phi, X, bad)


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_push_is_mc_and_functorial(seed):
    inst, maps, rng = _setup(seed)
    (Phi1, Psi1), (Phi2, Psi2) = maps
    for X in sorted(inst.cat.objects):
        b = inst.mc(rng, X)  # MC on A3 = Phi2.source
        pb = pushforward_mc(Phi2, X, b)
        assert check_mc(Phi2.target, X, pb) == 0
        ppb = pushforward_mc(Phi1, X, pb)
        assert pushforward_mc(compose(Phi1, Phi2), X, b) == ppb
        assert pushforward_mc(Psi2, X, pb) == b


@settings(max_examples=6)
@given(st.integers(0, 10_000))
def test_push_through_curved_functor(seed):
    """T_B has a zeroth term; pushing c forward gives b + c, still MC."""
    inst, maps, rng = _setup(seed, transports=1)
    A = inst.cat
    B = MCAssignment({X: inst.mc(rng, X) for X in A.objects})
    T, S = build_gauge_functors(A, B)
    Phi = maps[0][0]
    G = compose(Phi, T)
    for X in sorted(T.source.objects):
        z = T.source.zero()
        assert pushforward_mc(G, X, z) == pushforward_mc(Phi, X, B[X])
        assert pushforward_mc(S, X, B[X]) == 0


def test_deform_zero_assignment():
    cat, qdeg, _ = strict_category(1, rng=random.Random(9), curved=False)
    F = _scaling(cat, qdeg, 2, 1)
    FB = deform_functor(F, MCAssignment({"X0": cat.zero()}))
    assert functors_equal(FB, F)


def test_deform_gauge_is_identity():
    inst, _, rng = _setup(6, transports=1)
    B = MCAssignment({X: inst.mc(rng, X) for X in inst.cat.objects})
    T, _ = build_gauge_functors(inst.cat, B)
    zero = MCAssignment({X: T.source.zero() for X in T.source.objects})
    TB = deform_functor(T, zero)
    assert functors_equal(TB, identity_functor(T.source))
    # the target deformed by T_* 0 = b is A(B) again
    assert structurally_equal(TB.target, T.source, ignore_name=True)


@settings(max_examples=8)
@given(st.integers(0, 10_000))
def test_deformed_functor(seed):
    inst, maps, rng = _setup(seed, transports=1)
    Phi, _ = maps[0]
    B = MCAssignment({X: inst.mc(rng, X) for X in Phi.source.objects})
    FB = deform_functor(Phi, B)
    for X in FB.source.objects:
        assert FB.f0(X) == 0
    assert not FB.source.curvature and not FB.target.curvature
    assert check_functor_equation(FB, 3).passed
    # insertion formula against S_{F_*B} o F o T_B
    T, _ = build_gauge_functors(Phi.source, B)
    _, S = build_gauge_functors(Phi.target, pushforward_assignment(Phi, B))
    other = compose(S, compose(Phi, T), arity_cap=Phi.arity_cap)
    assert table_difference(FB, other) == []


@settings(max_examples=6)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_bar_identity(seed, cap):
    inst, maps, rng = _setup(seed, transports=1)
    Phi, _ = maps[0]
    for X in sorted(Phi.source.objects):
        b = inst.mc(rng, X)
        rep = check_bar_identity(Phi, X, b, cap)
        assert rep.passed and rep.checked == cap + 1


def test_bar_identity_trivial():
    cat, qdeg, _ = strict_category(1, rng=random.Random(2), curved=False)
    F = _scaling(cat, qdeg, 1, 0)
    assert check_bar_identity(F, "X0", cat.zero(), 3).passed
