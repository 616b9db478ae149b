import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ainfty.ainfcore import (
    CurvedCategory,
    apply_m,
    check_ainf_relations,
    rename,
    structurally_equal,
)
from ainfty.basedmod import QQ, Element, Field, Generator, filtration_level
from ainfty.deform import (
    CurvedModule,
    MCAssignment,
    build_gauge_functors,
    check_mc,
    cyclic_residual,
    deform_bimodule,
    deform_ops,
    deform_raw,
    solve_mc_from_cyclic,
)
from ainfty.errors import CurvedRelationError, PreconditionError, SolveError
from ainfty.functor import CurvedFunctor, check_functor_equation, compose, functors_equal, identity_functor
from ainfty.randgen import planted_cyclic_module, random_instance, strict_category
from ainfty.worked import build_fiber_category


@pytest.fixture(scope="module")
def fiber():
    return build_fiber_category()


def _assignment(seed, n_obj=None, field=QQ):
    inst, _, rng = random_instance(seed, n_obj=n_obj, field=field)
    return inst.cat, MCAssignment({X: inst.mc(rng, X) for X in inst.cat.objects})


def test_zero_is_mc_without_curvature(fiber):
    cat, _ = fiber
    assert check_mc(cat, "L", cat.zero()) == 0


def test_worked_b_is_mc(fiber):
    cat, B = fiber
    assert check_mc(cat, "L", B["L"]) == 0
    # no composable pair among {y23, z21}: m2(b, b) vanishes entry by entry
    for a in ("y23", "z21"):
        for c in ("y23", "z21"):
            assert cat.entry((a, c)) is None


def test_degree_precondition(fiber):
    cat, _ = fiber
    with pytest.raises(PreconditionError, match="degree 1"):
        check_mc(cat, "L", cat.element("x2"))


def test_filtration_precondition(fiber):
    cat, _ = fiber
    deg1_low = [g for g in cat.generators.values() if g.degree == 1 and g.filtration <= 0]
    with pytest.raises(PreconditionError, match="F\\^>0"):
        check_mc(cat, "L", Element.of(deg1_low[0]))


def flat_category(seed, n_obj=2):
    cat, _, _ = strict_category(n_obj, rng=random.Random(seed), curved=False)
    return cat


def test_zero_assignment_keeps_tables(fiber):
    for cat in (fiber[0], flat_category(11)):
        out = deform_ops(cat, MCAssignment({X: cat.zero() for X in cat.objects}))
        assert structurally_equal(out, cat, ignore_name=True)


def test_fiber_degree_one_part_is_mc(fiber):
    """Every degree-1 generator leaves L2, so no two of them compose."""
    cat, _ = fiber
    ones = [g for g in cat.generators.values() if g.degree == 1 and g.filtration > 0]
    assert check_mc(cat, "L", Element(QQ, {g: 1 for g in ones})) == 0


def test_objects_without_b_dropped():
    cat, B = _assignment(4, n_obj=2)
    out = deform_ops(cat, MCAssignment({"X0": B["X0"]}))
    assert sorted(out.objects) == ["X0"]


def _spoiled(seed):
    cat, B = _assignment(seed, n_obj=1)
    b = B["X0"]
    bad = b + cat.element({sorted(g.id for g in b.terms)[0]: 1})
    return cat, bad


def test_unverified_assignment_rejected():
    cat, bad = _spoiled(8)
    assert check_mc(cat, "X0", bad) != 0
    with pytest.raises(PreconditionError, match="not Maurer-Cartan"):
        deform_ops(cat, MCAssignment({"X0": bad}))


def test_worked_deformed_values(fiber):
    cat, B = fiber
    d = deform_ops(cat, B)
    assert apply_m(d, 1, [d.element("x1")]) == d.element("-y21")
    assert apply_m(d, 1, [d.element("y13")]) == d.element("-y23")


def test_worked_deformed_consistent(fiber):
    cat, B = fiber
    d = deform_ops(cat, B)
    assert not d.curvature
    rep = check_ainf_relations(d, 4)
    assert rep.passed


@settings(max_examples=10)
@given(st.integers(0, 10_000), st.sampled_from([0, 5, 7]))
def test_deformation_is_flat(seed, p):
    cat, B = _assignment(seed, field=Field(p))
    d = deform_ops(cat, B)
    assert all(not c for c in d.curvature.values())
    assert check_ainf_relations(d).passed


@settings(max_examples=6)
@given(st.integers(0, 10_000))
def test_deformation_natural_in_names(seed):
    cat, B = _assignment(seed, n_obj=1)
    mapping = {g: "n" + g for g in cat.generators}
    rc = rename(cat, mapping)
    RB = MCAssignment({X: rc.element({mapping[g.id]: c for g, c in b.terms.items()}) for X, b in B.items()})
    assert structurally_equal(rename(deform_ops(cat, B), mapping), deform_ops(rc, RB), ignore_name=True)


def test_gauge_on_worked_example(fiber):
    cat, B = fiber
    T, S = build_gauge_functors(cat, B)
    ST, TS = compose(S, T), compose(T, S)
    assert ST.f0("L") == 0
    assert functors_equal(ST, identity_functor(T.source))
    assert functors_equal(TS, identity_functor(T.target))
    assert check_functor_equation(T, 3).passed


def test_gauge_zero_is_identity():
    cat = flat_category(2)
    T, S = build_gauge_functors(cat, MCAssignment({X: cat.zero() for X in cat.objects}))
    assert functors_equal(T, identity_functor(cat))
    assert functors_equal(S, identity_functor(cat))


def test_gauge_zeroth_relation_is_mc_equation():
    """T with zeroth term b out of a flat source: the arity-0 residual is the MC residual of b."""
    cat, bad = _spoiled(8)
    X = "X0"
    res = check_mc(cat, X, bad)
    assert res != 0
    d = deform_raw(cat, {X: bad})
    flat = CurvedCategory("flat", d.field, d.objects, d.generators.values(), d.ops, arity_cap=d.arity_cap)
    T = CurvedFunctor("T", flat, cat, {X: X}, identity_functor(cat).terms, {X: bad})
    zero_tuple = [v for v in check_functor_equation(T, 2).violations if v.inputs == ()]
    assert len(zero_tuple) == 1
    assert zero_tuple[0].residual == res


@settings(max_examples=8)
@given(st.integers(0, 10_000))
def test_gauge_inverse_random(seed):
    cat, B = _assignment(seed)
    T, S = build_gauge_functors(cat, B)
    assert functors_equal(compose(S, T), identity_functor(T.source))
    assert functors_equal(compose(T, S), identity_functor(T.target))


# ---- bimodules -------------------------------------------------------------

def test_bimodule_trivial_insertion():
    cat, B = _assignment(21, n_obj=2)
    cat = deform_ops(cat, B)
    mod = CurvedModule("M", cat, "X0", "X1")
    zero = cat.zero()
    cx = deform_bimodule(mod, zero, zero)
    for g in mod.basis:
        want = cat.entry((g.id,))
        got = cx.d.get(g.id, {})
        assert got == ({} if want is None else {h.id: c for h, c in want.terms.items()})


@settings(max_examples=8)
@given(st.integers(0, 10_000))
def test_bimodule_square_zero(seed):
    cat, B = _assignment(seed, n_obj=2)
    mod = CurvedModule("M", cat, "X0", "X1")
    cx = deform_bimodule(mod, B["X1"], B["X0"])
    for x in cx.degree:
        assert cx.apply(cx.apply({x: 1})) == {}


def test_bimodule_inconsistent_input():
    x = Generator("x", "P", "Q", 0, 0)
    b0 = Generator("b0", "Q", "Q", 1, 1)
    cat = CurvedCategory("bad", QQ, ["P", "Q"], [x, b0], {2: {("b0", "x"): Element.of(x)}})
    mod = CurvedModule("M", cat, "P", "Q")
    with pytest.raises(CurvedRelationError) as err:
        deform_bimodule(mod, Element.of(b0), cat.zero())
    assert "b0" in str(err.value)


def test_bimodule_needs_mc():
    cat, B = _assignment(3, n_obj=2)
    mod = CurvedModule("M", cat, "X0", "X1")
    with pytest.raises(PreconditionError):
        deform_bimodule(mod, B["X1"] + B["X1"], B["X0"])


# ---- cyclic solver -----------------------------------------------------------------

def one_step_module(c=1, curved=True):
    e = Generator("e", "P", "Q", 0, 0)
    v = Generator("v", "Q", "Q", 1, 1)
    w = Generator("w", "P", "Q", 1, 1)
    ops = {2: {("v", "e"): Element.of(w)}}
    if curved:
        ops[1] = {("e",): Element.of(w, -c)}
    cat = CurvedCategory("one", QQ, ["P", "Q"], [e, v, w], ops)
    return CurvedModule("M", cat, "P", "Q"), Element.of(e), Element.of(v)


def test_cyclic_already_solved():
    mod, e, _ = one_step_module(curved=False)
    assert solve_mc_from_cyclic(mod, e) == 0


def test_cyclic_one_step():
    mod, e, v = one_step_module(Fraction(3, 2))
    b = solve_mc_from_cyclic(mod, e)
    assert b == v.scale(Fraction(3, 2))
    assert cyclic_residual(mod, b, e) == 0


def test_cyclic_singular_leading_map():
    e = Generator("e", "P", "Q", 0, 0)
    v = Generator("v", "Q", "Q", 1, 1)
    w = Generator("w", "P", "Q", 1, 1)
    cat = CurvedCategory("sing", QQ, ["P", "Q"], [e, v, w], {1: {("e",): Element.of(w)}})
    with pytest.raises(SolveError) as err:
        solve_mc_from_cyclic(CurvedModule("M", cat, "P", "Q"), Element.of(e))
    assert err.value.level == 1


@settings(max_examples=8)
@given(st.integers(0, 10_000))
def test_planted_round_trip(seed):
    mod, e, b_star = planted_cyclic_module(seed)
    b = solve_mc_from_cyclic(mod, e)
    assert b == b_star
    assert filtration_level(b) > 0 or b == 0
    assert cyclic_residual(mod, b, e) == 0


def test_planted_over_prime_field():
    mod, e, b_star = planted_cyclic_module(17, Field(11))
    assert solve_mc_from_cyclic(mod, e) == b_star


def test_mc_assignment_container():
    B = MCAssignment({"b": 1, "a": 2}, "C")
    assert list(B) == ["a", "b"] and "a" in B and B.objects() == ["a", "b"]
