import random

from hypothesis import given, settings, strategies as st

from ainfty.ainfcore import check_ainf_relations, check_grading_filtration
from ainfty.basedmod import Field, filtration_level
from ainfty.deform import check_mc
from ainfty.randgen import random_chain_map, random_complex, random_instance, strict_category

from oracles import brute_relation, composable_tuples


def test_strict_category_is_flat_and_associative():
    cat, _, alpha = strict_category(2, rng=random.Random(1), curved=False)
    assert not cat.curvature and set(alpha.values()) == {0}
    assert check_ainf_relations(cat, 3).passed
    assert check_grading_filtration(cat).passed


def test_curved_strict_category():
    cat, _, alpha = strict_category(1, rng=random.Random(2))
    X = "X0"
    assert cat.curv(X) and alpha[X]
    assert check_mc(cat, X, cat.zero()) == cat.curv(X)
    assert check_ainf_relations(cat, 3).passed


@settings(max_examples=10)
@given(st.integers(0, 10_000), st.sampled_from([0, 5, 7]))
def test_instances_are_sound(seed, p):
    fld = Field(p) if p else Field()
    inst, maps, rng = random_instance(seed, field=fld, transports=1)
    cat = inst.cat
    assert check_ainf_relations(cat, 4).passed
    assert check_grading_filtration(cat).passed
    for X in cat.objects:
        b = inst.mc(rng, X)
        assert check_mc(cat, X, b) == 0
        assert not b or filtration_level(b) > 0


def test_checker_agrees_with_brute_force_on_instance():
    inst, _, _ = random_instance(11, n_obj=1, transports=1)
    cat = inst.cat
    for n in range(0, 3):
        for key in composable_tuples(cat, n):
            res = brute_relation(cat, key)
            assert res is not None and not res, key


def test_same_seed_same_instance():
    a, _, _ = random_instance(42)
    b, _, _ = random_instance(42)
    assert a.cat.ops == b.cat.ops and a.cat.curvature == b.cat.curvature


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_random_complex_and_map(seed):
    rng = random.Random(seed)
    A, B = random_complex(rng, name="A"), random_complex(rng, name="B")
    for C in (A, B):
        for g in C.degree:
            assert not C.apply(C.apply({g: 1}))
    f = random_chain_map(rng, A, B)
    for g in A.degree:
        assert f.apply(A.apply({g: 1})) == B.apply(f.apply({g: 1}))
