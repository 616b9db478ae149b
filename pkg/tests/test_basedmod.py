from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ainfty.basedmod import (
    PLUS_INF,
    QQ,
    Element,
    Field,
    Generator,
    filtration_level,
    format_combo,
    linear_combine,
    parse_rational,
)
from ainfty.errors import HomMismatchError, ValidationError

G1 = Generator("g1", "X", "Y", 0, Fraction(1, 2))
G2 = Generator("g2", "X", "Y", 0, -1)
H = Generator("h", "Y", "Y", 1, 3)
POOL = [Generator(f"a{i}", "X", "Y", i % 2, Fraction(i - 3, 2)) for i in range(6)]

scalars = st.fractions(min_value=-50, max_value=50, max_denominator=12)
elements = st.dictionaries(st.sampled_from(POOL), scalars, max_size=6).map(lambda d: Element(QQ, d))


def test_zero_has_infinite_level():
    assert filtration_level(Element.zero()) is PLUS_INF
    assert PLUS_INF > 10**9
    assert PLUS_INF > Fraction(7, 2)


def test_singleton_level():
    assert filtration_level(Element.of(G1)) == Fraction(1, 2)


def test_level_is_minimum():
    e = Element.of(G1) + Element.of(G2)
    assert filtration_level(e) == -1


def test_cancellation():
    e = Element.of(G1)
    assert linear_combine([(1, e), (-1, e)]) == 0
    assert linear_combine([(1, e), (-1, e)]).terms == {}


def test_combine_adds_coefficients():
    e = Element.of(G1)
    assert linear_combine([(2, e), (3, e)]) == Element.of(G1, 5)


def test_combine_builds_u():
    gens = {n: Generator(n, "L", "L", 0, -1) for n in ("x1", "x2", "x3")}
    u = linear_combine([(1, Element.of(gens["x1"])), (1, Element.of(gens["x3"])), (-1, Element.of(gens["x2"]))])
    assert format_combo(u) == "x1 - x2 + x3"


def test_mismatched_homs_rejected():
    with pytest.raises(HomMismatchError):
        linear_combine([(1, Element.of(G1)), (1, Element.of(H))])


def test_zero_coefficients_dropped():
    e = Element(QQ, {G1: 0, G2: 3})
    assert list(e.terms) == [G2]
    assert Element.of(G1).scale(0).terms == {}


def test_homogeneity():
    assert (Element.of(G1) + Element.of(G2)).is_homogeneous()
    mixed = Element(QQ, {POOL[0]: 1, POOL[1]: 1})
    assert not mixed.is_homogeneous()
    assert mixed.degree is None


def test_rationals():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational(" -4 ") == -4
    for bad in ("1/0", "x", "1.5"):
        with pytest.raises(ValidationError):
            parse_rational(bad)


def test_prime_field():
    F7 = Field.parse("Fp 7")
    assert F7 == Field(7) == Field.parse("F7")
    assert F7(Fraction(1, 2)) == 4
    assert F7(-1) == 6
    assert F7.signed(6) == -1
    assert F7.inv(3) == 5
    with pytest.raises(ValidationError):
        F7(Fraction(1, 7))
    with pytest.raises(ValidationError):
        Field(8)
    assert Field.parse("Q") == QQ


def test_prime_field_elements():
    F5 = Field(5)
    e = Element(F5, {G1: 3}) + Element(F5, {G1: 2})
    assert e == 0
    assert format_combo(Element(F5, {G1: 4})) == "-g1"


def test_format_is_sorted():
    e = Element(QQ, {G2: Fraction(-1, 3), G1: 2})
    assert format_combo(e) == "2*g1 - 1/3*g2"
    assert format_combo(Element.zero()) == "0"


@given(elements, elements)
def test_level_of_sum(a, b):
    assert filtration_level(a + b) >= min(filtration_level(a), filtration_level(b))


@given(elements, scalars.filter(bool))
def test_level_scale_invariant(a, c):
    assert filtration_level(a.scale(c)) == filtration_level(a)


@given(elements, elements, elements)
def test_sum_canonical(a, b, c):
    """Equal sums print identically regardless of bracketing or order."""
    left = (a + b) + c
    right = c + (b + a)
    assert left == right
    assert format_combo(left) == format_combo(right)
    assert left.sorted_terms() == right.sorted_terms()


@given(elements)
def test_no_stored_zeros(a):
    assert all(v != 0 for v in (a - a.scale(Fraction(1, 2))).terms.values())
    assert (a - a).terms == {}
