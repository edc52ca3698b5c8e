from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.errors import ExponentRangeError
from src.nodes.exponents import lattice_disagreements
from src.tools.exponent_algebra import (
    Rational,
    conjugate,
    endpoint_q,
    in_paper_range,
    in_stein_tomas_range,
    lebesgue_threshold,
    stated_q,
    young_chain,
)

exponents = st.fractions(min_value=1, max_value=50, max_denominator=60)
dimensions = st.integers(min_value=2, max_value=12)


@pytest.mark.parametrize("p, expected", [
    ("4/3", "4"),
    ("2", "2"),
    ("1", "inf"),
    ("inf", "1"),
    ("8/7", "8"),
])
def test_conjugate_values(p, expected):
    assert conjugate(p) == Rational(expected)


def test_conjugate_below_one_rejected():
    with pytest.raises(ExponentRangeError):
        conjugate("1/2")


@given(exponents)
def test_conjugate_is_an_involution(p):
    assert conjugate(conjugate(Rational(p))) == Rational(p)


@given(exponents.filter(lambda p: p > 1))
def test_conjugate_reciprocals_sum_to_one(p):
    p = Rational(p)
    assert p.reciprocal() + conjugate(p).reciprocal() == 1


def test_rational_parsing_and_printing():
    assert str(Rational("8/6")) == "4/3"
    assert str(Rational(" INF ")) == "inf"
    assert Rational("inf") > Rational(10 ** 12)
    assert Rational(3, 2) * 2 == 3
    with pytest.raises(TypeError):
        Rational.coerce(1.5)


def test_endpoint_has_zero_slacks_in_three_dimensions():
    verdict = in_paper_range(3, "4/3", 2)
    assert verdict.in_range
    assert [c.slack for c in verdict.binding_constraints] == ["0", "0"]


@given(dimensions)
def test_adopted_endpoint_is_on_the_boundary(d):
    verdict = in_paper_range(d, "4/3", endpoint_q(d))
    assert verdict.in_range
    assert all(Rational(c.slack) == 0 for c in verdict.binding_constraints)


@given(dimensions)
def test_stated_endpoint_is_out_of_range(d):
    assert not in_paper_range(d, "4/3", stated_q(d)).in_range


def test_endpoint_values():
    assert endpoint_q(3) == 2
    assert endpoint_q(2) == Rational(4, 3)
    assert stated_q(3) == 8


def test_out_of_range_pair_reports_negative_slack():
    verdict = in_paper_range(3, "4/3", 3)
    assert not verdict.in_range
    slacks = {c.name: Rational(c.slack) for c in verdict.binding_constraints}
    assert slacks["dual_exponent"] == -2


@given(exponents, exponents, st.integers(min_value=3, max_value=6))
def test_maximal_range_is_inside_stein_tomas_for_d_at_least_three(p, q, d):
    if in_paper_range(d, Rational(p), Rational(q)).in_range:
        assert in_stein_tomas_range(d, Rational(p), Rational(q)).in_range


def test_ranges_agree_on_the_lattice_only_in_three_dimensions():
    assert lattice_disagreements(3) == []
    assert lattice_disagreements(2)
    assert lattice_disagreements(4)


def test_young_chain_at_threshold():
    chain = young_chain("8/7")
    assert (chain.s, chain.s_conjugate, chain.p_conjugate) == ("4/3", "4", "8")
    assert chain.q_bound(3) == 4


def test_young_chain_beyond_threshold_rejected():
    with pytest.raises(ExponentRangeError):
        young_chain("6/5")


@given(st.fractions(min_value=1, max_value=Fraction(8, 7), max_denominator=60))
def test_young_chain_holds_below_threshold(p):
    chain = young_chain(Rational(p))
    assert Rational(chain.s) <= Rational(4, 3)
    assert 1 + Rational(chain.s).reciprocal() == 2 * Rational(p).reciprocal()


def test_lebesgue_threshold_trace():
    p, trace = lebesgue_threshold()
    assert p == Rational(8, 7)
    assert trace[0] == "s = 4/3"
    assert trace[-1] == "p = 8/7"


@pytest.mark.parametrize("p, q, slacks", [
    ("4/3", "inf", {"p_max": "0", "dual_exponent": "-inf"}),
    ("inf", "2", {"p_max": "-inf", "dual_exponent": "-3"}),
    ("inf", "inf", {"p_max": "-inf", "dual_exponent": "-inf"}),
])
def test_infinite_exponents_fall_outside_the_range(p, q, slacks):
    for verdict in (in_paper_range(3, p, q), in_stein_tomas_range(3, p, q)):
        assert not verdict.in_range
        assert {c.name: c.slack for c in verdict.binding_constraints}["dual_exponent"] == slacks["dual_exponent"]
    got = {c.name: c.slack for c in in_paper_range(3, p, q).binding_constraints}
    assert got == slacks


def test_l1_to_l_infinity_is_in_range():
    verdict = in_paper_range(3, "1", "inf")
    assert verdict.in_range
    assert [c.slack for c in verdict.binding_constraints] == ["1/3", "0"]


@pytest.mark.parametrize("p", ["6/5", "3", "inf"])
def test_young_chain_names_the_threshold(p):
    with pytest.raises(ExponentRangeError, match="8/7"):
        young_chain(p)
