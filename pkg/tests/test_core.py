from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from colored_riffle.core import (
    ColoredPermutation,
    DomainError,
    ResourceError,
    ShuffleParams,
    all_position_sets,
    as_positions,
    binom,
    check_budget,
    compare_sigma,
    d,
    d_dash,
    d_descent_set,
    format_rational,
    iter_group,
    parse_rational,
)


def test_params_infer_sign_and_c():
    plus = ShuffleParams(9, 6, 4)
    assert (plus.sign, plus.c, plus.ell) == ("+", 2, 6)
    minus = ShuffleParams(5, 4, 3)
    assert (minus.sign, minus.c) == ("-", 2)
    assert ShuffleParams(2, 5, 1, "+").ell == 4


def test_params_ambiguous_and_invalid():
    with pytest.raises(DomainError):
        ShuffleParams(3, 2, 2)
    assert ShuffleParams(3, 2, 2, "-").c == 2
    with pytest.raises(DomainError):
        ShuffleParams(6, 3, 4)  # 6 is neither +1 nor -1 mod 4
    with pytest.raises(DomainError):
        ShuffleParams(1, 3, 1, "+")
    with pytest.raises(DomainError):
        ShuffleParams(7, 3, 3, "-")


def test_carry_offset_is_integer_for_p_one():
    # (b-1)/p* with p = 1 is 0
    assert ShuffleParams(5, 3, 1, "+").carry_offset == 0
    assert ShuffleParams(7, 3, 3).carry_offset == 4
    assert ShuffleParams(5, 3, 3).carry_offset == 1


def test_binom_convention():
    assert binom(9, 8) == 9
    assert binom(7, 8) == 0
    assert binom(8, 8) == 1
    assert binom(-1, 0) == 0
    assert binom(3, -1) == 0


def test_rational_round_trip():
    assert format_rational(Fraction(3401, 531441)) == "3401/531441"
    assert format_rational(Fraction(4, 2)) == "2"
    assert parse_rational("6/4") == Fraction(3, 2)
    assert parse_rational(" 0 ") == 0
    for bad in ("1/0", "x", "1/-2"):
        with pytest.raises(DomainError):
            parse_rational(bad)


@given(st.fractions(), st.fractions(), st.fractions())
def test_rational_field_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert parse_rational(format_rational(a)) == a
    assert format_rational(parse_rational(format_rational(a))) == format_rational(a)


def test_orders_examples():
    params = ShuffleParams(4, 3, 3)
    assert compare_sigma((3, 0), (1, 2), params) == -1
    assert compare_sigma((1, 0), (2, 0), params) == -1
    assert compare_sigma((2, 1), (1, 2), params, "dash") == -1
    with pytest.raises(DomainError):
        compare_sigma((4, 0), (1, 0), params)


@pytest.mark.parametrize("n,p", [(3, 3), (4, 2), (2, 5)])
def test_orders_are_total(n, p):
    params = ShuffleParams(p + 1, n, p, "+")
    pairs = [(i, r) for i in range(1, n + 1) for r in range(p)]
    for which in ("usual", "dash"):
        for a, b in itertools.product(pairs, repeat=2):
            ab, ba = compare_sigma(a, b, params, which), compare_sigma(b, a, params, which)
            assert ab == -ba and (ab == 0) == (a == b)
        for a, b, c in itertools.product(pairs, repeat=3):
            if compare_sigma(a, b, params, which) < 0 and compare_sigma(b, c, params, which) < 0:
                assert compare_sigma(a, c, params, which) < 0


def test_descent_sets_example():
    sigma = ColoredPermutation.from_pairs([(3, 1), (1, 0), (2, 2), (4, 1)], 3)
    assert d_descent_set(sigma, "usual") == (1, 4)
    assert d_descent_set(sigma, "dash") == (1, 3)
    ident = ColoredPermutation.identity(4, 3)
    assert d_descent_set(ident) == d_descent_set(ident, "dash") == ()


def test_p_two_descents_coincide_and_bounded():
    for sigma in iter_group(3, 2):
        assert d_descent_set(sigma) == d_descent_set(sigma, "dash")
    for sigma in iter_group(4, 1):
        assert d(sigma) <= 3
        assert 4 in d_descent_set(sigma, "dash")  # p = 1: colour 0 = p - 1
        assert 4 not in d_descent_set(sigma)


def test_inverse_and_validation():
    for sigma in iter_group(3, 3):
        inv = sigma.inverse()
        assert inv.inverse() == sigma
    with pytest.raises(DomainError):
        ColoredPermutation((1, 1), (0, 0), 2)
    with pytest.raises(DomainError):
        ColoredPermutation((1, 2), (0, 2), 2)


def test_group_size():
    assert sum(1 for _ in iter_group(3, 2)) == 48
    assert len(set(iter_group(2, 3))) == 18


def test_positions():
    assert as_positions([1, 2, 4], 6) == (1, 2, 4)
    for bad in ([2, 1], [0], [7]):
        with pytest.raises(DomainError):
            as_positions(bad, 6)
    assert sum(1 for _ in all_position_sets(5)) == 32


def test_budget(monkeypatch):
    check_budget(10, 10, "x")
    with pytest.raises(ResourceError):
        check_budget(11, 10, "x")
    monkeypatch.setenv("COLORED_RIFFLE_BUDGET", "5")
    with pytest.raises(ResourceError):
        check_budget(6, None, "x")
