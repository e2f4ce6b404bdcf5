from __future__ import annotations

import math
from fractions import Fraction

import pytest

from colored_riffle.core import ShuffleParams, UnsupportedCombination
from colored_riffle.cutoff import (
    CSV_COLUMNS,
    asymptotic_tv,
    curve_to_csv,
    cutoff_curve,
    exact_tv,
    full_tv,
    steps_for,
)


def test_zero_steps():
    for params in (ShuffleParams(2, 6, 1, "+"), ShuffleParams(7, 3, 3)):
        assert exact_tv(params, 0) == 1 - Fraction(1, params.group_order)


def test_monotone_in_k():
    params = ShuffleParams(2, 6, 1, "+")
    tv = [exact_tv(params, k) for k in range(12)]
    assert all(a >= b for a, b in zip(tv, tv[1:]))
    assert all(0 <= x <= 1 for x in tv) and tv[-1] > 0


@pytest.mark.parametrize("b,n,p", [(2, 4, 1), (3, 3, 2), (4, 3, 3), (7, 2, 3), (2, 5, 1), (5, 3, 4)])
def test_class_formula_equals_full_state_space(b, n, p):
    params = ShuffleParams(b, n, p, "+")
    for k in range(5):
        assert exact_tv(params, k) == full_tv(params, k)


def test_asymptotic_tails():
    params = ShuffleParams(2, 100, 1, "+")
    for j in (10, 12, 14):
        tail = params.p / (2 * math.sqrt(6 * math.pi)) * params.b ** (-j)
        assert abs(asymptotic_tv(params, j) / tail - 1) < 1e-6
    j = -10
    x = params.p * params.b ** (-j) / (4 * math.sqrt(3))
    assert abs((1 - asymptotic_tv(params, j)) - math.exp(-(x**2) / 2)) < 1e-6
    assert asymptotic_tv(params, 200) < 1e-50
    values = [asymptotic_tv(params, j) for j in range(-3, 4)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_steps_rule():
    params = ShuffleParams(2, 100, 1, "+")
    assert steps_for(params, 0) == round(1.5 * math.log2(100))
    assert steps_for(params, -20) == 0


def test_curve_and_csv():
    params = ShuffleParams(2, 6, 1, "+")
    pts = cutoff_curve(params, 0, 0, 1)
    assert len(pts) == 1 and 0 <= pts[0].tv_exact <= 1
    text = curve_to_csv(cutoff_curve(params, -2, 2, 0.5))
    lines = text.splitlines()
    assert lines[0].startswith("# k = ")
    assert lines[1].split(",") == CSV_COLUMNS
    assert len(lines) == 2 + 9
    assert text == curve_to_csv(cutoff_curve(params, -2, 2, 0.5, threads=3))


def test_plus_sign_only():
    with pytest.raises(UnsupportedCombination):
        exact_tv(ShuffleParams(5, 3, 3), 1)


def test_medium_n_closed_form_path():
    # n = 40 is beyond brute force; the class sizes come from the validated closed form
    params = ShuffleParams(2, 40, 1, "+")
    tv = [exact_tv(params, k) for k in range(4, 14)]
    assert all(a >= b for a, b in zip(tv, tv[1:]))
    assert 0 < tv[-1] < tv[0] < 1
