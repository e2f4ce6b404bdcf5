from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colored_riffle.core import (
    DomainError,
    ShuffleParams,
    UnsupportedCombination,
    all_position_sets,
    binom,
    d_descent_set,
    iter_group,
)
from colored_riffle.formulas import (
    dash_descent_prob,
    descent_matrix,
    descent_prob,
    fraction_free_det,
    uniform_descent_prob,
)
from colored_riffle.shuffle import enumerate_descent_probabilities


def leibniz_det(M):
    n = len(M)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i, j in itertools.combinations(range(n), 2) if perm[i] > perm[j])
        term = Fraction((-1) ** inversions)
        for i in range(n):
            term *= M[i][perm[i]]
        total += term
    return total


EXAMPLE_ONE = [[9, 45, 495, 28], [1, 9, 165, 21], [0, 1, 45, 15], [0, 0, 1, 6]]


def test_example_one():
    params = ShuffleParams(9, 6, 4)
    assert descent_prob(params, [1, 2, 4]) == Fraction(3401, 9**6)
    assert descent_prob(params, [1, 2, 6]) == Fraction(8861, 9**6)
    assert [list(r) for r in descent_matrix(params, [1, 2, 4]).entries] == EXAMPLE_ONE
    assert fraction_free_det(EXAMPLE_ONE) == 3401


def test_determinant_backend():
    assert fraction_free_det([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 1
    assert fraction_free_det([[7]]) == 7
    assert fraction_free_det([[0, 1], [1, 0]]) == -1
    with pytest.raises(DomainError):
        fraction_free_det([[1, 2]])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(lambda k: st.lists(st.lists(st.integers(-20, 20), min_size=k, max_size=k), min_size=k, max_size=k)))
def test_det_matches_leibniz_integer(M):
    assert fraction_free_det(M) == leibniz_det(M)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4).flatmap(lambda k: st.lists(st.lists(st.fractions(max_denominator=9), min_size=k, max_size=k), min_size=k, max_size=k)))
def test_det_matches_leibniz_rational(M):
    assert fraction_free_det(M) == leibniz_det(M)


@pytest.mark.parametrize("b,n,p", [(7, 5, 3), (7, 3, 3), (9, 5, 4), (3, 6, 2), (5, 5, 2), (4, 4, 1), (3, 5, 1), (5, 3, 2)])
def test_theorem_plus_matches_enumeration(b, n, p):
    params = ShuffleParams(b, n, p, "+")
    dist = enumerate_descent_probabilities(params)
    for s in all_position_sets(n):
        assert descent_prob(params, s) == dist.get(s, 0), s
    assert descent_prob(params, ()) == Fraction(binom(n + params.c, params.c), b**n)


@pytest.mark.parametrize("b,n,p", [(5, 4, 3), (5, 3, 3), (3, 5, 2), (3, 3, 1), (11, 3, 4), (7, 4, 4)])
def test_theorem_minus_matches_enumeration(b, n, p):
    params = ShuffleParams(b, n, p, "-")
    dist = enumerate_descent_probabilities(params, "dash")
    for s in all_position_sets(n):
        assert dash_descent_prob(params, s) == dist.get(s, 0), s
    assert dash_descent_prob(params, ()) == Fraction(binom(n + b - params.c, b - params.c), b**n)


def test_p_two_dash_equals_usual_enumeration():
    params = ShuffleParams(3, 3, 2, "-")
    dist = enumerate_descent_probabilities(params, "usual")
    for s in all_position_sets(3):
        assert dash_descent_prob(params, s) == dist.get(s, 0)


def test_wrong_sign_rejected():
    with pytest.raises(UnsupportedCombination):
        descent_prob(ShuffleParams(5, 3, 3), [1])
    with pytest.raises(UnsupportedCombination):
        dash_descent_prob(ShuffleParams(7, 3, 3), [1])


@pytest.mark.parametrize("b,n,p,sign", [(7, 6, 3, "+"), (13, 5, 4, "+"), (5, 6, 3, "-"), (2, 7, 1, "+")])
def test_probabilities_partition(b, n, p, sign):
    params = ShuffleParams(b, n, p, sign)
    f = descent_prob if sign == "+" else dash_descent_prob
    assert sum(f(params, s) for s in all_position_sets(n)) == 1


def uniform_counts(n, p, which):
    return Counter(d_descent_set(sigma, which) for sigma in iter_group(n, p))


@pytest.mark.parametrize("n,p", [(2, 2), (3, 2), (3, 3), (3, 1), (4, 2), (4, 1)])
def test_uniform_matches_group_enumeration(n, p):
    order = p**n * math.factorial(n)
    whiches = ["usual"] + (["dash"] if p >= 2 else [])
    for which in whiches:
        counts = uniform_counts(n, p, which)
        values = {s: uniform_descent_prob(n, p, s, which) for s in all_position_sets(n)}
        assert sum(values.values()) == 1
        for s, v in values.items():
            assert v == Fraction(counts.get(s, 0), order), (which, s)


def test_uniform_small_values():
    assert uniform_descent_prob(4, 1, ()) == Fraction(1, 24)
    assert uniform_descent_prob(2, 2, ()) == Fraction(1, 8)
    with pytest.raises(DomainError):
        uniform_descent_prob(3, 1, (), "dash")


def test_large_b_approaches_uniform():
    n, p, s = 4, 3, (1, 3)
    target = uniform_descent_prob(n, p, s)
    gaps = [abs(descent_prob(ShuffleParams(b, n, p), s) - target) for b in (10, 31, 100, 301, 1000)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))
