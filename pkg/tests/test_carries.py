from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from colored_riffle.carries import (
    brute_class_sizes,
    carries_step,
    class_size_hypothesis,
    descent_class_sizes,
    descent_process_check,
    enumerate_transition_matrix,
    exact_walk_distribution,
    identity,
    matmul,
    matpow,
    simulate_carries,
    spectral,
    top_left_eigenvector,
    transition_matrix,
    u_matrix,
)
from colored_riffle.core import ShuffleParams, binom
from colored_riffle.shuffle import make_rng

GRID = [
    (2, 2, 1, "+"), (7, 4, 3, "+"), (5, 4, 3, "-"), (5, 3, 3, "-"), (3, 3, 1, "-"),
    (3, 3, 2, "-"), (3, 3, 2, "+"), (4, 3, 1, "+"), (9, 3, 4, "+"), (7, 3, 4, "-"), (2, 5, 1, "+"),
]


def eulerian_type_a(n):
    row = [1]
    for m in range(2, n + 1):
        row = [(k + 1) * (row[k] if k < len(row) else 0) + (m - k) * (row[k - 1] if k >= 1 else 0) for k in range(m)]
    return row


def eulerian_type_b(n):
    row = [1, 1]
    for m in range(2, n + 1):
        row = [
            (2 * k + 1) * (row[k] if k < len(row) else 0) + (2 * m - 2 * k + 1) * (row[k - 1] if k >= 1 else 0)
            for k in range(m + 1)
        ]
    return row


def test_small_matrix_example():
    M = transition_matrix(ShuffleParams(2, 2, 1, "+")).rows()
    assert M == [[Fraction(3, 4), Fraction(1, 4)], [Fraction(1, 4), Fraction(3, 4)]]


@pytest.mark.parametrize("b,n,p,sign", GRID)
def test_transition_matrix_matches_enumeration(b, n, p, sign):
    params = ShuffleParams(b, n, p, sign)
    P = transition_matrix(params).rows()
    assert P == enumerate_transition_matrix(params)
    assert all(sum(row) == 1 and min(row) >= 0 for row in P)


@pytest.mark.parametrize("b,n,p,sign", GRID)
def test_spectral_decomposition(b, n, p, sign):
    params = ShuffleParams(b, n, p, sign)
    size = params.ell + 1
    sp = spectral(params)
    assert matmul(sp.U, sp.V) == identity(size)
    assert sp.power(0) == identity(size)
    for j, Ej in enumerate(sp.E):
        for k, Ek in enumerate(sp.E):
            zero = [[Fraction(0)] * size for _ in range(size)]
            assert matmul(Ej, Ek) == (Ej if j == k else zero)
    P = transition_matrix(params).rows()
    for N in range(1, 5):
        assert matpow(P, N) == sp.power(N)
    lam = sp.eigenvalues
    assert lam[0] == 1 and all(abs(x) < 1 for x in lam[1:])
    if sign == "-" and size > 1:
        assert lam[1] < 0


@pytest.mark.parametrize("b,n,p,sign", GRID)
def test_stationary_vector(b, n, p, sign):
    params = ShuffleParams(b, n, p, sign)
    sp = spectral(params)
    P = transition_matrix(params).rows()
    v0 = sp.V[0]
    assert matmul([v0], P) == [v0]
    assert len({row[0] for row in sp.U}) == 1


def test_carries_step_rules():
    params = ShuffleParams(2, 2, 1, "+")
    from colored_riffle.carries import next_carry

    assert next_carry(0, 2, params) == 1
    rng = make_rng(3)
    minus = ShuffleParams(5, 2, 3)
    assert {carries_step(s, minus, rng) for s in (0, 1, 2) for _ in range(2000)} <= {0, 1, 2}
    with pytest.raises(ValueError):
        carries_step(5, minus, rng)


def test_simulated_frequencies():
    params = ShuffleParams(2, 2, 1, "+")
    traj = simulate_carries(params, 1, 100_000, seed=11)
    freq = (traj[:, 1] == 1).mean()
    assert abs(freq - 0.25) < 3 * math.sqrt(0.25 * 0.75 / 100_000)
    again = simulate_carries(params, 1, 100_000, seed=11)
    assert np.array_equal(traj, again)
    minus = simulate_carries(ShuffleParams(5, 2, 3), 5, 20_000, seed=2)
    assert minus.min() >= 0 and minus.max() <= 2


def test_class_sizes_small():
    assert brute_class_sizes(3, 1) == [1, 4, 1]
    for n, p in [(3, 2), (4, 3), (2, 5)]:
        sizes = descent_class_sizes(n, p)
        assert sum(sizes) == p**n * math.factorial(n)
    assert brute_class_sizes(3, 2) == top_left_eigenvector(3, 2)
    assert spectral(ShuffleParams(3, 3, 2, "+")).V[0] == [Fraction(x) for x in brute_class_sizes(3, 2)]


def test_class_size_hypothesis_gate():
    assert class_size_hypothesis()


@pytest.mark.parametrize("n", [61, 64, 80, 150])
def test_kronecker_path_against_eulerian_recurrences(n):
    assert top_left_eigenvector(n, 1) == eulerian_type_a(n)
    assert top_left_eigenvector(n, 2) == eulerian_type_b(n)


def test_kronecker_truncation_and_direct_sum():
    n, p = 70, 3
    full = top_left_eigenvector(n, p)
    direct = [sum((-1) ** t * binom(n + 1, t) * (p * (j - t) + 1) ** n for t in range(j + 1)) for j in range(n + 1)]
    assert full == direct
    assert top_left_eigenvector(n, p, upto=20) == full[:21]
    assert sum(full) == p**n * math.factorial(n)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_total_probability_identity(p):
    n = 7
    sizes = descent_class_sizes(n, p)
    for b in range(2, 101):
        if (b - 1) % p:
            continue
        assert sum(N * binom(n + (b - 1) // p - i, n) for i, N in enumerate(sizes)) == b**n


def test_u_matrix_is_b_free():
    assert u_matrix(3, 2) == tuple(tuple(r) for r in spectral(ShuffleParams(5, 3, 2, "+")).U)


@pytest.mark.parametrize("b,n,p,sign,N", [(3, 2, 2, "+", 1), (3, 2, 2, "+", 2), (5, 2, 3, "-", 1), (5, 2, 3, "-", 2),
                                         (3, 2, 2, "-", 2), (7, 2, 4, "-", 2), (5, 2, 3, "-", 3)])
def test_exact_walk_matches_matrix_power(b, n, p, sign, N):
    params = ShuffleParams(b, n, p, sign)
    P = transition_matrix(params).rows()
    assert exact_walk_distribution(params, N) == matpow(P, N)[0]


def test_descent_process_check_small():
    report = descent_process_check(ShuffleParams(7, 3, 3), steps=4, walks=50_000, seed=5)
    assert report["passed"]
    report = descent_process_check(ShuffleParams(5, 3, 3), steps=4, walks=50_000, seed=5)
    assert report["passed"]
