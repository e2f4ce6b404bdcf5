"""The (+-b, n, p)-carries chains, their closed-form spectral data, and the
link between carries and the descent process of the shuffle walk.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import gmpy2
import numpy as np
from scipy import stats

from .core import (
    ColoredPermutation,
    ResourceError,
    ShuffleParams,
    binom,
    check_budget,
    d,
    d_dash,
    format_rational,
    iter_group,
)
from .shuffle import (
    _digits,
    compose,
    compose_batch,
    descent_counts,
    gsr,
    gsr_batch,
    make_rng,
    reverse_colors,
)

Matrix = list[list[Fraction]]

# --------------------------------------------------------------------------
# small exact linear algebra


def identity(size: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]


def matmul(A: Matrix, B: Matrix) -> Matrix:
    cols = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols] for row in A]


def matpow(A: Matrix, N: int) -> Matrix:
    out = identity(len(A))
    for _ in range(N):
        out = matmul(out, A)
    return out


def matrix_to_json(M: Matrix) -> list[list[str]]:
    return [[format_rational(x) for x in row] for row in M]


# --------------------------------------------------------------------------
# the chain


@dataclass(frozen=True)
class CarriesMatrix:
    params: ShuffleParams
    P: tuple[tuple[Fraction, ...], ...]

    @property
    def sign(self) -> str:
        return self.params.sign

    def rows(self) -> Matrix:
        return [list(r) for r in self.P]


def exponent(params: ShuffleParams, i: int, j: int) -> int:
    """A^+(i,j) = jb - i + (b-1)/p,  A^-(i,j) = -i + (n-j+1)b - (b+1)/p."""
    b, n, c = params.b, params.n, params.c
    if params.sign == "+":
        return j * b - i + c
    return -i + (n - j + 1) * b - c


def window_coefficient(m: int, b: int, n: int) -> int:
    """[x^m] ((1 - x^b)/(1 - x))^(n+1)."""
    if m < 0:
        return 0
    return sum((-1) ** r * binom(n + 1, r) * binom(m - r * b + n, n) for r in range(n + 2) if r * b <= m)


def transition_matrix(params: ShuffleParams) -> CarriesMatrix:
    size = params.ell + 1
    scale = params.b**params.n
    P = tuple(
        tuple(Fraction(window_coefficient(exponent(params, i, j), params.b, params.n), scale) for j in range(size))
        for i in range(size)
    )
    return CarriesMatrix(params, P)


def next_carry(state, digit_sum, params: ShuffleParams):
    """Carry rule; works elementwise on numpy arrays too."""
    total = state + digit_sum + params.carry_offset
    if params.sign == "+":
        return total // params.b
    return params.n - total // params.b


def carries_step(state: int, params: ShuffleParams, rng: np.random.Generator) -> int:
    if not 0 <= state <= params.ell:
        raise ValueError(f"state {state} outside 0..{params.ell}")
    digits = rng.integers(0, params.b, size=params.n)
    nxt = int(next_carry(state, int(digits.sum()), params))
    assert 0 <= nxt <= params.ell, "carry left its state space"
    return nxt


def simulate_carries(params: ShuffleParams, steps: int, walks: int, seed: int, start: int = 0) -> np.ndarray:
    """Array of shape (walks, steps + 1) of carries, vectorised over walks."""
    rng = make_rng(seed)
    out = np.empty((walks, steps + 1), dtype=np.int64)
    out[:, 0] = start
    for k in range(steps):
        sums = rng.integers(0, params.b, size=(walks, params.n)).sum(axis=1)
        out[:, k + 1] = next_carry(out[:, k], sums, params)
    assert out.min() >= 0 and out.max() <= params.ell
    return out


def enumerate_transition_matrix(params: ShuffleParams, *, budget: int | None = None) -> Matrix:
    """Transition matrix by running the carry rule over all b^n digit tuples."""
    total = params.b**params.n
    check_budget(total, budget, "carries digit enumeration")
    sums = np.bincount(_digits(0, total, params.b, params.n).sum(axis=1))
    size = params.ell + 1
    out = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        tally = Counter()
        for s, mult in enumerate(sums.tolist()):
            if mult:
                j = int(next_carry(i, s, params))
                assert 0 <= j <= params.ell
                tally[j] += mult
        for j, v in tally.items():
            out[i][j] = Fraction(v, total)
    return out


# --------------------------------------------------------------------------
# U, V and the spectral projections


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=None)
def u_matrix(n: int, p: int) -> tuple[tuple[Fraction, ...], ...]:
    """u_ij = [x^(n-j)] binom(n + (x-1)/p - i, n); independent of b."""
    ell = n - 1 if p == 1 else n
    rows = []
    for i in range(ell + 1):
        poly = [Fraction(1)]
        for t in range(n):
            # (x - 1)/p + n - i - t
            poly = _poly_mul(poly, [Fraction(n - i - t) - Fraction(1, p), Fraction(1, p)])
        poly = [x / math.factorial(n) for x in poly]
        rows.append(tuple(poly[n - j] for j in range(ell + 1)))
    return tuple(rows)


@lru_cache(maxsize=None)
def v_matrix(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    """v_ij = [x^j] ((1-x)^(n+1) sum_k (pk+1)^(n-i) x^k), truncated at degree ell."""
    ell = n - 1 if p == 1 else n
    return tuple(
        tuple(sum((-1) ** t * binom(n + 1, t) * (p * (j - t) + 1) ** (n - i) for t in range(j + 1)) for j in range(ell + 1))
        for i in range(ell + 1)
    )


@dataclass(frozen=True)
class SpectralData:
    params: ShuffleParams
    U: Matrix
    V: Matrix
    E: list[Matrix]

    @property
    def eigenvalues(self) -> list[Fraction]:
        base = self.params.b if self.params.sign == "+" else -self.params.b
        return [Fraction(1, base**k) for k in range(self.params.ell + 1)]

    def power(self, N: int) -> Matrix:
        """sum_k (+-b)^(-kN) E_k."""
        size = self.params.ell + 1
        out = [[Fraction(0)] * size for _ in range(size)]
        for lam, Ek in zip(self.eigenvalues, self.E):
            w = lam**N
            for i in range(size):
                for j in range(size):
                    out[i][j] += w * Ek[i][j]
        return out


def spectral(params: ShuffleParams) -> SpectralData:
    n, p = params.n, params.p
    U = [list(r) for r in u_matrix(n, p)]
    V = [[Fraction(x) for x in r] for r in v_matrix(n, p)]
    size = params.ell + 1
    E = [[[U[i][k] * V[k][j] for j in range(size)] for i in range(size)] for k in range(size)]
    return SpectralData(params, U, V, E)


# --------------------------------------------------------------------------
# descent class sizes


def brute_class_sizes(n: int, p: int, *, budget: int | None = None) -> list[int]:
    """N_i = #{sigma in G_{p,n} : d(sigma) = i} by walking the group."""
    check_budget(p**n * math.factorial(n), budget, f"enumeration of G_{{{p},{n}}}")
    ell = n - 1 if p == 1 else n
    tally = Counter(d(sigma) for sigma in iter_group(n, p))
    return [tally.get(i, 0) for i in range(ell + 1)]


def _pack(coeffs: Sequence[int], width: int) -> gmpy2.mpz:
    return gmpy2.mpz(int.from_bytes(b"".join(int(c).to_bytes(width, "little") for c in coeffs), "little"))


def _unpack(x: gmpy2.mpz, width: int, count: int) -> list[int]:
    x = int(x)
    raw = x.to_bytes(max(width * count, (x.bit_length() + 7) // 8), "little")
    return [int.from_bytes(raw[i * width : (i + 1) * width], "little") for i in range(count)]


def top_left_eigenvector(n: int, p: int, upto: int | None = None) -> list[int]:
    """v_0j for j = 0..upto, via one Kronecker-substituted big-integer product.

    The alternating signs of (1-x)^(n+1) are split into two non-negative
    products so each packed slot holds an unsigned coefficient.
    """
    ell = n - 1 if p == 1 else n
    m = ell if upto is None else min(upto, ell)
    if n <= 60:
        return [sum((-1) ** t * binom(n + 1, t) * (p * (j - t) + 1) ** n for t in range(j + 1)) for j in range(m + 1)]
    powers = [gmpy2.mpz(p * k + 1) ** n for k in range(m + 1)]
    even = [binom(n + 1, t) if t % 2 == 0 else 0 for t in range(m + 1)]
    odd = [binom(n + 1, t) if t % 2 == 1 else 0 for t in range(m + 1)]
    bound = (1 << (n + 2)) * powers[-1] * (m + 1)
    width = bound.bit_length() // 8 + 2
    packed = _pack(powers, width)
    plus = _unpack(_pack(even, width) * packed, width, m + 1)
    minus = _unpack(_pack(odd, width) * packed, width, m + 1)
    return [a - b for a, b in zip(plus, minus)]


HYPOTHESIS_LIMIT = 50_000


@lru_cache(maxsize=None)
def class_size_hypothesis() -> bool:
    """Check N_j = v_0j on every G_{p,n} with p^n n! <= HYPOTHESIS_LIMIT (p <= 5)."""
    for p in range(1, 6):
        for n in itertools.count(1):
            if p**n * math.factorial(n) > HYPOTHESIS_LIMIT:
                break
            if brute_class_sizes(n, p, budget=HYPOTHESIS_LIMIT) != top_left_eigenvector(n, p):
                return False
    return True


def descent_class_sizes(n: int, p: int, *, budget: int | None = None, upto: int | None = None) -> list[int]:
    """(N_0, ..., N_ell), by brute force when affordable, else by the closed form.

    The closed form is used only after it has been checked against brute
    force on every small group.
    """
    try:
        sizes = brute_class_sizes(n, p, budget=budget if budget is not None else HYPOTHESIS_LIMIT)
        return sizes if upto is None else sizes[: upto + 1]
    except ResourceError:
        if not class_size_hypothesis():
            raise ResourceError(f"G_{{{p},{n}}} is too large and the class-size closed form failed validation")
    return top_left_eigenvector(n, p, upto)


# --------------------------------------------------------------------------
# descent process of the shuffle walk versus the carries chain


def walk_statistic(sigma: ColoredPermutation, k: int, params: ShuffleParams) -> int:
    """d(sigma(k)) for sign '+'; n - d'(sigma'(k)) (k odd) or d(sigma'(k)) (k even) for '-'."""
    if params.sign == "+" or k % 2 == 0:
        return d(sigma)
    return params.n - d_dash(sigma)


def exact_walk_distribution(params: ShuffleParams, N: int, *, budget: int | None = 10**6) -> list[Fraction]:
    """Law of the walk statistic after N steps, over all b^(nN) label sequences."""
    b, n = params.b, params.n
    total = b ** (n * N)
    check_budget(total, budget, "label-sequence enumeration")
    tally = Counter()
    shuffles = [gsr(w, params) for w in itertools.product(range(b), repeat=n)]
    for seq in itertools.product(shuffles, repeat=N):
        sigma = ColoredPermutation.identity(n, params.p)
        for k, S in enumerate(seq, start=1):
            if params.sign == "-" and k % 2 == 0:
                S = reverse_colors(S)
            sigma = compose(S, sigma)
        tally[walk_statistic(sigma, N, params)] += 1
    return [Fraction(tally.get(i, 0), total) for i in range(params.ell + 1)]


def _row_chisquare(observed: np.ndarray, expected_p: Sequence[Fraction]) -> tuple[float, int, float]:
    total = observed.sum()
    probs = np.array([float(x) for x in expected_p])
    expected = total * probs
    if np.any((probs == 0) & (observed > 0)):
        return math.inf, 0, 0.0
    keep = probs > 0
    obs, exp = observed[keep].astype(float), expected[keep]
    small = exp < 5
    if small.any():
        obs = np.append(obs[~small], obs[small].sum())
        exp = np.append(exp[~small], exp[small].sum())
    if len(obs) < 2:
        return 0.0, 0, 1.0
    stat = float(((obs - exp) ** 2 / exp).sum())
    dof = len(obs) - 1
    return stat, dof, float(stats.chi2.sf(stat, dof))


def descent_process_check(
    params: ShuffleParams,
    steps: int,
    walks: int,
    seed: int,
    *,
    alpha: float = 1e-3,
    min_row_count: int = 100,
) -> dict:
    """Simulate the walk and compare its one-step transitions with the carries matrix."""
    n, p, size = params.n, params.p, params.ell + 1
    rng = make_rng(seed)
    pos = np.tile(np.arange(1, n + 1), (walks, 1))
    col = np.zeros((walks, n), dtype=np.int64)
    prev = np.zeros(walks, dtype=np.int64)
    counts = np.zeros((size, size), dtype=np.int64)
    for k in range(1, steps + 1):
        s_pos, s_col = gsr_batch(rng.integers(0, params.b, size=(walks, n)), p)
        if params.sign == "-" and k % 2 == 0:
            s_col = (-s_col) % p
        pos, col = compose_batch(s_pos, s_col, pos, col, p)
        if params.sign == "+" or k % 2 == 0:
            cur = descent_counts(pos, col, p, "usual")
        else:
            cur = n - descent_counts(pos, col, p, "dash")
        counts += np.bincount(prev * size + cur, minlength=size * size).reshape(size, size)
        prev = cur
    P = transition_matrix(params).rows()
    rows = []
    for i in range(size):
        total = int(counts[i].sum())
        if total < min_row_count:
            rows.append({"state": i, "count": total, "skipped": True})
            continue
        stat, dof, pval = _row_chisquare(counts[i], P[i])
        rows.append({"state": i, "count": total, "chi2": stat, "dof": dof, "p_value": pval, "passed": pval > alpha})
    return {
        "params": params.as_dict(),
        "steps": steps,
        "walks": walks,
        "seed": seed,
        "alpha": alpha,
        "transition_counts": counts.tolist(),
        "rows": rows,
        "passed": all(r.get("passed", True) for r in rows),
    }
