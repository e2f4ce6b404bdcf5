"""Exact determinantal descent probabilities.

All matrices are square with integer or rational entries; determinants are
computed exactly (Bareiss for integers, Gaussian elimination over
``Fraction`` otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    DomainError,
    ShuffleParams,
    UnsupportedCombination,
    Which,
    as_positions,
    binom,
)

__all__ = [
    "DeterminantSpec",
    "binom",
    "fraction_free_det",
    "descent_matrix",
    "descent_prob",
    "dash_descent_prob",
    "uniform_matrix",
    "uniform_descent_prob",
]


@dataclass(frozen=True)
class DeterminantSpec:
    entries: tuple[tuple, ...]
    prefactor: Fraction
    provenance: str

    @property
    def size(self) -> int:
        return len(self.entries)

    def value(self) -> Fraction:
        return self.prefactor * fraction_free_det(self.entries)


def _square(M: Sequence[Sequence]) -> list[list]:
    rows = [list(r) for r in M]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise DomainError("determinant needs a non-empty square matrix")
    return rows


def _bareiss(A: list[list[int]]) -> int:
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def _gauss(A: list[list[Fraction]]) -> Fraction:
    n = len(A)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            det = -det
        det *= A[k][k]
        for i in range(k + 1, n):
            if A[i][k]:
                f = A[i][k] / A[k][k]
                for j in range(k, n):
                    A[i][j] -= f * A[k][j]
    return det


def fraction_free_det(M: Sequence[Sequence[int | Fraction]]) -> Fraction:
    rows = _square(M)
    if all(isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1) for r in rows for x in r):
        return Fraction(_bareiss([[int(x) for x in r] for r in rows]))
    return _gauss([[Fraction(x) for x in r] for r in rows])


def _last_height(params: ShuffleParams, which: Which) -> int:
    return params.c if which == "usual" else params.b - params.c


def descent_matrix(params: ShuffleParams, s: Iterable[int], which: Which = "usual") -> DeterminantSpec:
    """Integer matrix whose determinant over b^n is P (usual) or P' (dash).

    The terminal column uses binom(n - s_i + h, h) with h = c (usual) or
    h = b - c (dash); when s_k = n it becomes the difference
    binom(n - s_i + b - 1, b - 1) - binom(n - s_i + h, h).
    """
    n, b = params.n, params.b
    s = as_positions(s, n)
    h = _last_height(params, which)
    if s and s[-1] == n:
        inner = s[:-1]
        src = (0,) + inner
        dst = inner + (n,)
        k = len(src)
        rows = []
        for i in range(k):
            row = [binom(dst[j] - src[i] + b - 1, b - 1) for j in range(k - 1)]
            row.append(binom(n - src[i] + b - 1, b - 1) - binom(n - src[i] + h, h))
            rows.append(tuple(row))
        case = "s_k = n"
    else:
        src = (0,) + s
        dst = s + (n,)
        k = len(src)
        rows = []
        for i in range(k):
            row = [binom(dst[j] - src[i] + b - 1, b - 1) for j in range(k - 1)]
            row.append(binom(n - src[i] + h, h))
            rows.append(tuple(row))
        case = "s_k < n"
    name = "d-descent" if which == "usual" else "d'-descent"
    return DeterminantSpec(tuple(rows), Fraction(1, b**n), f"{name}, {case}")


def descent_prob(params: ShuffleParams, s: Iterable[int]) -> Fraction:
    """P(d-descent set of a (b,n,p)-shuffle is exactly s), b = pc + 1."""
    if params.sign != "+":
        raise UnsupportedCombination("the d-descent formula needs b = 1 (mod p); use dash_descent_prob")
    return descent_matrix(params, s, "usual").value()


def dash_descent_prob(params: ShuffleParams, s: Iterable[int]) -> Fraction:
    """P(d'-descent set of a (b,n,p)-shuffle is exactly s), b = pc - 1."""
    if params.sign != "-":
        raise UnsupportedCombination("the d'-descent formula needs b = -1 (mod p); use descent_prob")
    return descent_matrix(params, s, "dash").value()


def _inv_factorial(m: int) -> Fraction:
    return Fraction(1, math.factorial(m)) if m >= 0 else Fraction(0)


def uniform_matrix(n: int, p: int, s: Iterable[int], which: Which = "usual") -> DeterminantSpec:
    """Rational matrix whose determinant is the uniform-measure probability.

    No 1/b^n prefactor: that factor cannot belong to a b-free probability and
    the group enumeration confirms the bare determinant.
    """
    if which == "dash" and p < 2:
        raise DomainError("the dash uniform formula needs p >= 2")
    if which not in ("usual", "dash"):
        raise DomainError(f"unknown order {which!r}")
    s = as_positions(s, n)
    q = Fraction(1, p) if which == "usual" else 1 - Fraction(1, p)
    tail = bool(s) and s[-1] == n
    inner = s[:-1] if tail else s
    src = (0,) + inner
    dst = inner + (n,)
    k = len(src)
    rows = []
    for i in range(k):
        row = [_inv_factorial(dst[j] - src[i]) for j in range(k - 1)]
        m = n - src[i]
        row.append(_inv_factorial(m) * (1 - q**m if tail else q**m))
        rows.append(tuple(row))
    return DeterminantSpec(tuple(rows), Fraction(1), f"uniform {which}, {'s_k = n' if tail else 's_k < n'}")


def uniform_descent_prob(n: int, p: int, s: Iterable[int], which: Which = "usual") -> Fraction:
    """Probability of the exact descent set s under the uniform law on G_{p,n}."""
    return uniform_matrix(n, p, s, which).value()
