"""Exact group-algebra computations in Q[G_{p,n}] for tiny groups.

Elements of G_{p,n} are indexed by (lexicographic rank of the position word)
* p^n + (color word read in base p, first color most significant), which is
the order of ``core.iter_group``.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Mapping

import numpy as np

from .carries import _poly_mul, u_matrix, v_matrix
from .core import (
    ColoredPermutation,
    DomainError,
    ResourceError,
    ShuffleParams,
    UnsupportedCombination,
    binom,
    d,
    d_dash,
    iter_group,
)
from .shuffle import compose, reverse_colors, single_probability

GROUP_CAP = 10**4
TABLE_CAP = 2_000


class Group:
    """G_{p,n} with cached element list, inverses and descent statistics."""

    def __init__(self, n: int, p: int, cap: int = GROUP_CAP):
        order = p**n * math.factorial(n)
        if order > cap:
            raise ResourceError(f"|G_{{{p},{n}}}| = {order} exceeds the group-algebra cap {cap}")
        self.n, self.p, self.order = n, p, order
        self.elements = list(iter_group(n, p))
        self.index = {g: i for i, g in enumerate(self.elements)}
        self.identity = self.index[ColoredPermutation.identity(n, p)]
        self.ell = n - 1 if p == 1 else n

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Group) and (self.n, self.p) == (other.n, other.p)

    def __hash__(self) -> int:
        return hash((self.n, self.p))

    @cached_property
    def inverse(self) -> list[int]:
        return [self.index[g.inverse()] for g in self.elements]

    @cached_property
    def reversal(self) -> list[int]:
        return [self.index[reverse_colors(g)] for g in self.elements]

    @cached_property
    def des(self) -> list[int]:
        return [d(g) for g in self.elements]

    @cached_property
    def des_dash(self) -> list[int]:
        return [d_dash(g) for g in self.elements]

    @cached_property
    def table(self) -> np.ndarray | None:
        if self.order > TABLE_CAP:
            return None
        out = np.empty((self.order, self.order), dtype=np.int32)
        for i, g in enumerate(self.elements):
            for j, h in enumerate(self.elements):
                out[i, j] = self.index[compose(g, h)]
        return out

    def mul(self, i: int, j: int) -> int:
        table = self.table
        if table is not None:
            return int(table[i, j])
        return self.index[compose(self.elements[i], self.elements[j])]


@lru_cache(maxsize=None)
def group(n: int, p: int) -> Group:
    return Group(n, p)


@dataclass(frozen=True)
class GroupAlgebraElement:
    group: Group
    coeffs: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {int(k): Fraction(v) for k, v in self.coeffs.items() if v}
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def basis(cls, G: Group, sigma: ColoredPermutation | int) -> GroupAlgebraElement:
        idx = sigma if isinstance(sigma, int) else G.index[sigma]
        return cls(G, {idx: Fraction(1)})

    @classmethod
    def sum_of(cls, G: Group, indices: Iterable[int], weight: Fraction | int = 1) -> GroupAlgebraElement:
        out: dict[int, Fraction] = defaultdict(Fraction)
        for i in indices:
            out[i] += weight
        return cls(G, out)

    def coefficient(self, sigma: ColoredPermutation | int) -> Fraction:
        idx = sigma if isinstance(sigma, int) else self.group.index[sigma]
        return self.coeffs.get(idx, Fraction(0))

    def _check(self, other: GroupAlgebraElement) -> None:
        if self.group != other.group:
            raise DomainError("elements live in different group algebras")

    def __add__(self, other: GroupAlgebraElement) -> GroupAlgebraElement:
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return GroupAlgebraElement(self.group, out)

    def __sub__(self, other: GroupAlgebraElement) -> GroupAlgebraElement:
        return self + other.scale(-1)

    def scale(self, x: Fraction | int) -> GroupAlgebraElement:
        return GroupAlgebraElement(self.group, {k: v * x for k, v in self.coeffs.items()})

    def __mul__(self, other: GroupAlgebraElement) -> GroupAlgebraElement:
        return convolve(self, other)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GroupAlgebraElement) and self.group == other.group and self.coeffs == other.coeffs

    def reversed(self) -> GroupAlgebraElement:
        """Apply R to every basis element."""
        rev = self.group.reversal
        return GroupAlgebraElement(self.group, {rev[k]: v for k, v in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs


def zero(G: Group) -> GroupAlgebraElement:
    return GroupAlgebraElement(G, {})


def convolve(a: GroupAlgebraElement, b: GroupAlgebraElement) -> GroupAlgebraElement:
    """(a * b)(sigma) = sum over mu tau = sigma of a(mu) b(tau), with mu tau = compose(mu, tau)."""
    a._check(b)
    G = a.group
    out: dict[int, Fraction] = defaultdict(Fraction)
    for i, x in a.coeffs.items():
        for j, y in b.coeffs.items():
            out[G.mul(i, j)] += x * y
    return GroupAlgebraElement(G, out)


def linear_combination(G: Group, terms: Iterable[tuple[Fraction, GroupAlgebraElement]]) -> GroupAlgebraElement:
    out = zero(G)
    for w, x in terms:
        out = out + x.scale(w)
    return out


# --------------------------------------------------------------------------
# descent algebra


def D(G: Group, i: int) -> GroupAlgebraElement:
    """Sum of sigma with d(sigma) = i."""
    return GroupAlgebraElement.sum_of(G, (k for k, v in enumerate(G.des) if v == i))


def Theta(G: Group, i: int) -> GroupAlgebraElement:
    """Sum of sigma with d(sigma^-1) = i."""
    inv = G.inverse
    return GroupAlgebraElement.sum_of(G, (k for k in range(G.order) if G.des[inv[k]] == i))


def Theta_dash(G: Group, i: int) -> GroupAlgebraElement:
    """Sum of sigma with d'(sigma^-1) = i."""
    inv = G.inverse
    return GroupAlgebraElement.sum_of(G, (k for k in range(G.order) if G.des_dash[inv[k]] == i))


@lru_cache(maxsize=None)
def _gessel_table(n: int, p: int) -> tuple[dict[tuple[int, int], int], ...]:
    G = group(n, p)
    des = G.des
    table: list[dict[tuple[int, int], int]] = [defaultdict(int) for _ in range(G.order)]
    for mu in range(G.order):
        for tau in range(G.order):
            table[G.mul(mu, tau)][des[mu], des[tau]] += 1
    return tuple(dict(t) for t in table)


def gessel_coefficients(n: int, p: int, i: int, j: int, sigma: ColoredPermutation) -> int:
    """c_ij^sigma = #{(mu, tau) : d(mu) = i, d(tau) = j, mu tau = sigma}."""
    G = group(n, p)
    return _gessel_table(n, p)[G.index[sigma]].get((i, j), 0)


def gessel_check(n: int, p: int, truncation: int = 4) -> dict:
    """Class-function property, symmetry and the generating-function identity of c_ij^sigma."""
    if truncation > 6:
        raise DomainError("truncation above 6 is not supported")
    G = group(n, p)
    table = _gessel_table(n, p)
    ell = G.ell
    by_class: dict[int, dict] = {}
    class_function = True
    for idx, c in enumerate(table):
        k = G.des[idx]
        if k in by_class and by_class[k] != c:
            class_function = False
        by_class.setdefault(k, c)
    symmetric = all(c.get((i, j), 0) == c.get((j, i), 0) for c in table for i in range(ell + 1) for j in range(ell + 1))
    totals = all(sum(c.values()) == G.order for c in table)
    gf_ok = True
    for idx, c in enumerate(table):
        k = G.des[idx]
        for a, bb in itertools.product(range(truncation + 1), repeat=2):
            lhs = sum(v * binom(n + a - i, n) * binom(n + bb - j, n) for (i, j), v in c.items())
            if lhs != binom(n + p * a * bb + a + bb - k, n):
                gf_ok = False
    return {
        "n": n,
        "p": p,
        "truncation": truncation,
        "class_function": class_function,
        "symmetric": symmetric,
        "row_totals": totals,
        "generating_function": gf_ok,
        "coefficients": {k: {f"{i},{j}": v for (i, j), v in sorted(c.items())} for k, c in sorted(by_class.items())},
        "passed": class_function and symmetric and totals and gf_ok,
    }


def descent_algebra_check(n: int, p: int) -> bool:
    """D_i D_j = sum_k c_ij^k D_k = D_j D_i, and the same for Theta."""
    G = group(n, p)
    table = _gessel_table(n, p)
    ell = G.ell
    rep = {G.des[idx]: table[idx] for idx in range(G.order)}
    Ds = [D(G, i) for i in range(ell + 1)]
    Ts = [Theta(G, i) for i in range(ell + 1)]
    for i, j in itertools.product(range(ell + 1), repeat=2):
        expected = linear_combination(G, ((rep[k].get((i, j), 0), Ds[k]) for k in rep))
        if Ds[i] * Ds[j] != expected or Ds[i] * Ds[j] != Ds[j] * Ds[i]:
            return False
        if Ts[i] * Ts[j] != Ts[j] * Ts[i]:
            return False
    return True


# --------------------------------------------------------------------------
# shuffle elements and idempotents


def shuffle_element(params: ShuffleParams) -> GroupAlgebraElement:
    """S = sum_sigma P(shuffle = sigma) sigma."""
    G = group(params.n, params.p)
    return GroupAlgebraElement(G, {i: single_probability(g, params) for i, g in enumerate(G.elements)})


def inverse_shuffle_element(params: ShuffleParams) -> GroupAlgebraElement:
    """T = sum_sigma P(shuffle^-1 = sigma) sigma."""
    S = shuffle_element(params)
    inv = S.group.inverse
    return GroupAlgebraElement(S.group, {inv[k]: v for k, v in S.coeffs.items()})


def idempotents(n: int, p: int) -> tuple[list[GroupAlgebraElement], list[GroupAlgebraElement]]:
    """(e_0..e_ell, f_0..f_ell) with e_{ell-k} = sum_i u_ik Theta_i and f_{ell-k} = sum_i u_ik D_i."""
    G = group(n, p)
    U = u_matrix(n, p)
    ell = G.ell
    thetas = [Theta(G, i) for i in range(ell + 1)]
    ds = [D(G, i) for i in range(ell + 1)]
    e = [zero(G)] * (ell + 1)
    f = [zero(G)] * (ell + 1)
    for k in range(ell + 1):
        e[ell - k] = linear_combination(G, ((U[i][k], thetas[i]) for i in range(ell + 1)))
        f[ell - k] = linear_combination(G, ((U[i][k], ds[i]) for i in range(ell + 1)))
    return e, f


def idempotent_check(params: ShuffleParams) -> dict:
    """Orthogonality, resolution of the identity, S = sum_k b^-k e_{ell-k} and Theta_i = sum_k v_ki e_{ell-k}."""
    if params.sign != "+":
        raise UnsupportedCombination("idempotent decomposition needs b = 1 (mod p)")
    n, p = params.n, params.p
    G = group(n, p)
    ell = G.ell
    e, f = idempotents(n, p)
    delta = GroupAlgebraElement.basis(G, G.identity)
    orthogonal = all(e[j] * e[k] == (e[j] if j == k else zero(G)) for j in range(ell + 1) for k in range(ell + 1))
    f_orthogonal = all(f[j] * f[k] == (f[j] if j == k else zero(G)) for j in range(ell + 1) for k in range(ell + 1))
    resolution = linear_combination(G, ((1, x) for x in e)) == delta
    S = shuffle_element(params)
    S_expansion = linear_combination(G, ((Fraction(1, params.b**k), e[ell - k]) for k in range(ell + 1))) == S
    T = inverse_shuffle_element(params)
    T_expansion = linear_combination(G, ((Fraction(1, params.b**k), f[ell - k]) for k in range(ell + 1))) == T
    V = v_matrix(n, p)
    theta_expansion = all(
        linear_combination(G, ((V[k][i], e[ell - k]) for k in range(ell + 1))) == Theta(G, i) for i in range(ell + 1)
    )
    checks = {
        "orthogonal_idempotents": orthogonal,
        "f_orthogonal_idempotents": f_orthogonal,
        "resolution_of_identity": resolution,
        "shuffle_expansion": S_expansion,
        "inverse_shuffle_expansion": T_expansion,
        "theta_expansion": theta_expansion,
    }
    return {"params": params.as_dict(), **checks, "passed": all(checks.values())}


def multiplicity(n: int, p: int, j: int) -> int:
    """Multiplicity of the eigenvalue b^-j of the walk: u_0j p^n n!."""
    ell = n - 1 if p == 1 else n
    if not 0 <= j <= ell:
        raise DomainError(f"j must lie in 0..{ell}")
    value = u_matrix(n, p)[0][j] * p**n * math.factorial(n)
    assert value.denominator == 1 and value >= 0
    return int(value)


def left_regular_matrix(x: GroupAlgebraElement) -> list[list[Fraction]]:
    """Matrix of tau -> x * tau in the group basis."""
    G = x.group
    M = [[Fraction(0)] * G.order for _ in range(G.order)]
    for tau in range(G.order):
        for mu, v in x.coeffs.items():
            M[G.mul(mu, tau)][tau] += v
    return M


def exact_rank(M: list[list[Fraction]]) -> int:
    A = [list(r) for r in M]
    rows, cols = len(A), len(A[0]) if A else 0
    rank = 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if A[r][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for r in range(rows):
            if r != rank and A[r][c] != 0:
                f = A[r][c] / A[rank][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank


def multiplicity_check(n: int, p: int, *, rank: bool = False) -> dict:
    """Compare u_0j p^n n! with trace (and optionally rank) of L(e_{ell-j})."""
    G = group(n, p)
    ell = G.ell
    e, _ = idempotents(n, p)
    rows = []
    for j in range(ell + 1):
        idem = e[ell - j]
        trace = G.order * idem.coefficient(G.identity)
        row = {"j": j, "multiplicity": multiplicity(n, p, j), "trace": trace}
        if rank:
            row["rank"] = exact_rank(left_regular_matrix(idem))
        rows.append(row)
    total_ok = sum(r["multiplicity"] for r in rows) == G.order
    ok = total_ok and all(r["trace"] == r["multiplicity"] and r.get("rank", r["trace"]) == r["multiplicity"] for r in rows)
    return {"n": n, "p": p, "rows": rows, "sum_equals_order": total_ok, "passed": ok}


# --------------------------------------------------------------------------
# b = -1 (mod p)


@lru_cache(maxsize=None)
def w_matrix(n: int, p: int) -> tuple[tuple[Fraction, ...], ...]:
    """w_ik = [x^(n-k)] binom(n + (x+1)/p - 1 - i, n), for i, k in 0..n."""
    rows = []
    for i in range(n + 1):
        poly = [Fraction(1)]
        for t in range(n):
            poly = _poly_mul(poly, [Fraction(n - 1 - i - t) + Fraction(1, p), Fraction(1, p)])
        poly = [x / math.factorial(n) for x in poly]
        rows.append(tuple(poly[n - k] for k in range(n + 1)))
    return tuple(rows)


def minus_power(S: GroupAlgebraElement, N: int) -> GroupAlgebraElement:
    """Z_1 = S, Z_N = S * R(Z_{N-1}).

    This is the N-fold composition for which (b) o (b') has the law of
    R o (b b') when b' = -1 (mod p), under the compose() convention.
    """
    out = S
    for _ in range(N - 1):
        out = S * out.reversed()
    return out


def minus_witness(params: ShuffleParams, powers: int = 3) -> dict:
    """Check the alternating closed form for b = pc - 1 and look for the non-diagonalisability witness.

    Closed form: sum_k b^-kN sum_i w_ik R(Theta'_i) for odd N and
    sum_k b^-kN sum_i u_ik R(Theta_i) for even N. It is compared with
    ``minus_power`` and, for the record, with the plain convolution power S^N.
    """
    if params.sign != "-":
        raise UnsupportedCombination("the witness concerns b = -1 (mod p)")
    n, p, b = params.n, params.p, params.b
    G = group(n, p)
    ell = G.ell
    U, W = u_matrix(n, p), w_matrix(n, p)
    theta_rev = [Theta(G, i).reversed() for i in range(ell + 1)]
    theta_dash_rev = [Theta_dash(G, i).reversed() for i in range(n + 1)]
    odd_parts = [linear_combination(G, ((W[i][k], theta_dash_rev[i]) for i in range(n + 1))) for k in range(n + 1)]
    even_parts = [linear_combination(G, ((U[i][k], theta_rev[i]) for i in range(ell + 1))) for k in range(ell + 1)]
    S = shuffle_element(params)
    closed_form, plain = {}, {}
    power = S
    for N in range(1, powers + 1):
        if N > 1:
            power = power * S
        parts = odd_parts if N % 2 else even_parts
        expected = linear_combination(G, ((Fraction(1, b ** (k * N)), x) for k, x in enumerate(parts)))
        closed_form[N] = minus_power(S, N) == expected
        plain[N] = power == expected
    components = {k: odd_parts[k] == even_parts[k] for k in range(ell + 1)}
    witness = [k for k in range(1, ell + 1) if not components[k]]
    passed = all(closed_form.values()) and components[0] and bool(witness)
    return {
        "params": params.as_dict(),
        "closed_form": closed_form,
        "plain_power_matches": plain,
        "components_agree": components,
        "witness_k": witness,
        "passed": passed,
    }


def coefficient_table(x: GroupAlgebraElement) -> list[dict]:
    return [{"sigma": x.group.elements[k].pairs(), "coeff": v} for k, v in sorted(x.coeffs.items())]


__all__ = [
    "Group",
    "GroupAlgebraElement",
    "convolve",
    "D",
    "Theta",
    "Theta_dash",
    "gessel_coefficients",
    "gessel_check",
    "descent_algebra_check",
    "shuffle_element",
    "inverse_shuffle_element",
    "idempotents",
    "idempotent_check",
    "multiplicity",
    "multiplicity_check",
    "minus_power",
    "minus_witness",
    "w_matrix",
    "exact_rank",
]
