"""Parameters, exact rationals, colored permutations and their two descent notions.

A colored permutation of ``G_{p,n}`` is stored in one-line form: ``pos`` holds
sigma(1..n) and ``col`` the colors sigma_c(1..n) in ``0..p-1``.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Literal, Sequence

Sign = Literal["+", "-"]
Which = Literal["usual", "dash"]

DEFAULT_BUDGET = 10**7
BUDGET_ENV = "COLORED_RIFFLE_BUDGET"


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class UnsupportedCombination(DomainError):
    """Parameter combination for which no formula exists (e.g. wrong sign)."""


class ResourceError(RuntimeError):
    """A configured enumeration or sampling budget would be exceeded."""


def enumeration_budget(budget: int | None = None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else DEFAULT_BUDGET


def check_budget(size: int, budget: int | None, what: str) -> None:
    limit = enumeration_budget(budget)
    if size > limit:
        shown = str(size) if size.bit_length() < 64 else f"~2^{size.bit_length() - 1}"
        raise ResourceError(f"{what}: {shown} exceeds enumeration budget {limit}")


# --------------------------------------------------------------------------
# exact rationals


def format_rational(x: Fraction | int) -> str:
    """Serialize as ``"num/den"`` (integers without slash)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            if int(den) <= 0:
                raise DomainError(f"non-positive denominator in {text!r}")
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"not a rational: {text!r}") from exc


def binom(a: int, r: int) -> int:
    """Binomial coefficient with the combinatorial convention.

    Zero whenever ``a < 0``, ``r < 0`` or ``a < r``.
    """
    if r < 0 or a < 0 or a < r:
        return 0
    return math.comb(a, r)


# --------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ShuffleParams:
    """The triple (b, n, p) together with the congruence class of b mod p.

    ``sign`` is inferred when only one of b = 1, b = -1 (mod p) holds; for
    p <= 2 both hold and it must be given explicitly.
    """

    b: int
    n: int
    p: int
    sign: Sign | None = None
    c: int = field(init=False)

    def __post_init__(self) -> None:
        b, n, p = self.b, self.n, self.p
        if not all(isinstance(v, int) for v in (b, n, p)):
            raise DomainError("b, n, p must be integers")
        if b < 2:
            raise DomainError(f"b must be >= 2, got {b}")
        if n < 1 or p < 1:
            raise DomainError(f"n and p must be positive, got n={n}, p={p}")
        plus_ok = (b - 1) % p == 0
        minus_ok = (b + 1) % p == 0
        sign = self.sign
        if sign is None:
            if plus_ok and minus_ok:
                raise DomainError(f"sign is ambiguous for b={b}, p={p}; pass '+' or '-'")
            if not (plus_ok or minus_ok):
                raise DomainError(f"b={b} is neither 1 nor -1 mod p={p}")
            sign = "+" if plus_ok else "-"
        if sign not in ("+", "-"):
            raise DomainError(f"sign must be '+' or '-', got {sign!r}")
        if sign == "+" and not plus_ok:
            raise DomainError(f"b={b} is not 1 mod p={p}")
        if sign == "-" and not minus_ok:
            raise DomainError(f"b={b} is not -1 mod p={p}")
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "c", (b - 1) // p if sign == "+" else (b + 1) // p)

    @property
    def ell(self) -> int:
        return self.n - 1 if self.p == 1 else self.n

    @property
    def pstar_inv(self) -> Fraction:
        """1/p* = 1 - 1/p."""
        return 1 - Fraction(1, self.p)

    @property
    def carry_offset(self) -> int:
        """(b-1)/p* for sign '+', (b+1)/p - 1 for sign '-'; always an integer."""
        if self.sign == "+":
            offset = (self.b - 1) * self.pstar_inv
        else:
            offset = Fraction(self.b + 1, self.p) - 1
        assert offset.denominator == 1
        return int(offset)

    @property
    def group_order(self) -> int:
        return self.p**self.n * math.factorial(self.n)

    def with_b(self, b: int) -> ShuffleParams:
        return ShuffleParams(b, self.n, self.p, self.sign if self.p <= 2 else None)

    def as_dict(self) -> dict:
        return {"b": self.b, "n": self.n, "p": self.p, "sign": self.sign, "c": self.c, "ell": self.ell}


# --------------------------------------------------------------------------
# colored permutations


@dataclass(frozen=True)
class ColoredPermutation:
    pos: tuple[int, ...]
    col: tuple[int, ...]
    p: int

    def __post_init__(self) -> None:
        pos, col = tuple(self.pos), tuple(int(c) for c in self.col)
        object.__setattr__(self, "pos", tuple(int(x) for x in pos))
        object.__setattr__(self, "col", col)
        n = len(pos)
        if n < 1 or len(col) != n:
            raise DomainError("pos and col must be non-empty and of equal length")
        if sorted(self.pos) != list(range(1, n + 1)):
            raise DomainError(f"pos is not a permutation of 1..{n}: {pos}")
        if self.p < 1 or any(not 0 <= c < self.p for c in col):
            raise DomainError(f"colors must lie in 0..{self.p - 1}: {col}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], p: int) -> ColoredPermutation:
        pairs = list(pairs)
        return cls(tuple(a for a, _ in pairs), tuple(r % p for _, r in pairs), p)

    @classmethod
    def identity(cls, n: int, p: int) -> ColoredPermutation:
        return cls(tuple(range(1, n + 1)), (0,) * n, p)

    @property
    def n(self) -> int:
        return len(self.pos)

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.pos, self.col))

    def inverse(self) -> ColoredPermutation:
        inv_pos = [0] * self.n
        inv_col = [0] * self.n
        for i, (j, q) in enumerate(self.pairs(), start=1):
            inv_pos[j - 1] = i
            inv_col[j - 1] = (-q) % self.p
        return ColoredPermutation(tuple(inv_pos), tuple(inv_col), self.p)

    def __repr__(self) -> str:
        return f"ColoredPermutation({self.pairs()}, p={self.p})"


def iter_group(n: int, p: int) -> Iterator[ColoredPermutation]:
    """All p^n n! elements of G_{p,n}, positions in lexicographic order."""
    for perm in itertools.permutations(range(1, n + 1)):
        for cols in itertools.product(range(p), repeat=n):
            yield ColoredPermutation(perm, cols, p)


# --------------------------------------------------------------------------
# orders and descents


def sigma_key(pair: tuple[int, int], p: int, which: Which = "usual") -> tuple[int, int]:
    """Sort key realising the usual order (<) or the dash order (<')."""
    i, r = pair
    if which == "usual":
        block = 0 if r == 0 else p - r
    elif which == "dash":
        block = r
    else:
        raise DomainError(f"unknown order {which!r}")
    return (block, i)


def compare_sigma(a: tuple[int, int], b: tuple[int, int], params: ShuffleParams, which: Which = "usual") -> int:
    """Return -1, 0 or 1 as ``a`` is below, equal to or above ``b``."""
    for i, r in (a, b):
        if not (1 <= i <= params.n and 0 <= r < params.p):
            raise DomainError(f"pair {(i, r)} outside [n] x Z_p")
    ka, kb = sigma_key(a, params.p, which), sigma_key(b, params.p, which)
    return (ka > kb) - (ka < kb)


def d_descent_set(sigma: ColoredPermutation, which: Which = "usual") -> tuple[int, ...]:
    """Descent positions of sigma under the usual (d) or dash (d') notion."""
    p = sigma.p
    keys = [sigma_key(pair, p, which) for pair in sigma.pairs()]
    out = [i for i in range(1, sigma.n) if keys[i - 1] > keys[i]]
    last = sigma.col[-1]
    if (which == "usual" and last != 0) or (which == "dash" and last == p - 1):
        out.append(sigma.n)
    return tuple(out)


def d(sigma: ColoredPermutation) -> int:
    return len(d_descent_set(sigma, "usual"))


def d_dash(sigma: ColoredPermutation) -> int:
    return len(d_descent_set(sigma, "dash"))


def as_positions(s: Iterable[int] | None, n: int) -> tuple[int, ...]:
    """Validate a descent set 1 <= s_1 < ... < s_k <= n."""
    s = tuple(int(x) for x in (s or ()))
    if any(b <= a for a, b in zip(s, s[1:])):
        raise DomainError(f"positions must be strictly increasing: {s}")
    if s and (s[0] < 1 or s[-1] > n):
        raise DomainError(f"positions must lie in 1..{n}: {s}")
    return s


def all_position_sets(n: int) -> Iterator[tuple[int, ...]]:
    for k in range(n + 1):
        yield from itertools.combinations(range(1, n + 1), k)


def positions_from_mask(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(n) if mask >> i & 1)


def check_labels(labels: Sequence[int], b: int) -> tuple[int, ...]:
    labels = tuple(int(x) for x in labels)
    if any(not 0 <= x < b for x in labels):
        raise DomainError(f"labels must lie in 0..{b - 1}: {labels}")
    return labels
