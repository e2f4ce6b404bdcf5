"""Total-variation distance of the shuffle walk from uniform, exact and asymptotic."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import gmpy2

from .carries import descent_class_sizes
from .core import DomainError, ResourceError, ShuffleParams, UnsupportedCombination, format_rational, iter_group, d
from .shuffle import single_probability

K_RULE = "k = max(0, floor(3/2*log_b(n) + j + 1/2)); tv_asymptotic evaluated at j_eff = k - 3/2*log_b(n)"
CSV_COLUMNS = ["j", "k", "tv_exact", "tv_exact_float", "tv_asymptotic", "j_eff"]


@dataclass(frozen=True)
class TVCurvePoint:
    j: float
    k: int
    tv_exact: Fraction
    tv_asymptotic: float
    j_eff: float

    @property
    def tv_exact_float(self) -> float:
        return float(self.tv_exact)

    def as_row(self) -> list[str]:
        return [
            repr(float(self.j)),
            str(self.k),
            format_rational(self.tv_exact),
            repr(self.tv_exact_float),
            repr(self.tv_asymptotic),
            repr(self.j_eff),
        ]


def _require_plus(params: ShuffleParams) -> None:
    if params.sign != "+":
        raise UnsupportedCombination("the cutoff computation covers b = 1 (mod p)")


@lru_cache(maxsize=8)
def _class_sizes(n: int, p: int, upto: int) -> tuple[int, ...]:
    return tuple(descent_class_sizes(n, p, upto=upto))


def _weights(n: int, p: int, B: int, count: int) -> list[gmpy2.mpz]:
    """binom(n + (B-1)/p - i, n) for i = 0..count-1, by the downward recurrence."""
    M = (B - 1) // p
    w = gmpy2.comb(n + M, n)
    out = [w]
    for i in range(count - 1):
        w = w * (M - i) // (n + M - i) if M - i > 0 else gmpy2.mpz(0)
        out.append(w)
    return out


def exact_tv(params: ShuffleParams, k: int) -> Fraction:
    """||Q^k - pi||_TV over the descent classes of sigma^-1.

    The k-step walk is a (b^k)-shuffle, whose weight on sigma only depends
    on d(sigma^-1); the weights decrease in that statistic, so only the
    classes above the uniform level contribute.
    """
    _require_plus(params)
    if k < 0:
        raise DomainError("k must be non-negative")
    n, p, ell = params.n, params.p, params.ell
    G = p**n * math.factorial(n)
    B = params.b**k
    Bn = gmpy2.mpz(B) ** n
    weights = _weights(n, p, B, ell + 1)
    # classes i with weight/B^n > 1/|G|
    top = 0
    while top <= ell and weights[top] * G > Bn:
        top += 1
    if top == 0:
        return Fraction(0)
    upto = min(ell, (n + 1) // 2)
    if top - 1 > upto:
        upto = ell
    sizes = _class_sizes(n, p, upto)
    if len(sizes) < top:
        raise ResourceError("descent class sizes do not cover the positive part")
    s1 = sum((gmpy2.mpz(sizes[i]) * weights[i] for i in range(top)), gmpy2.mpz(0))
    s2 = sum(sizes[:top])
    q = gmpy2.mpq(s1 * G - s2 * Bn, Bn * G)
    return Fraction(int(q.numerator), int(q.denominator))


def full_tv(params: ShuffleParams, k: int) -> Fraction:
    """Independent TV over the whole group using single_probability at base b^k."""
    _require_plus(params)
    base = ShuffleParams(params.b**k, params.n, params.p, "+") if k else None
    G = params.group_order
    uniform = Fraction(1, G)
    total = Fraction(0)
    for sigma in iter_group(params.n, params.p):
        if base is None:
            mass = Fraction(1 if sigma.pos == tuple(range(1, params.n + 1)) and not any(sigma.col) else 0)
        else:
            mass = single_probability(sigma, base)
        total += abs(mass - uniform)
    return total / 2


def asymptotic_tv(params: ShuffleParams, j: float) -> float:
    """1 - 2 Phi(-p b^-j / (4 sqrt 3)), written as erf(p b^-j / (4 sqrt 6))."""
    x = params.p * float(params.b) ** (-j) / (4 * math.sqrt(6))
    return math.erf(x)


def steps_for(params: ShuffleParams, j: float) -> int:
    return max(0, math.floor(1.5 * math.log(params.n, params.b) + j + 0.5))


def curve_point(params: ShuffleParams, j: float) -> TVCurvePoint:
    k = steps_for(params, j)
    j_eff = k - 1.5 * math.log(params.n, params.b)
    return TVCurvePoint(j, k, exact_tv(params, k), asymptotic_tv(params, j_eff), j_eff)


def j_grid(j_min: float, j_max: float, step: float) -> list[float]:
    if step <= 0 or j_max < j_min:
        raise DomainError("need step > 0 and j_max >= j_min")
    count = int(math.floor((j_max - j_min) / step + 1e-9)) + 1
    return [j_min + i * step for i in range(count)]


def cutoff_curve(
    params: ShuffleParams, j_min: float, j_max: float, step: float, *, threads: int = 1
) -> list[TVCurvePoint]:
    _require_plus(params)
    grid = j_grid(j_min, j_max, step)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda j: curve_point(params, j), grid))
    return [curve_point(params, j) for j in grid]


def curve_to_csv(points: Sequence[TVCurvePoint]) -> str:
    buf = io.StringIO()
    buf.write(f"# {K_RULE}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for pt in points:
        writer.writerow(pt.as_row())
    return buf.getvalue()


def max_deviation(params: ShuffleParams, js: Sequence[float] = (-2, -1, 0, 1, 2)) -> float:
    return max(abs(pt.tv_exact_float - pt.tv_asymptotic) for pt in (curve_point(params, j) for j in js))
