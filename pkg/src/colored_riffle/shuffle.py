"""The (b,n,p)-shuffle built from GSR label words, plus its exact and sampled oracles."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    ColoredPermutation,
    DomainError,
    ShuffleParams,
    Which,
    binom,
    check_budget,
    check_labels,
    d,
    d_dash,
    positions_from_mask,
)

CHUNK = 1 << 17


def gsr(labels: Sequence[int], params: ShuffleParams) -> ColoredPermutation:
    """pi[A]: rank the cards by label (stable), color card i by A_i mod p."""
    labels = check_labels(labels, params.b)
    if len(labels) != params.n:
        raise DomainError(f"expected {params.n} labels, got {len(labels)}")
    order = sorted(range(params.n), key=lambda i: (labels[i], i))
    pos = [0] * params.n
    for rank, i in enumerate(order, start=1):
        pos[i] = rank
    return ColoredPermutation(tuple(pos), tuple(a % params.p for a in labels), params.p)


def compose(sigma: ColoredPermutation, tau: ColoredPermutation) -> ColoredPermutation:
    """sigma o tau: apply tau first, then sigma."""
    if sigma.n != tau.n or sigma.p != tau.p:
        raise DomainError("compose needs elements of the same G_{p,n}")
    p = sigma.p
    pos = tuple(sigma.pos[j - 1] for j in tau.pos)
    col = tuple((sigma.col[j - 1] + q) % p for j, q in zip(tau.pos, tau.col))
    return ColoredPermutation(pos, col, p)


def reverse_colors(sigma: ColoredPermutation) -> ColoredPermutation:
    """R: (sigma(i), sigma_c(i)) -> (sigma(i), -sigma_c(i) mod p)."""
    return ColoredPermutation(sigma.pos, tuple((-q) % sigma.p for q in sigma.col), sigma.p)


def single_probability(sigma: ColoredPermutation, params: ShuffleParams, *, reversed_: bool = False) -> Fraction:
    """Exact probability that one (b,n,p)-shuffle equals ``sigma``.

    With ``reversed_=True`` the probability of R o shuffle is returned instead.
    For b = pc+1 this is b^-n C(n + c - d(sigma^-1), n); for b = pc-1,
    P(R o shuffle = sigma) = b^-n C(n + c - 1 - d'(sigma^-1), n).
    """
    if sigma.n != params.n or sigma.p != params.p:
        raise DomainError("sigma does not belong to G_{p,n} of these params")
    b, n, c = params.b, params.n, params.c
    if params.sign == "+":
        target = reverse_colors(sigma) if reversed_ else sigma
        return Fraction(binom(n + c - d(target.inverse()), n), b**n)
    target = sigma if reversed_ else reverse_colors(sigma)
    return Fraction(binom(n + c - 1 - d_dash(target.inverse()), n), b**n)


@dataclass(frozen=True)
class ShuffleDistribution:
    """Per-element weight of the (b,n,p)-shuffle keyed by its class statistic.

    For sign '+' the statistic is d(sigma^-1); for sign '-' it is
    d'((R sigma)^-1).
    """

    params: ShuffleParams
    by_descent_class: dict[int, Fraction]

    def weight(self, sigma: ColoredPermutation) -> Fraction:
        return self.by_descent_class[self.statistic(sigma)]

    def statistic(self, sigma: ColoredPermutation) -> int:
        if self.params.sign == "+":
            return d(sigma.inverse())
        return d_dash(reverse_colors(sigma).inverse())


def shuffle_distribution(params: ShuffleParams) -> ShuffleDistribution:
    b, n, c = params.b, params.n, params.c
    if params.sign == "+":
        weights = {i: Fraction(binom(n + c - i, n), b**n) for i in range(params.ell + 1)}
    else:
        weights = {i: Fraction(binom(n + c - 1 - i, n), b**n) for i in range(n + 1)}
    return ShuffleDistribution(params, weights)


# --------------------------------------------------------------------------
# vectorised GSR for the exhaustive and Monte Carlo oracles


def _digits(start: int, stop: int, b: int, n: int) -> np.ndarray:
    """Label words with odometer indices start..stop-1 (A_1 most significant)."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((stop - start, n), dtype=np.int64)
    for col in range(n - 1, -1, -1):
        out[:, col] = idx % b
        idx //= b
    return out


def gsr_batch(labels: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise gsr: returns (pos, col) arrays with 1-based positions."""
    order = np.argsort(labels, axis=1, kind="stable")
    pos = np.empty_like(order)
    rows = np.arange(labels.shape[0])[:, None]
    pos[rows, order] = np.arange(1, labels.shape[1] + 1)
    return pos, labels % p


def descent_masks(pos: np.ndarray, col: np.ndarray, p: int, which: Which = "usual") -> np.ndarray:
    """Bitmask (bit i-1 <-> position i) of the descent set of each row."""
    n = pos.shape[1]
    if which == "usual":
        block = np.where(col == 0, 0, p - col)
        last = col[:, -1] != 0
    elif which == "dash":
        block = col
        last = col[:, -1] == p - 1
    else:
        raise DomainError(f"unknown order {which!r}")
    key = block * (n + 1) + pos
    mask = np.zeros(pos.shape[0], dtype=np.int64)
    for i in range(n - 1):
        mask |= (key[:, i] > key[:, i + 1]).astype(np.int64) << i
    mask |= last.astype(np.int64) << (n - 1)
    return mask


def descent_counts(pos: np.ndarray, col: np.ndarray, p: int, which: Which = "usual") -> np.ndarray:
    masks = descent_masks(pos, col, p, which)
    bits = np.zeros_like(masks)
    for i in range(pos.shape[1]):
        bits += (masks >> i) & 1
    return bits


def enumerate_descent_counts(
    params: ShuffleParams, which: Which = "usual", *, budget: int | None = None, threads: int = 1
) -> dict[tuple[int, ...], int]:
    """Exact tally of descent sets over all b^n label words."""
    b, n, p = params.b, params.n, params.p
    total = b**n
    check_budget(total, budget, f"enumeration of {b}^{n} label words")
    chunks = [(s, min(s + CHUNK, total)) for s in range(0, total, CHUNK)]

    def work(bounds: tuple[int, int]) -> np.ndarray:
        pos, col = gsr_batch(_digits(*bounds, b, n), p)
        return np.bincount(descent_masks(pos, col, p, which), minlength=1 << n)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(ch) for ch in chunks]
    counts = np.sum(parts, axis=0)
    return {positions_from_mask(m, n): int(v) for m, v in enumerate(counts) if v}


def enumerate_descent_probabilities(
    params: ShuffleParams, which: Which = "usual", *, budget: int | None = None, threads: int = 1
) -> dict[tuple[int, ...], Fraction]:
    """Brute-force descent-set distribution; keys are the observed descent sets."""
    total = params.b**params.n
    counts = enumerate_descent_counts(params, which, budget=budget, threads=threads)
    return {s: Fraction(v, total) for s, v in counts.items()}


# --------------------------------------------------------------------------
# random walks


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def compose_batch(
    s_pos: np.ndarray, s_col: np.ndarray, t_pos: np.ndarray, t_col: np.ndarray, p: int
) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise s o t."""
    idx = t_pos - 1
    pos = np.take_along_axis(s_pos, idx, axis=1)
    col = (np.take_along_axis(s_col, idx, axis=1) + t_col) % p
    return pos, col


def sample_walk(
    params: ShuffleParams, steps: int, seed: int, *, reverse_even: bool | None = None
) -> list[ColoredPermutation]:
    """sigma(0) = id, sigma(k) = S o sigma(k-1) with a fresh shuffle S per step.

    ``reverse_even`` (default: sign is '-') gives the variant walk for
    b = -1 (mod p): on even steps the fresh shuffle is replaced by R o S
    before it is composed, i.e. sigma'(k) = (R o S) o sigma'(k-1).
    """
    if steps < 0:
        raise DomainError("steps must be non-negative")
    if reverse_even is None:
        reverse_even = params.sign == "-"
    rng = make_rng(seed)
    sigma = ColoredPermutation.identity(params.n, params.p)
    walk = [sigma]
    for k in range(1, steps + 1):
        labels = rng.integers(0, params.b, size=params.n)
        step = gsr(labels.tolist(), params)
        if reverse_even and k % 2 == 0:
            step = reverse_colors(step)
        sigma = compose(step, sigma)
        walk.append(sigma)
    return walk


def sample_descent_distribution(
    params: ShuffleParams, walks: int, seed: int, which: Which = "usual"
) -> Counter:
    """Empirical law of d(sigma(1)) over independent one-step walks."""
    rng = make_rng(seed)
    labels = rng.integers(0, params.b, size=(walks, params.n))
    pos, col = gsr_batch(labels, params.p)
    return Counter(descent_counts(pos, col, params.p, which).tolist())
