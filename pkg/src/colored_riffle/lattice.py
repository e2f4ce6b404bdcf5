"""Lattice paths on L / L', the LGV count, and the chain paths -> words -> labels -> shuffles.

A path is a string over ``R`` (right) and ``U`` (up). For descent positions
``s`` the sources are P_i = (s_i, 0) and the sinks Q_j = (s_j, b-1) for
j <= k and Q_{k+1} = (n, h), with h = c on L and h = b - c on L'.
"""

from __future__ import annotations

import math
from itertools import combinations
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal, Sequence

from .core import (
    ColoredPermutation,
    DomainError,
    ShuffleParams,
    Which,
    as_positions,
    binom,
    check_budget,
    check_labels,
    d_descent_set,
)
from .formulas import fraction_free_det
from .shuffle import gsr

Point = tuple[int, int]
Kind = Literal["L", "Lprime"]


@dataclass(frozen=True)
class LatticeSpec:
    params: ShuffleParams
    kind: Kind = "L"

    def __post_init__(self) -> None:
        if self.kind not in ("L", "Lprime"):
            raise DomainError(f"unknown lattice kind {self.kind!r}")

    @classmethod
    def for_params(cls, params: ShuffleParams) -> LatticeSpec:
        return cls(params, "L" if params.sign == "+" else "Lprime")

    @property
    def which(self) -> Which:
        return "usual" if self.kind == "L" else "dash"

    @property
    def h(self) -> int:
        """Height of the truncated last column."""
        return self.params.c if self.kind == "L" else self.params.b - self.params.c

    def contains(self, pt: Point) -> bool:
        x, y = pt
        n, b = self.params.n, self.params.b
        if 0 <= x < n:
            return 0 <= y <= b - 1
        return x == n and 0 <= y <= self.h

    def endpoints(self, s: Iterable[int]) -> tuple[list[Point], list[Point]]:
        s = self._interior(s)
        n, b = self.params.n, self.params.b
        sources = [(x, 0) for x in (0,) + s]
        sinks = [(x, b - 1) for x in s] + [(n, self.h)]
        return sources, sinks

    def _interior(self, s: Iterable[int]) -> tuple[int, ...]:
        s = as_positions(s, self.params.n)
        if s and s[-1] == self.params.n:
            raise DomainError("the path picture covers s_k < n only; use the formulas module for s_k = n")
        return s


@dataclass(frozen=True)
class MonotonePath:
    start: Point
    end: Point
    steps: str

    def __post_init__(self) -> None:
        dx, dy = self.end[0] - self.start[0], self.end[1] - self.start[1]
        if set(self.steps) - {"R", "U"}:
            raise DomainError(f"steps must use R/U only: {self.steps!r}")
        if self.steps.count("R") != dx or self.steps.count("U") != dy:
            raise DomainError(f"path {self.steps!r} is not a minimal path {self.start} -> {self.end}")

    def vertices(self) -> list[Point]:
        x, y = self.start
        out = [(x, y)]
        for step in self.steps:
            if step == "R":
                x += 1
            else:
                y += 1
            out.append((x, y))
        return out

    def horizontal_heights(self) -> list[int]:
        y, out = self.start[1], []
        for step in self.steps:
            if step == "U":
                y += 1
            else:
                out.append(y)
        return out


def path_count_matrix(spec: LatticeSpec, s: Iterable[int]) -> list[list[int]]:
    """Entry (i, j): number of minimal paths P_i -> Q_{j+1}."""
    s = spec._interior(s)
    sources, sinks = spec.endpoints(s)
    out = []
    for sx, sy in sources:
        row = []
        for tx, ty in sinks:
            row.append(binom(tx - sx + ty - sy, ty - sy) if tx >= sx else 0)
        out.append(row)
    return out


def lgv_count(spec: LatticeSpec, s: Iterable[int]) -> int:
    """Number of non-intersecting path systems, as the LGV determinant."""
    det = fraction_free_det(path_count_matrix(spec, s))
    assert det.denominator == 1
    return int(det)


def _paths(spec: LatticeSpec, start: Point, end: Point) -> Iterator[MonotonePath]:
    dx, dy = end[0] - start[0], end[1] - start[1]
    if dx < 0 or dy < 0:
        return
    for ups in _combinations_as_strings(dx + dy, dy):
        path = MonotonePath(start, end, ups)
        # monotone paths to a sink inside the lattice never leave it
        assert all(spec.contains(v) for v in path.vertices())
        yield path


def _combinations_as_strings(length: int, ups: int) -> Iterator[str]:
    for where in combinations(range(length), ups):
        chars = ["R"] * length
        for i in where:
            chars[i] = "U"
        yield "".join(chars)


def enumerate_path_systems(spec: LatticeSpec, s: Iterable[int], *, budget: int | None = None) -> Iterator[list[MonotonePath]]:
    """All vertex-disjoint systems P_i -> Q_{i+1}, found by depth-first search."""
    s = spec._interior(s)
    sources, sinks = spec.endpoints(s)
    sizes = [binom(t[0] - o[0] + t[1] - o[1], t[1] - o[1]) for o, t in zip(sources, sinks)]
    check_budget(math.prod(sizes), budget, "path-tuple enumeration")
    per_pair = [list(_paths(spec, o, t)) for o, t in zip(sources, sinks)]

    def extend(i: int, used: frozenset, chosen: list[MonotonePath]) -> Iterator[list[MonotonePath]]:
        if i == len(per_pair):
            yield list(chosen)
            return
        for path in per_pair[i]:
            verts = path.vertices()
            if used.isdisjoint(verts):
                chosen.append(path)
                yield from extend(i + 1, used.union(verts), chosen)
                chosen.pop()

    yield from extend(0, frozenset(), [])


def brute_force_path_count(spec: LatticeSpec, s: Iterable[int], *, budget: int | None = None) -> int:
    return sum(1 for _ in enumerate_path_systems(spec, s, budget=budget))


def is_non_intersecting(paths: Sequence[MonotonePath]) -> bool:
    seen: set[Point] = set()
    for path in paths:
        verts = set(path.vertices())
        if seen & verts:
            return False
        seen |= verts
    return True


def path_system_to_word(paths: Sequence[MonotonePath], spec: LatticeSpec) -> tuple[int, ...]:
    """Concatenate the heights of horizontal edges, path by path."""
    sources = [path.start for path in paths]
    if not paths or sources[0] != (0, 0):
        raise DomainError("the first path must start at (0, 0)")
    s = tuple(x for x, _ in sources[1:])
    exp_sources, exp_sinks = spec.endpoints(s)
    if sources != exp_sources or [path.end for path in paths] != exp_sinks:
        raise DomainError("path endpoints do not match the lattice for these positions")
    if not is_non_intersecting(paths):
        raise DomainError("path system is intersecting")
    if not all(spec.contains(v) for path in paths for v in path.vertices()):
        raise DomainError("path leaves the lattice")
    return tuple(y for path in paths for y in path.horizontal_heights())


def word_descent_set(word: Sequence[int], params: ShuffleParams, which: Which = "usual") -> tuple[int, ...]:
    """Plain descents of X: X_k > X_{k+1}, and X_n > c (usual) or X_n > b - c (dash)."""
    word = check_labels(word, params.b)
    n = len(word)
    out = [k for k in range(1, n) if word[k - 1] > word[k]]
    h = params.c if which == "usual" else params.b - params.c
    if word[-1] > h:
        out.append(n)
    return tuple(out)


def word_to_path_system(word: Sequence[int], spec: LatticeSpec) -> list[MonotonePath]:
    """Inverse of path_system_to_word on words whose descent set avoids n."""
    params = spec.params
    word = check_labels(word, params.b)
    if len(word) != params.n:
        raise DomainError(f"expected a word of length {params.n}")
    s = word_descent_set(word, params, spec.which)
    sources, sinks = spec.endpoints(s)
    bounds = (0,) + s + (params.n,)
    paths = []
    for i, (src, dst) in enumerate(zip(sources, sinks)):
        y, steps = 0, []
        for height in word[bounds[i] : bounds[i + 1]]:
            steps.append("U" * (height - y) + "R")
            y = height
        steps.append("U" * (dst[1] - y))
        paths.append(MonotonePath(src, dst, "".join(steps)))
    return paths


def paths_to_json(paths: Sequence[MonotonePath]) -> list[str]:
    return [path.steps for path in paths]


def paths_from_json(steps: Sequence[str], spec: LatticeSpec, s: Iterable[int]) -> list[MonotonePath]:
    sources, sinks = spec.endpoints(s)
    if len(steps) != len(sources):
        raise DomainError(f"expected {len(sources)} paths, got {len(steps)}")
    return [MonotonePath(o, t, st) for o, t, st in zip(sources, sinks, steps)]


# --------------------------------------------------------------------------
# words -> labels -> shuffles


def tilde_key(x: int, params: ShuffleParams) -> tuple[int, int]:
    """Sort key of the tilde order (sign '+') or tilde' order (sign '-') on D(b)."""
    j, r = divmod(x, params.p)
    if params.sign == "+":
        return (0 if r == 0 else params.p - r, j)
    return (r, j)


def tilde_map(x: int, params: ShuffleParams) -> int:
    """f(x) = p x mod b, the order isomorphism (D(b), <) -> (D(b), tilde order)."""
    if not 0 <= x < params.b:
        raise DomainError(f"{x} is outside D({params.b})")
    return params.p * x % params.b


def tilde_descent_set(labels: Sequence[int], params: ShuffleParams) -> tuple[int, ...]:
    """Tilde-descents (sign '+') or tilde'-descents (sign '-') of a label word."""
    labels = check_labels(labels, params.b)
    keys = [tilde_key(a, params) for a in labels]
    n, p = len(labels), params.p
    out = [k for k in range(1, n) if keys[k - 1] > keys[k]]
    last = labels[-1] % p
    if (params.sign == "+" and last != 0) or (params.sign == "-" and last == p - 1):
        out.append(n)
    return tuple(out)


def word_to_shuffle(labels: Sequence[int], params: ShuffleParams) -> ColoredPermutation:
    """Alias of shuffle.gsr closing the chain paths -> words -> labels -> shuffles."""
    return gsr(labels, params)


def chain(paths: Sequence[MonotonePath], spec: LatticeSpec) -> dict:
    """Run one path system through every stage of the bijection."""
    params = spec.params
    word = path_system_to_word(paths, spec)
    labels = tuple(tilde_map(x, params) for x in word)
    sigma = word_to_shuffle(labels, params)
    return {
        "word": word,
        "word_descents": word_descent_set(word, params, spec.which),
        "labels": labels,
        "label_descents": tilde_descent_set(labels, params),
        "sigma": sigma,
        "sigma_descents": d_descent_set(sigma, spec.which),
    }
