"""Lattice paths from ``(N, 1)`` through the modified transient set.

The step rates here are written out per model rather than taken from
:meth:`ChainSpec.transitions`, so path sums serve as an independent check on
the back-substitution solver.
"""

from __future__ import annotations

from math import comb
from typing import NamedTuple

from .chain import PAIR_STIFLE, SPREAD, STIFLE, ChainSpec, DomainError, Kind, State, StateSpace

DEFAULT_MAX_N = 12


class PathLimitError(ValueError):
    """Exhaustive enumeration refused because N exceeds the guard."""


class Path(NamedTuple):
    vertices: tuple[State, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def steps(self) -> list[tuple[int, int]]:
        v = self.vertices
        return [(b[0] - a[0], b[1] - a[1]) for a, b in zip(v, v[1:])]


def step_set(kind: Kind) -> tuple[tuple[int, int], ...]:
    if Kind(kind) is Kind.DK:
        return (SPREAD, STIFLE, PAIR_STIFLE)
    return (SPREAD, STIFLE)


def step_rate(spec: ChainSpec, v: State, step: tuple[int, int]):
    """Infinitesimal rate of taking ``step`` from ``v``."""
    x, y = v
    n = spec.n
    if step == SPREAD:
        return spec.beta * x * y if spec.kind is Kind.SIR else x * y
    if step == STIFLE:
        if spec.kind is Kind.MT:
            return y * (n - x)
        if spec.kind is Kind.DK:
            return y * (n + 1 - x - y)
        return spec.mu * y
    if step == PAIR_STIFLE and spec.kind is Kind.DK:
        return y * (y - 1) // 2
    raise DomainError(f"step {step} is not available in the {spec.kind.value} model")


def count_paths_mt(n: int, x: int, y: int) -> int:
    """Number of MT paths from ``(n, 1)`` to ``(x, y)`` (ballot count).

    >>> count_paths_mt(9, 3, 5)
    14
    """
    if not (0 <= x <= n and 2 <= y <= n + 1 - x):
        raise DomainError(f"({x}, {y}) is not a modified-MT target for N={n}")
    length = 2 * n - 2 * x - y + 1
    num = (y - 1) * comb(length, n - x)
    assert num % length == 0
    return num // length


def _check_guard(spec: ChainSpec, max_n: int) -> None:
    if spec.n > max_n:
        raise PathLimitError(
            f"path enumeration is exponential in N; refusing N={spec.n} > {max_n} "
            "(use the DP solver, or raise max_n explicitly)"
        )


def iter_paths(spec: ChainSpec, space: StateSpace, target: State, max_n: int = DEFAULT_MAX_N):
    """Yield paths to ``target`` depth-first, steps tried in the fixed order
    spread, stifle, pair-stifle."""
    _check_guard(spec, max_n)
    target = State(*target)
    if target not in space.index:
        raise DomainError(f"{tuple(target)} is not transient")
    start = spec.initial
    steps = step_set(spec.kind)
    phi_t = spec.potential(target)
    tx = target.x

    def walk(v: State, trail: list[State]):
        if v == target:
            yield Path(tuple(trail))
            return
        for dx, dy in steps:
            w = State(v.x + dx, v.y + dy)
            if w.x < tx or spec.potential(w) < phi_t or w not in space.index:
                continue
            if step_rate(spec, v, (dx, dy)) <= 0:
                continue
            trail.append(w)
            yield from walk(w, trail)
            trail.pop()

    yield from walk(start, [start])


def enumerate_paths(spec: ChainSpec, space: StateSpace, target: State, max_n: int = DEFAULT_MAX_N) -> list[Path]:
    return list(iter_paths(spec, space, target, max_n))


def dk_path_lengths(n: int, x: int, y: int) -> set[int]:
    """Admissible DK path lengths to ``(x, y)`` from the closed-form range.

    With ``z = n + 1 - x - y`` stiflers at the target, lengths are
    ``2n - 2x - y + 1 - ceil((n - x - y) / 2) + j`` for
    ``j = 0 .. floor(z / 2) - 1``. On the no-removal boundary (``z = 0``)
    the only length is ``y - 1``.
    """
    if not (0 <= x <= n and 2 <= y <= n + 1 - x):
        raise DomainError(f"({x}, {y}) is not a modified-DK target for N={n}")
    z = n + 1 - x - y
    base = 2 * n - 2 * x - y + 1
    if z == 0:
        return {y - 1}
    jmax = z // 2 - 1
    if jmax < 0:
        # a single stifler cannot be produced: the first removal is always a pair
        raise DomainError(f"({x}, {y}) has one stifler and is unreachable in DK")
    ceil_half = -((-(n - x - y)) // 2)
    return {base - ceil_half + j for j in range(jmax + 1)}
