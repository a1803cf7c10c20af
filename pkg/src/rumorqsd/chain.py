"""State spaces and transition rates for the MT, DK and SIR chains.

A state is the pair ``(x, y)``: ignorants (susceptibles) and spreaders
(infectives) in a population of ``N + 1`` that starts from ``(N, 1)``.
Every transition lowers the potential ``2x + y``, so sorting states by that
potential gives a topological order of the transition graph.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp


class ParameterError(ValueError):
    """Invalid model parameters."""


class DomainError(ValueError):
    """An operation was applied to a state or argument outside its domain."""


class State(NamedTuple):
    x: int
    y: int


class Kind(str, enum.Enum):
    MT = "mt"
    DK = "dk"
    SIR = "sir"


class Mode(str, enum.Enum):
    STANDARD = "standard"
    MODIFIED = "modified"


# Jump vectors, in the fixed order used for enumeration.
SPREAD = (-1, 1)
STIFLE = (0, -1)
PAIR_STIFLE = (0, -2)


@dataclass(frozen=True)
class ChainSpec:
    kind: Kind
    n: int
    mode: Mode = Mode.STANDARD
    beta: float | Fraction | None = None
    mu: float | Fraction | None = None

    @property
    def initial(self) -> State:
        return State(self.n, 1)

    def potential(self, s: State) -> int:
        return 2 * s[0] + s[1]

    def in_population(self, s: State) -> bool:
        x, y = s
        return 0 <= x <= self.n and 0 <= y <= self.n + 1 - x

    def is_transient(self, s: State) -> bool:
        x, y = s
        if not self.in_population(s):
            return False
        if self.mode is Mode.STANDARD:
            return y >= 1
        return (x == self.n and y == 1) or y >= 2

    def is_absorbing(self, s: State) -> bool:
        return self.in_population(s) and not self.is_transient(s)

    def transitions(self, s: State) -> list[tuple[State, int | float | Fraction]]:
        """Outgoing ``(target, rate)`` pairs with strictly positive rate.

        Targets may be absorbing. Zero-rate moves are never emitted.
        """
        x, y = s
        n = self.n
        if self.kind is Kind.MT:
            moves = ((SPREAD, x * y), (STIFLE, y * (n - x)))
        elif self.kind is Kind.DK:
            moves = (
                (SPREAD, x * y),
                (STIFLE, y * (n + 1 - x - y)),
                (PAIR_STIFLE, y * (y - 1) // 2),
            )
        else:
            moves = ((SPREAD, self.beta * x * y), (STIFLE, self.mu * y))
        return [(State(x + dx, y + dy), r) for (dx, dy), r in moves if r > 0]


def build_chain(kind, n: int, mode=Mode.STANDARD, beta=None, mu=None) -> ChainSpec:
    """Validate parameters and return a :class:`ChainSpec`.

    ``beta`` and ``mu`` are required for SIR and rejected otherwise; pass
    :class:`fractions.Fraction` values to keep SIR rates exact.
    """
    kind = Kind(kind)
    mode = Mode(mode)
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise ParameterError(f"N must be an integer >= 2, got {n!r}")
    if kind is Kind.SIR:
        if beta is None or mu is None:
            raise ParameterError("SIR needs beta and mu")
        if not (beta > 0 and mu > 0):
            raise ParameterError(f"SIR rates must be positive, got beta={beta}, mu={mu}")
    elif beta is not None or mu is not None:
        raise ParameterError(f"beta/mu only apply to SIR, not {kind.value}")
    return ChainSpec(kind, int(n), mode, beta, mu)


def total_rate(spec: ChainSpec, s: State):
    """Total exit rate of a transient state, from the closed forms per model."""
    if not spec.is_transient(s):
        raise DomainError(f"{tuple(s)} is not transient for this chain")
    x, y = s
    n = spec.n
    if spec.kind is Kind.MT:
        return n * y
    if spec.kind is Kind.DK:
        # y(2N+1-y) is always even
        return y * (2 * n + 1 - y) // 2
    return y * (spec.beta * x + spec.mu)


@dataclass(frozen=True)
class StateSpace:
    spec: ChainSpec
    states: tuple[State, ...]
    index: dict = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, s) -> bool:
        return s in self.index

    def absorbing(self, s: State) -> bool:
        return self.spec.is_absorbing(s)

    def rates(self) -> np.ndarray:
        """Total exit rates in state order, as floats."""
        return np.array([float(total_rate(self.spec, s)) for s in self.states])

    def generator(self) -> sp.csr_matrix:
        """Sub-generator restricted to transient states (rows sum to minus the
        absorption rate)."""
        rows, cols, vals = [], [], []
        for i, s in enumerate(self.states):
            rows.append(i)
            cols.append(i)
            vals.append(-float(total_rate(self.spec, s)))
            for t, r in self.spec.transitions(s):
                j = self.index.get(t)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(float(r))
        m = len(self.states)
        return sp.csr_matrix((vals, (rows, cols)), shape=(m, m))


def build_state_space(spec: ChainSpec) -> StateSpace:
    """Transient states sorted by decreasing ``2x + y``, larger ``x`` first on ties."""
    n = spec.n
    states = [
        State(x, y)
        for x in range(n + 1)
        for y in range(0, n + 2 - x)
        if spec.is_transient(State(x, y))
    ]
    states.sort(key=lambda s: (-spec.potential(s), -s.x))
    return StateSpace(spec, tuple(states), {s: i for i, s in enumerate(states)})


def rate_arrays(spec: ChainSpec, x: np.ndarray, y: np.ndarray):
    """Vectorised transition table: list of ``((dx, dy), rates)`` for arrays of states."""
    n = spec.n
    if spec.kind is Kind.MT:
        return [(SPREAD, (x * y).astype(float)), (STIFLE, (y * (n - x)).astype(float))]
    if spec.kind is Kind.DK:
        return [
            (SPREAD, (x * y).astype(float)),
            (STIFLE, (y * (n + 1 - x - y)).astype(float)),
            (PAIR_STIFLE, (y * (y - 1) // 2).astype(float)),
        ]
    beta, mu = float(spec.beta), float(spec.mu)
    return [(SPREAD, beta * x * y), (STIFLE, mu * y.astype(float))]
