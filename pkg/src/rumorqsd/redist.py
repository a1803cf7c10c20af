"""Ratio-of-expectations (RE) distributions.

A strictly evolutionary chain visits each state at most once, so the
expected time spent in ``v`` is ``P(visit v) / lam_v`` and visit
probabilities follow from one forward pass over the embedded jump chain.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chain import ChainSpec, Kind, State, StateSpace, total_rate
from .distribution import Distribution

EXACT_MAX_N = 50

RE = "re"


@dataclass(frozen=True, eq=False)
class SojournTable:
    states: tuple[State, ...]
    reach: dict
    sojourn: dict
    total: float | Fraction
    init: State


def _use_exact(spec: ChainSpec, exact: bool | None) -> bool:
    if exact is None:
        return spec.kind in (Kind.MT, Kind.DK) and spec.n <= EXACT_MAX_N
    return exact


def sojourn_table(spec: ChainSpec, space: StateSpace, init: State | None = None, exact: bool | None = None) -> SojournTable:
    """Visit probabilities and expected sojourn times from a fixed start.

    ``exact=None`` picks rational arithmetic for MT/DK with N <= 50 and
    floats otherwise.
    """
    init = State(*(init if init is not None else spec.initial))
    if init not in space.index:
        raise ValueError(f"{tuple(init)} is not transient")
    exact = _use_exact(spec, exact)
    conv = Fraction if exact else float
    zero = conv(0)
    reach = [zero] * len(space)
    reach[space.index[init]] = conv(1)
    soj = [zero] * len(space)
    for i, u in enumerate(space.states):
        p = reach[i]
        if not p:
            continue
        lam_u = conv(total_rate(spec, u))
        soj[i] = p / lam_u
        for t, r in spec.transitions(u):
            j = space.index.get(t)
            if j is not None:
                reach[j] += p * conv(r) / lam_u
    total = sum(soj, zero) if exact else math.fsum(soj)
    return SojournTable(
        space.states,
        dict(zip(space.states, reach)),
        dict(zip(space.states, soj)),
        total,
        init,
    )


def re_distribution(table: SojournTable) -> Distribution:
    """``r(v) = E[time in v] / E[absorption time]``."""
    if not table.total > 0:
        raise ValueError("expected absorption time must be positive")
    probs = np.array([float(table.sojourn[s] / table.total) for s in table.states])
    return Distribution(table.states, probs, RE)


def re_exact(table: SojournTable) -> dict[State, Fraction]:
    """RE probabilities as Fractions (table must be exact)."""
    if not isinstance(table.total, Fraction):
        raise TypeError("table was computed in floating point")
    return {s: table.sojourn[s] / table.total for s in table.states}


def re_mixture(spec: ChainSpec, space: StateSpace, initial: Mapping, exact: bool | None = None) -> Distribution:
    """RE distribution for a random initial state:
    ``sum_i mu_i E[T_i(j)] / sum_i mu_i E[T_i]``."""
    num = np.zeros(len(space))
    den = 0.0
    for s, w in initial.items():
        if w <= 0:
            continue
        tab = sojourn_table(spec, space, s, exact)
        num += float(w) * np.array([float(tab.sojourn[v]) for v in space.states])
        den += float(w) * float(tab.total)
    if den <= 0:
        raise ValueError("initial distribution has no mass")
    return Distribution(space.states, num / den, RE)


def svensson_mean_time(n: int) -> float:
    """Large-N approximation ``(2.68 ln(N+1) + 1.38) / N`` of the MT mean
    absorption time."""
    if n < 1:
        raise ValueError("N must be >= 1")
    return (2.68 * math.log(n + 1) + 1.38) / n
