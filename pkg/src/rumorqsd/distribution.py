from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import State


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over an ordered tuple of transient states.

    ``log10`` holds base-10 log probabilities when the producer tracked them
    beyond double range (entries of ``probs`` may underflow to zero while
    ``log10`` stays finite).
    """

    states: tuple[State, ...]
    probs: np.ndarray
    method: str
    lam: float | None = None
    log10: np.ndarray | None = None

    def __post_init__(self):
        if len(self.states) != len(self.probs):
            raise ValueError("states and probs differ in length")

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, s) -> float:
        return float(self.probs[self.states.index(State(*s))])

    def as_dict(self) -> dict[State, float]:
        return {s: float(p) for s, p in zip(self.states, self.probs)}

    def log10_probs(self) -> np.ndarray:
        if self.log10 is not None:
            return self.log10
        with np.errstate(divide="ignore"):
            return np.log10(self.probs)

    def argmax(self, exclude=()) -> State:
        excl = {State(*s) for s in exclude}
        vals = self.log10_probs()
        best, best_v = None, -np.inf
        for s, v in zip(self.states, vals):
            if s not in excl and v > best_v:
                best, best_v = s, v
        return best

    def reindex(self, states) -> np.ndarray:
        """Probabilities in another state order (missing states get 0)."""
        d = self.as_dict()
        return np.array([d.get(State(*s), 0.0) for s in states])


def total_variation(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p - q).sum())


def point_mass(states, at: State, method: str, lam=None) -> Distribution:
    probs = np.zeros(len(states))
    probs[list(states).index(State(*at))] = 1.0
    return Distribution(tuple(states), probs, method, lam)
