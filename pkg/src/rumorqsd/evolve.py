"""Time evolution: uniformization, Gillespie simulation, hypoexponential densities.

These routines do not use the QSD formulas; they check them by following
the dynamics forward in time.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad

from .chain import ChainSpec, DomainError, State, StateSpace, rate_arrays, total_rate
from .distribution import Distribution
from .scaled import ScaledReal

UNIFORMIZATION = "uniformization"
POISSON_TAIL = 1e-13
DENSE_LIMIT = 400
BLOCK = 1024


class EstimationError(RuntimeError):
    pass


# -- uniformization -----------------------------------------------------


def _as_vector(space: StateSpace, init) -> np.ndarray:
    if isinstance(init, Distribution):
        return init.reindex(space.states)
    if isinstance(init, np.ndarray):
        v = np.asarray(init, dtype=float)
        if v.shape != (len(space),):
            raise ValueError("initial vector has the wrong length")
        return v.copy()
    if isinstance(init, tuple) and len(init) == 2 and not isinstance(init[0], tuple):
        init = {State(*init): 1.0}
    if not isinstance(init, Mapping):
        raise TypeError("initial law must be a state, mapping, Distribution or vector")
    v = np.zeros(len(space))
    for s, p in init.items():
        j = space.index.get(State(*s))
        if j is None:
            raise ValueError(f"initial mass on non-transient state {tuple(s)}")
        v[j] += p
    return v


def _poisson_weights(a: float) -> np.ndarray:
    w = [math.exp(-a)]
    cum = w[0]
    k = 0
    while 1.0 - cum > POISSON_TAIL:
        k += 1
        w.append(w[-1] * a / k)
        cum += w[-1]
    return np.array(w)


class _Uniformizer:
    """Applies ``v -> v exp(Q h)`` for a fixed sub-step ``h`` with ``Lambda h <= 1``."""

    def __init__(self, space: StateSpace, h: float):
        q = space.generator()
        lam = float(space.rates().max())
        self.weights = _poisson_weights(lam * h)
        pt = (sp.identity(len(space), format="csr") + q / lam).T.tocsr()
        if len(space) <= DENSE_LIMIT:
            pt = pt.toarray()
            acc = self.weights[0] * np.eye(len(space))
            power = np.eye(len(space))
            for w in self.weights[1:]:
                power = pt @ power
                acc += w * power
            self.dense = acc
        else:
            self.dense = None
            self.pt = pt

    def __call__(self, v: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            return self.dense @ v
        out = self.weights[0] * v
        term = v
        for w in self.weights[1:]:
            term = self.pt @ term
            out += w * term
        return out


def _evolve(space: StateSpace, init, t: float) -> tuple[np.ndarray, float]:
    """Conditioned law at time ``t`` and the natural log of the survival probability.

    The vector is renormalized after every sub-step and the log mass lost is
    accumulated separately, so long horizons do not underflow.
    """
    if t < 0:
        raise DomainError("time must be nonnegative")
    v = _as_vector(space, init)
    mass = v.sum()
    if mass <= 0:
        raise ValueError("initial law has no mass")
    v = v / mass
    if t == 0:
        return v, 0.0
    lam = float(space.rates().max())
    steps = max(1, math.ceil(lam * t))
    step = _Uniformizer(space, t / steps)
    log_surv = 0.0
    for _ in range(steps):
        v = step(v)
        s = v.sum()
        log_surv += math.log(s)
        v /= s
    np.clip(v, 0.0, None, out=v)
    return v / v.sum(), log_surv


def conditioned_distribution(spec: ChainSpec, space: StateSpace, init, t: float) -> Distribution:
    """Law of the chain at time ``t`` given no absorption by ``t``."""
    v, _ = _evolve(space, init, t)
    return Distribution(space.states, v, UNIFORMIZATION)


def survival_probability(spec: ChainSpec, space: StateSpace, init, t: float) -> ScaledReal:
    """``P(tau > t)`` from the given initial law."""
    _, log_surv = _evolve(space, init, t)
    return ScaledReal.from_log(log_surv)


def log_survival_curve(spec: ChainSpec, space: StateSpace, init, times) -> np.ndarray:
    return np.array([survival_probability(spec, space, init, t).log() for t in times])


# -- simulation ---------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    times: tuple[float, ...]
    states: tuple[State, ...]

    @property
    def jumps(self) -> int:
        return len(self.states) - 1


def _rng(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def simulate(spec: ChainSpec, init: State | None = None, seed: int = 0) -> Trajectory:
    """One exact trajectory until absorption (Gillespie)."""
    s = State(*(init if init is not None else spec.initial))
    if not spec.is_transient(s):
        raise DomainError(f"{tuple(s)} is not transient")
    rng = _rng(seed)
    t = 0.0
    times, states = [t], [s]
    while spec.is_transient(s):
        moves = spec.transitions(s)
        rates = np.array([float(r) for _, r in moves])
        total = rates.sum()
        t += rng.exponential() / total
        k = int(np.searchsorted(np.cumsum(rates), rng.random() * total, side="right"))
        s = moves[min(k, len(moves) - 1)][0]
        times.append(t)
        states.append(s)
    return Trajectory(tuple(times), tuple(states))


def _lookup(spec: ChainSpec, space: StateSpace) -> np.ndarray:
    table = np.full((spec.n + 1, spec.n + 3), -1, dtype=np.int64)
    for s, i in space.index.items():
        table[s.x, s.y] = i
    return table


def _run_block(spec, table, reps, rng, init, t_stop=None, soj=None):
    """Advance ``reps`` independent copies together.

    With ``t_stop`` returns the state index occupied at ``t_stop`` (-1 if
    absorbed before). With ``soj=(sum, sumsq)`` accumulates time per state.
    """
    x = np.full(reps, init.x, dtype=np.int64)
    y = np.full(reps, init.y, dtype=np.int64)
    clock = np.zeros(reps)
    at_stop = np.full(reps, -1, dtype=np.int64)
    active = np.arange(reps)
    while active.size:
        xa, ya = x[active], y[active]
        moves = rate_arrays(spec, xa, ya)
        rates = np.stack([r for _, r in moves], axis=1)
        cum = np.cumsum(rates, axis=1)
        total = cum[:, -1]
        hold = rng.exponential(size=active.size) / total
        u = rng.random(active.size) * total
        here = table[xa, ya]
        if soj is not None:
            np.add.at(soj[0], here, hold)
            np.add.at(soj[1], here, hold * hold)
        if t_stop is not None:
            done = clock[active] + hold > t_stop
            at_stop[active[done]] = here[done]
        else:
            done = np.zeros(active.size, dtype=bool)
        choice = np.minimum((u[:, None] >= cum).sum(axis=1), len(moves) - 1)
        dx = np.array([d[0] for d, _ in moves])[choice]
        dy = np.array([d[1] for d, _ in moves])[choice]
        go = ~done
        idx = active[go]
        x[idx] += dx[go]
        y[idx] += dy[go]
        clock[idx] += hold[go]
        still = table[x[idx], y[idx]] >= 0
        active = idx[still]
    return at_stop


def _blocks(reps: int):
    for b, start in enumerate(range(0, reps, BLOCK)):
        yield b, min(BLOCK, reps - start)


@dataclass(frozen=True, eq=False)
class McQsd:
    dist: Distribution
    se: np.ndarray
    acceptance: float
    acceptance_se: float
    survivors: int
    reps: int


def estimate_qsd_mc(spec: ChainSpec, space: StateSpace, t: float, reps: int, seed: int = 0, init: State | None = None) -> McQsd:
    """Empirical law of the state at time ``t`` among runs not yet absorbed.

    Replications are split into fixed blocks, each with its own Philox
    stream keyed on ``(seed, block)``; results do not depend on scheduling.
    """
    if t < 0:
        raise DomainError("time must be nonnegative")
    init = State(*(init if init is not None else spec.initial))
    table = _lookup(spec, space)
    counts = np.zeros(len(space))
    for b, size in _blocks(reps):
        at = _run_block(spec, table, size, _rng(seed, b), init, t_stop=t)
        at = at[at >= 0]
        counts += np.bincount(at, minlength=len(space))
    survivors = int(counts.sum())
    if survivors == 0:
        raise EstimationError(f"no trajectory survived to t={t}; use a smaller t or more reps")
    p = counts / survivors
    se = np.sqrt(p * (1 - p) / survivors)
    acc = survivors / reps
    return McQsd(
        Distribution(space.states, p, "mc"),
        se,
        acc,
        math.sqrt(acc * (1 - acc) / reps),
        survivors,
        reps,
    )


@dataclass(frozen=True, eq=False)
class McSojourn:
    states: tuple[State, ...]
    mean: np.ndarray
    se: np.ndarray
    total_mean: float
    total_se: float
    reps: int


def estimate_sojourn_mc(spec: ChainSpec, space: StateSpace, reps: int, seed: int = 0, init: State | None = None) -> McSojourn:
    """Monte Carlo mean time spent in each state before absorption."""
    init = State(*(init if init is not None else spec.initial))
    table = _lookup(spec, space)
    m = len(space)
    s1, s2 = np.zeros(m), np.zeros(m)
    totals = []
    for b, size in _blocks(reps):
        acc = (np.zeros(m), np.zeros(m))
        rng = _rng(seed, b)
        _run_block(spec, table, size, rng, init, soj=acc)
        s1 += acc[0]
        s2 += acc[1]
    mean = s1 / reps
    var = np.maximum(s2 / reps - mean**2, 0.0)
    se = np.sqrt(var / (reps - 1))
    # each state is visited at most once, so per-run totals are not recoverable
    # from the per-state sums; bound the total's SE by the sum of state SEs
    return McSojourn(space.states, mean, se, float(mean.sum()), float(se.sum()), reps)


# -- hypoexponential ----------------------------------------------------


@dataclass(frozen=True)
class HypoexpSpec:
    rates: tuple[float, ...]

    def __post_init__(self):
        r = tuple(float(v) for v in self.rates)
        object.__setattr__(self, "rates", r)
        if not r:
            raise ValueError("need at least one rate")
        if any(v <= 0 for v in r):
            raise ValueError("rates must be positive")
        if any(v <= r[0] for v in r[1:]):
            raise ValueError("the first rate must be strictly smallest")

    @property
    def pi(self) -> float:
        lam0 = self.rates[0]
        return lam0 * math.prod(v / (v - lam0) for v in self.rates[1:])


@dataclass(frozen=True)
class HypoexpCheck:
    exact: float
    asymptote: float
    ratio: float


def _distinct(rates) -> bool:
    return len(set(rates)) == len(rates)


def _pf_density(rates, t: float) -> float:
    total = 0.0
    for i, li in enumerate(rates):
        c = li
        for j, lj in enumerate(rates):
            if j != i:
                c *= lj / (lj - li)
        total += c * math.exp(-li * t)
    return total


def hypoexp_density(rates, t: float) -> float:
    """Density of a sum of independent exponentials at ``t``.

    Partial fractions when all rates differ; otherwise one repeated rate is
    peeled off and convolved numerically (adaptive quadrature, rel. tol 1e-10).
    """
    rates = tuple(float(r) for r in rates)
    if t < 0:
        return 0.0
    if _distinct(rates):
        return _pf_density(rates, t)
    seen = set()
    for k, r in enumerate(rates):
        if r in seen:
            break
        seen.add(r)
    rest = rates[:k] + rates[k + 1 :]
    val, _ = quad(
        lambda s: hypoexp_density(rest, t - s) * r * math.exp(-r * s),
        0.0,
        t,
        epsrel=1e-10,
        epsabs=0.0,
        limit=200,
    )
    return val


def hypoexp_check(spec: HypoexpSpec, t: float) -> HypoexpCheck:
    """Compare the density of the sum with its large-``t`` asymptote
    ``pi * exp(-lam0 t)``."""
    if t <= 0:
        raise DomainError("t must be positive")
    rates = spec.rates
    lam0 = rates[0]
    pi = spec.pi
    asym = pi * math.exp(-lam0 * t)
    if _distinct(rates):
        # factor out exp(-lam0 t): the lam0 term contributes exactly pi
        ratio = 1.0
        for i, li in enumerate(rates[1:], start=1):
            c = li
            for j, lj in enumerate(rates):
                if j != i:
                    c *= lj / (lj - li)
            ratio += c / pi * math.exp(-(li - lam0) * t)
        return HypoexpCheck(ratio * asym, asym, ratio)
    exact = hypoexp_density(rates, t)
    return HypoexpCheck(exact, asym, exact / asym)
