"""Non-trivial quasi-stationary distributions of the modified chains.

The sub-generator is triangular in the potential order, so the left
eigenvector for the decay rate ``lam0`` (the exit rate of the start state)
follows by one back-substitution pass::

    w(s0) = 1,   w(v) = sum_{u -> v} w(u) q(u, v) / (lam_v - lam0)

Expanding the recursion over the transition graph gives the path sum
computed by :func:`qsd_path_enum`, which therefore serves as an independent
check on :func:`qsd_dp`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chain import ChainSpec, Mode, State, StateSpace, total_rate
from .distribution import Distribution, point_mass
from .paths import DEFAULT_MAX_N, iter_paths, step_rate
from .reducible import NonTrivial, class_structure, classify_qsd
from .scaled import ScaledReal, scaled_sum

DP = "dp"
PATH_ENUM = "enum"
MONTE_CARLO = "mc"
POINT_MASS = "point-mass"


class NonTrivialityError(ArithmeticError):
    """A state other than the start has exit rate <= the decay rate."""


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QsdResult:
    dist: Distribution
    lam: float
    method: str
    normalizer: ScaledReal
    weights: tuple[ScaledReal, ...] = ()
    warning: str | None = None

    def weight(self, s: State) -> ScaledReal:
        """Unnormalized weight, scaled so the start state has weight 1."""
        return self.weights[self.dist.states.index(State(*s))]


def normalize(weights) -> tuple[np.ndarray, ScaledReal]:
    """Turn nonnegative weights into probabilities; also return their sum.

    Accepts ScaledReal or plain nonnegative numbers.
    """
    ws = [w if isinstance(w, ScaledReal) else ScaledReal.from_float(float(w)) for w in weights]
    total = scaled_sum(ws)
    if not total:
        raise DegenerateInputError("cannot normalize an all-zero weight vector")
    probs = np.array([float(w / total) for w in ws])
    probs /= math.fsum(probs)
    return probs, total


def _start(spec: ChainSpec, space: StateSpace) -> State:
    if spec.mode is not Mode.MODIFIED:
        raise NonTrivialityError("the standard-absorption chains have a point-mass QSD only")
    return spec.initial


def _denominator(spec: ChainSpec, v: State, lam0):
    d = total_rate(spec, v) - lam0
    if d <= 0:
        raise NonTrivialityError(
            f"exit rate at {tuple(v)} does not exceed the decay rate {lam0}; no non-trivial QSD"
        )
    return d


def _back_substitute(spec: ChainSpec, space: StateSpace, exact: bool):
    s0 = _start(spec, space)
    lam0 = total_rate(spec, s0)
    if exact:
        zero, one = Fraction(0), Fraction(1)
    else:
        zero, one = ScaledReal.zero(), ScaledReal.one()
    w = [zero] * len(space)
    w[space.index[s0]] = one
    for i, v in enumerate(space.states):
        if v != s0:
            d = _denominator(spec, v, lam0)
            if w[i]:
                # incoming mass was accumulated as sum w(u) q(u, v)
                w[i] = w[i] / Fraction(d) if exact else w[i] / float(d)
        wi = w[i]
        if not wi:
            continue
        for t, r in spec.transitions(v):
            j = space.index.get(t)
            if j is None:
                continue
            if exact:
                w[j] = w[j] + wi * Fraction(r)
            else:
                w[j] = w[j] + wi * float(r)
    return w, lam0


def qsd_weights_exact(spec: ChainSpec, space: StateSpace) -> dict[State, Fraction]:
    """Unnormalized weights (start state = 1) in exact rational arithmetic.

    SIR rates must be given as Fractions for the result to be exact.
    """
    w, _ = _back_substitute(spec, space, exact=True)
    return dict(zip(space.states, w))


def _result(space, weights, lam0, method, warning=None) -> QsdResult:
    probs, total = normalize(weights)
    log_c = total.log10()
    logs = np.array([w.log10() - log_c if w else -np.inf for w in weights])
    dist = Distribution(space.states, probs, method, float(lam0), logs)
    return QsdResult(dist, float(lam0), method, total, tuple(weights), warning)


def qsd_dp(spec: ChainSpec, space: StateSpace) -> QsdResult:
    """Non-trivial QSD by triangular back-substitution (linear in the number
    of transitions).

    Raises
    ------
    NonTrivialityError
        In standard mode, or when some state other than ``(N, 1)`` exits no
        faster than ``(N, 1)`` (e.g. SIR with ``mu <= beta * N``).
    """
    w, lam0 = _back_substitute(spec, space, exact=False)
    return _result(space, w, lam0, DP)


def _path_weight(spec: ChainSpec, path, lam0) -> float:
    v = path.vertices
    steps = path.steps()
    # lead factor: rate of the first step over (lam_L - lam0); equals
    # lam0 / (lam_L - lam0) whenever (N, 1) has a single exit move
    rho0 = step_rate(spec, v[0], steps[0])
    value = float(rho0) / float(_denominator(spec, v[-1], lam0))
    for j in range(1, len(v) - 1):
        value *= float(step_rate(spec, v[j], steps[j])) / float(_denominator(spec, v[j], lam0))
    return value


def qsd_path_enum(spec: ChainSpec, space: StateSpace, target: State, max_n: int = DEFAULT_MAX_N) -> ScaledReal:
    """Unnormalized QSD mass at ``target`` as an explicit sum over paths.

    Paths are summed in lexicographic step order, so the result is
    reproducible bit for bit.
    """
    s0 = _start(spec, space)
    target = State(*target)
    lam0 = total_rate(spec, s0)
    if target == s0:
        return ScaledReal.one()
    return scaled_sum(
        ScaledReal.from_float(_path_weight(spec, p, lam0)) for p in iter_paths(spec, space, target, max_n)
    )


def qsd_path_enum_all(spec: ChainSpec, space: StateSpace, max_n: int = DEFAULT_MAX_N) -> QsdResult:
    lam0 = total_rate(spec, _start(spec, space))
    weights = [qsd_path_enum(spec, space, s, max_n) for s in space.states]
    return _result(space, weights, lam0, PATH_ENUM)


def eigen_residual(spec: ChainSpec, space: StateSpace, result: QsdResult) -> float:
    """Max relative residual of ``nu Q = -lam nu`` over states with positive mass.

    Checks ``sum_u nu(u) q(u, v) == nu(v) (lam_v - lam)`` state by state, with
    the weights kept in scaled form so tiny masses are still tested.
    """
    lam0 = total_rate(spec, _start(spec, space))
    inflow = [ScaledReal.zero()] * len(space)
    for i, u in enumerate(space.states):
        wu = result.weights[i]
        if not wu:
            continue
        for t, r in spec.transitions(u):
            j = space.index.get(t)
            if j is not None:
                inflow[j] = inflow[j] + wu * float(r)
    worst = 0.0
    for i, v in enumerate(space.states):
        wv = result.weights[i]
        if not wv:
            if inflow[i]:
                return math.inf
            continue
        outflow = wv * float(total_rate(spec, v) - lam0)
        if not outflow and not inflow[i]:
            continue
        ref = max(outflow, inflow[i])
        diff = abs(float(inflow[i] / ref) - float(outflow / ref))
        worst = max(worst, diff * float(ref / wv))
    return worst


def solve_qsd(spec: ChainSpec, space: StateSpace, method: str = DP, initial=None) -> QsdResult:
    """Classify from ``initial`` (default: the start state) and solve.

    Trivial cases come back as a point mass with the classification warning
    attached; non-trivial ones use the requested method.
    """
    if initial is None:
        initial = {spec.initial: 1.0}
    verdict = classify_qsd(class_structure(space, strict=False), initial)
    if not isinstance(verdict, NonTrivial):
        dist = point_mass(space.states, verdict.state, POINT_MASS, float(verdict.lam))
        weights = tuple(ScaledReal.one() if s == verdict.state else ScaledReal.zero() for s in space.states)
        msg = f"QSD is the point mass at {tuple(verdict.state)}"
        if verdict.warning:
            msg += f"; {verdict.warning}"
        return QsdResult(dist, float(verdict.lam), POINT_MASS, ScaledReal.one(), weights, msg)
    if method == DP:
        res = qsd_dp(spec, space)
    elif method == PATH_ENUM:
        res = qsd_path_enum_all(spec, space)
    else:
        raise ValueError(f"unknown QSD method {method!r}")
    if verdict.warning:
        res = QsdResult(res.dist, res.lam, res.method, res.normalizer, res.weights, verdict.warning)
    return res
