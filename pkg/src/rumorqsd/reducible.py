"""Class structure of strictly evolutionary chains and QSD classification.

Each transient state is its own communicating class. Classes are listed in
accessibility order: if class ``i`` is reachable from class ``j`` then
``i <= j``, i.e. the most downstream state comes first. The decay parameter
is the smallest exit rate; among the states attaining it, the last one the
chain can reach decides where the quasi-stationary mass goes.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass

from .chain import ChainSpec, State, StateSpace, total_rate

log = logging.getLogger(__name__)


class ClassificationError(RuntimeError):
    """The minimal-rate classes are not linearly ordered by accessibility."""


@dataclass(frozen=True)
class ClassStructure:
    space: StateSpace
    classes: tuple[State, ...]
    class_rate: dict
    lam: float
    maximal: tuple[State, ...]
    last_maximal: State
    linearly_ordered: bool


@dataclass(frozen=True)
class TrivialPointMass:
    state: State
    lam: float
    warning: str | None = None


@dataclass(frozen=True)
class NonTrivial:
    start: State
    lam: float
    warning: str | None = None


@dataclass(frozen=True)
class NotAccessible:
    last_maximal: State


def _successors(space: StateSpace, s: State) -> list[State]:
    return [t for t, _ in space.spec.transitions(s) if t in space.index]


def reachable_from(space: StateSpace, sources) -> set[State]:
    """All transient states reachable from ``sources`` (inclusive).

    One forward sweep in topological order.
    """
    seen = set(sources)
    for s in space.states:
        if s in seen:
            seen.update(_successors(space, s))
    return seen


def _accessible(space: StateSpace, src: State, dst: State) -> bool:
    if src == dst:
        return True
    phi = space.spec.potential(dst)
    frontier, seen = [src], {src}
    while frontier:
        s = frontier.pop()
        for t in _successors(space, s):
            if t == dst:
                return True
            if t not in seen and space.spec.potential(t) > phi:
                seen.add(t)
                frontier.append(t)
    return False


def _check_acyclic(space: StateSpace) -> None:
    pos = space.index
    for s in space.states:
        for t in _successors(space, s):
            assert pos[t] > pos[s], f"transition {s}->{t} breaks topological order"


def _structure_on(space: StateSpace, subset) -> tuple[float, tuple[State, ...], State, bool]:
    members = [s for s in space.states if s in subset]
    rates = {s: total_rate(space.spec, s) for s in members}
    lam = min(rates.values())
    maximal = tuple(s for s in members if rates[s] == lam)
    # maximal is in topological order; a linear order means each reaches the next
    ordered = all(_accessible(space, a, b) for a, b in zip(maximal, maximal[1:]))
    return lam, maximal, maximal[-1], ordered


def class_structure(space: StateSpace, spec: ChainSpec | None = None, strict: bool = True) -> ClassStructure:
    """Compute classes, exit rates, the decay parameter and the maximal classes.

    Raises
    ------
    ClassificationError
        If several classes attain the minimal rate and they are not linearly
        ordered by accessibility. With ``strict=False`` the outcome is only
        recorded in ``linearly_ordered``.
    """
    if spec is not None and spec != space.spec:
        raise ValueError("state space was built for a different chain")
    if __debug__:
        _check_acyclic(space)
    lam, maximal, last, ordered = _structure_on(space, space.index)
    if strict and not ordered:
        raise ClassificationError(
            f"{len(maximal)} minimal-rate classes are not linearly ordered; "
            "the decay eigenvalue may have geometric multiplicity > 1"
        )
    return ClassStructure(
        space=space,
        classes=tuple(reversed(space.states)),
        class_rate={s: total_rate(space.spec, s) for s in space.states},
        lam=lam,
        maximal=maximal,
        last_maximal=last,
        linearly_ordered=ordered,
    )


def _support(space: StateSpace, initial) -> list[State]:
    if isinstance(initial, tuple) and len(initial) == 2 and isinstance(initial[0], int):
        initial = {State(*initial): 1.0}
    if not isinstance(initial, Mapping):
        raise TypeError("initial must be a state or a mapping state -> probability")
    support = []
    for s, p in initial.items():
        if p < 0:
            raise ValueError("negative initial probability")
        if p > 0:
            if s not in space.index:
                raise ValueError(f"initial mass on non-transient state {tuple(s)}")
            support.append(State(*s))
    if not support:
        raise ValueError("initial distribution has no mass")
    return support


def classify_qsd(structure: ClassStructure, initial, restrict: bool = True):
    """Decide where the Yaglom limit from ``initial`` puts its mass.

    With ``restrict=True`` (the default) the class analysis is redone on the
    part of the chain reachable from ``initial``, which yields the limit even
    when the global last maximal class is out of reach. With
    ``restrict=False`` that situation is reported as :class:`NotAccessible`.
    """
    space = structure.space
    reach = reachable_from(space, _support(space, initial))
    if not restrict:
        if not structure.linearly_ordered:
            raise ClassificationError("maximal classes are not linearly ordered")
        if structure.last_maximal not in reach:
            return NotAccessible(structure.last_maximal)
        lam, maximal, last = structure.lam, structure.maximal, structure.last_maximal
    else:
        lam, maximal, last, ordered = _structure_on(space, reach)
        if not ordered:
            raise ClassificationError("minimal-rate classes reachable from the initial law are not linearly ordered")

    warning = None
    if len(maximal) > 1:
        warning = (
            f"decay rate {lam} is attained by {len(maximal)} states; the conditioned law "
            "converges only polynomially in t"
        )
        log.debug(warning)
    if _successors(space, last):
        return NonTrivial(last, lam, warning)
    return TrivialPointMass(last, lam, warning)
