"""Quasi-stationary and ratio-of-expectations distributions for the
Maki-Thompson and Daley-Kendall rumor chains and the SIR epidemic."""

from .chain import ChainSpec, Kind, Mode, State, StateSpace, build_chain, build_state_space, total_rate
from .distribution import Distribution, total_variation
from .reducible import NonTrivial, NotAccessible, TrivialPointMass, class_structure, classify_qsd
from .scaled import ScaledReal
from .solver import QsdResult, normalize, qsd_dp, qsd_path_enum, qsd_path_enum_all, solve_qsd

__all__ = [
    "ChainSpec",
    "Distribution",
    "Kind",
    "Mode",
    "NonTrivial",
    "NotAccessible",
    "QsdResult",
    "ScaledReal",
    "State",
    "StateSpace",
    "TrivialPointMass",
    "build_chain",
    "build_state_space",
    "class_structure",
    "classify_qsd",
    "normalize",
    "qsd_dp",
    "qsd_path_enum",
    "qsd_path_enum_all",
    "solve_qsd",
    "total_rate",
    "total_variation",
]
