"""Closed forms on the no-removal boundary ``y = N + 1 - x`` and the
deterministic MT limit curve."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.optimize import bisect

from .chain import DomainError
from .scaled import ScaledReal

DK_IDENTITY_RTOL = 1e-12


@dataclass(frozen=True)
class BoundaryValue:
    exact: ScaledReal
    gauss: float
    relerr: float


def _check_x(n: int, x: int) -> None:
    if not (0 <= x <= n - 1):
        raise DomainError(f"x must lie in [0, N-1], got x={x} for N={n}")


def mt_boundary_exact(n: int, x: int) -> ScaledReal:
    """Unnormalized MT weight ``N! / (x! N^(N-x))`` at ``(x, N+1-x)``."""
    _check_x(n, x)
    return ScaledReal.from_log(math.lgamma(n + 1) - math.lgamma(x + 1) - (n - x) * math.log(n))


def mt_boundary_rational(n: int, x: int) -> Fraction:
    _check_x(n, x)
    return Fraction(math.factorial(n), math.factorial(x) * n ** (n - x))


def mt_boundary_gauss(n: int, x: float) -> float:
    """Gaussian approximation ``exp(-N (1 - x/N)^2 / 2)``."""
    xbar = x / n
    return math.exp(-n * (1.0 - xbar) ** 2 / 2.0)


def mt_boundary(n: int, x: int) -> BoundaryValue:
    exact = mt_boundary_exact(n, x)
    g = mt_boundary_gauss(n, x)
    return BoundaryValue(exact, g, abs(g / float(exact) - 1.0))


def _dk_log_direct(n: int, x: int) -> float:
    return math.fsum(
        [
            (n - x + 1) * math.log(2.0),
            math.lgamma(n + 1),
            math.lgamma(n + x - 1),
            -math.lgamma(x + 1),
            -math.lgamma(2 * n - 1),
        ]
    )


def _dk_log_negbin(n: int, x: int) -> float:
    """Prefactor times the NegBin(r = N-1, p = 1/2) mass at ``x``."""
    # terms of order 1e3 cancel, so sum exactly to keep the 1e-12 identity check meaningful
    prefactor = [2 * n * math.log(2.0), math.lgamma(n + 1), math.lgamma(n - 1), -math.lgamma(2 * n - 1)]
    log_binom = [math.lgamma(x + n - 1), -math.lgamma(x + 1), -math.lgamma(n - 1)]
    return math.fsum(prefactor + log_binom + [-(x + n - 1) * math.log(2.0)])


def dk_boundary_exact(n: int, x: int) -> ScaledReal:
    """DK boundary value ``2^(N-x+1) N! (N+x-2)! / (x! (2N-2)!)``.

    Evaluated directly and in negative-binomial factored form; the two must
    agree to 1e-12 relative. This printed form is exactly twice the
    back-substitution weight (see :func:`dk_boundary_rational`).
    """
    if n < 2:
        raise DomainError("DK boundary form needs N >= 2")
    _check_x(n, x)
    direct = _dk_log_direct(n, x)
    factored = _dk_log_negbin(n, x)
    if abs(math.expm1(factored - direct)) > DK_IDENTITY_RTOL:
        raise ArithmeticError(f"DK boundary forms disagree at N={n}, x={x}")
    return ScaledReal.from_log(direct)


def dk_boundary_factored(n: int, x: int) -> ScaledReal:
    if n < 2:
        raise DomainError("DK boundary form needs N >= 2")
    _check_x(n, x)
    return ScaledReal.from_log(_dk_log_negbin(n, x))


def dk_boundary_rational(n: int, x: int) -> Fraction:
    """Printed DK boundary form in exact arithmetic."""
    if n < 2:
        raise DomainError("DK boundary form needs N >= 2")
    _check_x(n, x)
    f = math.factorial
    return Fraction(2 ** (n - x + 1) * f(n) * f(n + x - 2), f(x) * f(2 * n - 2))


def dk_boundary_gauss(n: int, x: float) -> float:
    return (2 * n - 1) / (n - 1) * math.sqrt(n / (n - 1)) * math.exp(-((x - n + 1) ** 2) / (4 * (n - 1)))


def deterministic_curve(xbar: float) -> float:
    """Spreader proportion along the MT fluid limit, ``ln x - 2x + 2``."""
    if not (0.0 < xbar <= 1.0):
        raise DomainError("xbar must lie in (0, 1]")
    return math.log(xbar) - 2.0 * xbar + 2.0


def final_proportion(xtol: float = 1e-12) -> float:
    """Limiting fraction of ignorants: the root of ``ln x - 2x + 2`` in (0, 1)."""
    return bisect(deterministic_curve, 1e-6, 0.5, xtol=xtol)
