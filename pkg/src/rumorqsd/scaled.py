"""Nonnegative reals stored as ``mantissa * 2**scale``.

Unnormalized QSD weights at N of a few hundred span far more than the
double-precision exponent range, so the dynamic programs accumulate in this
representation and only convert to floats after normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

_LOG10_2 = math.log10(2.0)
_LN_2 = math.log(2.0)


@dataclass(frozen=True, order=False)
class ScaledReal:
    """A value ``mantissa * 2**scale`` with mantissa in [1, 2), or exactly zero.

    Zero is represented as ``ScaledReal(0.0, 0)``.
    """

    mantissa: float
    scale: int

    def __post_init__(self):
        m = self.mantissa
        if m != 0.0 and not (1.0 <= m < 2.0):
            raise ValueError(f"mantissa must lie in [1, 2) or be 0, got {m!r}")
        if m == 0.0 and self.scale != 0:
            raise ValueError("zero must carry scale 0")

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls) -> ScaledReal:
        return cls(0.0, 0)

    @classmethod
    def one(cls) -> ScaledReal:
        return cls(1.0, 0)

    @classmethod
    def _normalized(cls, m: float, e: int) -> ScaledReal:
        if m == 0.0:
            return cls(0.0, 0)
        f, k = math.frexp(m)
        return cls(2.0 * f, e + k - 1)

    @classmethod
    def from_float(cls, value: float) -> ScaledReal:
        if value < 0 or math.isnan(value) or math.isinf(value):
            raise ValueError(f"ScaledReal needs a finite nonnegative value, got {value!r}")
        return cls._normalized(float(value), 0)

    @classmethod
    def from_int(cls, value: int) -> ScaledReal:
        """Exact up to double rounding for arbitrarily large integers."""
        if value < 0:
            raise ValueError("negative integer")
        if value == 0:
            return cls.zero()
        shift = max(value.bit_length() - 60, 0)
        return cls._normalized(float(value >> shift), shift)

    @classmethod
    def from_fraction(cls, value: Fraction) -> ScaledReal:
        if value < 0:
            raise ValueError("negative fraction")
        if value == 0:
            return cls.zero()
        num, den = value.numerator, value.denominator
        shift = num.bit_length() - den.bit_length() - 60
        if shift >= 0:
            q = num // (den << shift)
        else:
            q = (num << -shift) // den
        return cls._normalized(float(q), shift)

    @classmethod
    def from_log(cls, ln_value: float) -> ScaledReal:
        """Build from a natural logarithm; ``-inf`` gives zero."""
        if ln_value == -math.inf:
            return cls.zero()
        log2 = ln_value / _LN_2
        e = math.floor(log2)
        return cls._normalized(2.0 ** (log2 - e), e)

    # -- arithmetic -------------------------------------------------------

    def __bool__(self) -> bool:
        return self.mantissa != 0.0

    def __add__(self, other: ScaledReal) -> ScaledReal:
        if not isinstance(other, ScaledReal):
            return NotImplemented
        if not other:
            return self
        if not self:
            return other
        a, b = (self, other) if self.scale >= other.scale else (other, self)
        m = a.mantissa + math.ldexp(b.mantissa, b.scale - a.scale)
        return ScaledReal._normalized(m, a.scale)

    __radd__ = __add__

    def __mul__(self, other) -> ScaledReal:
        if isinstance(other, (int, float)):
            other = ScaledReal.from_float(float(other))
        if not isinstance(other, ScaledReal):
            return NotImplemented
        if not self or not other:
            return ScaledReal.zero()
        return ScaledReal._normalized(self.mantissa * other.mantissa, self.scale + other.scale)

    __rmul__ = __mul__

    def __truediv__(self, other) -> ScaledReal:
        if isinstance(other, (int, float)):
            other = ScaledReal.from_float(float(other))
        if not isinstance(other, ScaledReal):
            return NotImplemented
        if not other:
            raise ZeroDivisionError("division by ScaledReal zero")
        if not self:
            return ScaledReal.zero()
        return ScaledReal._normalized(self.mantissa / other.mantissa, self.scale - other.scale)

    # -- comparison and views ---------------------------------------------

    def _key(self):
        return (0, 0, 0.0) if not self else (1, self.scale, self.mantissa)

    def __lt__(self, other: ScaledReal) -> bool:
        return self._key() < other._key()

    def __le__(self, other: ScaledReal) -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: ScaledReal) -> bool:
        return self._key() > other._key()

    def __ge__(self, other: ScaledReal) -> bool:
        return self._key() >= other._key()

    def __float__(self) -> float:
        # ldexp raises OverflowError past the double range and quietly
        # returns 0.0 (or a subnormal) below it.
        return math.ldexp(self.mantissa, self.scale)

    def log2(self) -> float:
        if not self:
            return -math.inf
        return math.log2(self.mantissa) + self.scale

    def log10(self) -> float:
        return self.log2() * _LOG10_2

    def log(self) -> float:
        return self.log2() * _LN_2

    def __repr__(self) -> str:
        if not self:
            return "ScaledReal(0)"
        return f"ScaledReal(10^{self.log10():.12g})"


def scaled_sum(values) -> ScaledReal:
    """Sum in the given order (the order is part of the determinism contract)."""
    total = ScaledReal.zero()
    for v in values:
        total = total + v
    return total
