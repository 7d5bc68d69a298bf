import logging
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
from scipy.special import logsumexp

logger = logging.getLogger(__name__)

Real = Union[float, int, "LogReal"]


def wrap_angle(angle: float) -> float:
    """Map an angle onto (-pi, pi]."""
    wrapped = float(np.arctan2(np.sin(angle), np.cos(angle)))
    if wrapped == -np.pi:
        return float(np.pi)
    return wrapped


def log1p_complex(z: complex) -> complex:
    # numpy's complex log1p goes through log(1 + z) and loses everything for |z| < eps
    x, y = z.real, z.imag
    return complex(0.5 * np.log1p(2.0 * x + x * x + y * y), np.arctan2(y, 1.0 + x))


def expm1_complex(z: complex) -> complex:
    x, y = z.real, z.imag
    real = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    imag = np.exp(x) * np.sin(y)
    return complex(real, imag)


@dataclass(frozen=True)
class LogReal:
    """A real number held as sign and natural log of its magnitude. Zero is log=-inf."""

    log: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError(f"LogReal sign must be +1 or -1, got {self.sign}")
        if np.isnan(self.log):
            raise ValueError("LogReal magnitude is NaN")

    @classmethod
    def of(cls, value: Real) -> "LogReal":
        if isinstance(value, LogReal):
            return value
        value = float(value)
        if value == 0.0:
            return cls.zero()
        return cls(float(np.log(abs(value))), 1 if value > 0 else -1)

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(float("-inf"), 1)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(0.0, 1)

    @property
    def is_zero(self) -> bool:
        return self.log == float("-inf")

    @property
    def value(self) -> float:
        return self.sign * float(np.exp(self.log))

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "LogReal":
        return LogReal(self.log, -self.sign)

    def __abs__(self) -> "LogReal":
        return LogReal(self.log, 1)

    def __mul__(self, other: Real) -> "LogReal":
        other = LogReal.of(other)
        return LogReal(self.log + other.log, self.sign * other.sign)

    __rmul__ = __mul__

    def __truediv__(self, other: Real) -> "LogReal":
        other = LogReal.of(other)
        if other.is_zero:
            raise ZeroDivisionError("LogReal division by zero")
        return LogReal(self.log - other.log, self.sign * other.sign)

    def __rtruediv__(self, other: Real) -> "LogReal":
        return LogReal.of(other) / self

    def reciprocal(self) -> "LogReal":
        if self.is_zero:
            raise ZeroDivisionError("LogReal reciprocal of zero")
        return LogReal(-self.log, self.sign)

    def __pow__(self, exponent: float) -> "LogReal":
        if exponent == 0:
            return LogReal.one()
        if self.sign > 0:
            return LogReal(self.log * exponent, 1)
        if float(exponent) != int(exponent):
            raise ValueError("non-integer power of a negative LogReal")
        return LogReal(self.log * exponent, -1 if int(exponent) % 2 else 1)

    def sqrt(self) -> "LogReal":
        if self.sign < 0 and not self.is_zero:
            raise ValueError("sqrt of a negative LogReal")
        return LogReal(0.5 * self.log, 1)

    def __add__(self, other: Real) -> "LogReal":
        return signed_logsumexp([self, LogReal.of(other)])

    __radd__ = __add__

    def __sub__(self, other: Real) -> "LogReal":
        return signed_logsumexp([self, -LogReal.of(other)])

    def __rsub__(self, other: Real) -> "LogReal":
        return signed_logsumexp([LogReal.of(other), -self])


def signed_logsumexp(terms: Iterable[LogReal]) -> LogReal:
    """Sum LogReal terms without leaving log space."""
    terms = [LogReal.of(t) for t in terms]
    live = [t for t in terms if not t.is_zero]
    if not live:
        return LogReal.zero()
    if len(live) == 1:
        return live[0]
    logs = np.array([t.log for t in live])
    signs = np.array([t.sign for t in live], dtype=float)
    total, sign = logsumexp(logs, b=signs, return_sign=True)
    if sign == 0 or not np.isfinite(total):
        return LogReal.zero()
    return LogReal(float(total), int(sign))


@dataclass(frozen=True)
class LogComplex:
    """A complex number held as log-magnitude and phase in (-pi, pi]."""

    log_abs: float
    arg: float = 0.0

    @classmethod
    def of(cls, value: Union[complex, float, "LogComplex", LogReal]) -> "LogComplex":
        if isinstance(value, LogComplex):
            return value
        if isinstance(value, LogReal):
            return cls(value.log, 0.0 if value.sign > 0 else float(np.pi))
        value = complex(value)
        if value == 0:
            return cls.zero()
        return cls(float(np.log(abs(value))), float(np.angle(value)))

    @classmethod
    def from_log(cls, log_value: complex) -> "LogComplex":
        """exp(log_value), with the log supplied directly."""
        log_value = complex(log_value)
        return cls(log_value.real, wrap_angle(log_value.imag))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(float("-inf"), 0.0)

    @property
    def is_zero(self) -> bool:
        return self.log_abs == float("-inf")

    @property
    def value(self) -> complex:
        if self.is_zero:
            return 0j
        return complex(np.exp(self.log_abs) * np.exp(1j * self.arg))

    def __complex__(self) -> complex:
        return self.value

    def abs(self) -> LogReal:
        return LogReal(self.log_abs, 1)

    @property
    def real(self) -> LogReal:
        return self._component(np.cos(self.arg))

    @property
    def imag(self) -> LogReal:
        return self._component(np.sin(self.arg))

    def _component(self, factor: float) -> LogReal:
        if self.is_zero or factor == 0.0:
            return LogReal.zero()
        return LogReal(self.log_abs + float(np.log(abs(factor))), 1 if factor > 0 else -1)

    def conj(self) -> "LogComplex":
        return LogComplex(self.log_abs, wrap_angle(-self.arg))

    def __neg__(self) -> "LogComplex":
        return LogComplex(self.log_abs, wrap_angle(self.arg + np.pi))

    def __mul__(self, other) -> "LogComplex":
        other = LogComplex.of(other)
        return LogComplex(self.log_abs + other.log_abs, wrap_angle(self.arg + other.arg))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogComplex":
        other = LogComplex.of(other)
        if other.is_zero:
            raise ZeroDivisionError("LogComplex division by zero")
        return LogComplex(self.log_abs - other.log_abs, wrap_angle(self.arg - other.arg))

    def __rtruediv__(self, other) -> "LogComplex":
        return LogComplex.of(other) / self

    def reciprocal(self) -> "LogComplex":
        return LogComplex(-self.log_abs, wrap_angle(-self.arg))

    def sqrt(self) -> "LogComplex":
        """Principal square root."""
        return LogComplex(0.5 * self.log_abs, 0.5 * self.arg)

    def _combine(self, other: "LogComplex", sign: int) -> "LogComplex":
        # the sign is applied to the rectangular parts, so z - z is exactly zero
        if other.is_zero:
            return self
        if self.is_zero:
            return other if sign > 0 else -other
        top = max(self.log_abs, other.log_abs)
        left = np.exp(self.log_abs - top) * np.exp(1j * self.arg)
        right = np.exp(other.log_abs - top) * np.exp(1j * other.arg)
        scaled = left + right if sign > 0 else left - right
        if scaled == 0:
            return LogComplex.zero()
        return LogComplex(top + float(np.log(abs(scaled))), float(np.angle(scaled)))

    def __add__(self, other) -> "LogComplex":
        return self._combine(LogComplex.of(other), 1)

    __radd__ = __add__

    def __sub__(self, other) -> "LogComplex":
        return self._combine(LogComplex.of(other), -1)

    def __rsub__(self, other) -> "LogComplex":
        return LogComplex.of(other)._combine(self, -1)
