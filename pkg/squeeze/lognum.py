"""
Signed-log scalars for factorial-heavy formulas.

Matrix elements of the squeezing operator multiply factors such as
Gamma(alpha + 1/2) and sqrt(n!/m!) that overflow a double long before their
product does. Values here carry log|v| plus a sign (or a phase), so products
are sums of logs and the final value is exponentiated once.
"""

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Tuple, Union

_TWO_PI = 2.0 * math.pi
_LOG_MAX_FLOAT = math.log(1.7976931348623157e308)
# Rescale window for recurrences carried in plain floats
_RESCALE_HIGH = 1e150
_RESCALE_LOW = 1e-150
_LOG_RESCALE_HIGH = math.log(_RESCALE_HIGH)


def wrap_phase(phase: float) -> float:
    """Map an angle into (-pi, pi]."""
    wrapped = math.remainder(phase, _TWO_PI)
    if wrapped <= -math.pi:
        wrapped += _TWO_PI
    return wrapped


def _exp_checked(log_abs: float) -> float:
    if log_abs > _LOG_MAX_FLOAT:
        return math.inf
    return math.exp(log_abs)


@dataclass(frozen=True)
class LogSigned:
    log_abs: float
    sign: int

    def __post_init__(self):
        # sign == 0 exactly when the value is zero
        if self.log_abs == -math.inf or self.sign == 0:
            object.__setattr__(self, "log_abs", -math.inf)
            object.__setattr__(self, "sign", 0)
        elif self.sign not in (-1, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")

    @classmethod
    def from_real(cls, value: float) -> "LogSigned":
        if value == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @classmethod
    def from_log(cls, log_abs: float, sign: int = 1) -> "LogSigned":
        return cls(log_abs, sign)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def to_real(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * _exp_checked(self.log_abs)

    def scaled(self, log_factor: float) -> "LogSigned":
        """Multiply by exp(log_factor)."""
        if self.sign == 0:
            return self
        return LogSigned(self.log_abs + log_factor, self.sign)

    def __neg__(self) -> "LogSigned":
        return LogSigned(self.log_abs, -self.sign)

    def __abs__(self) -> "LogSigned":
        return LogSigned(self.log_abs, abs(self.sign))

    def __mul__(self, other: Union["LogSigned", float]) -> "LogSigned":
        if not isinstance(other, LogSigned):
            other = LogSigned.from_real(other)
        if self.sign == 0 or other.sign == 0:
            return ZERO
        return LogSigned(self.log_abs + other.log_abs, self.sign * other.sign)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["LogSigned", float]) -> "LogSigned":
        if not isinstance(other, LogSigned):
            other = LogSigned.from_real(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogSigned")
        if self.sign == 0:
            return ZERO
        return LogSigned(self.log_abs - other.log_abs, self.sign * other.sign)

    def __pow__(self, exponent: int) -> "LogSigned":
        if not isinstance(exponent, int):
            raise TypeError("LogSigned supports integer powers only")
        if exponent == 0:
            return ONE
        if self.sign == 0:
            if exponent < 0:
                raise ZeroDivisionError("negative power of zero")
            return ZERO
        sign = self.sign if exponent % 2 else 1
        return LogSigned(self.log_abs * exponent, sign)

    def __add__(self, other: Union["LogSigned", float]) -> "LogSigned":
        if not isinstance(other, LogSigned):
            other = LogSigned.from_real(other)
        if other.sign == 0:
            return self
        if self.sign == 0:
            return other
        big, small = (self, other) if self.log_abs >= other.log_abs else (other, self)
        ratio = math.exp(small.log_abs - big.log_abs)
        if big.sign == small.sign:
            return LogSigned(big.log_abs + math.log1p(ratio), big.sign)
        if ratio == 1.0:
            return ZERO
        return LogSigned(big.log_abs + math.log1p(-ratio), big.sign)

    __radd__ = __add__

    def __sub__(self, other: Union["LogSigned", float]) -> "LogSigned":
        if not isinstance(other, LogSigned):
            other = LogSigned.from_real(other)
        return self + (-other)

    def __repr__(self) -> str:
        return f"LogSigned({self.sign:+d} * exp({self.log_abs!r}))"


ZERO = LogSigned(-math.inf, 0)
ONE = LogSigned(0.0, 1)


def series_from_ratios(ratios: Iterable[float]) -> Tuple[LogSigned, float]:
    """
    Sum t_0 + t_1 + ... with t_0 = 1 and t_{j+1} = t_j * ratios[j].

    Terms are kept as floats against a shared log scale and added with
    math.fsum. Returns the sum and the number of decimal digits lost to
    cancellation, log10(sum |t| / |sum t|), which is infinite when the terms
    cancel exactly. Iteration stops at the first zero ratio.
    """
    terms = [1.0]
    scale = 0.0
    term = 1.0
    for ratio in ratios:
        term *= ratio
        if term == 0.0:
            break
        if abs(term) > _RESCALE_HIGH:
            terms = [t / _RESCALE_HIGH for t in terms]
            term /= _RESCALE_HIGH
            scale += _LOG_RESCALE_HIGH
        terms.append(term)
    total = math.fsum(terms)
    magnitude = math.fsum(abs(t) for t in terms)
    if total == 0.0:
        return ZERO, math.inf
    digits = math.log10(magnitude / abs(total))
    return LogSigned.from_real(total).scaled(scale), digits


@dataclass(frozen=True)
class LogComplex:
    log_abs: float
    phase: float

    def __post_init__(self):
        if self.log_abs == -math.inf:
            object.__setattr__(self, "phase", 0.0)
        else:
            object.__setattr__(self, "phase", wrap_phase(self.phase))

    @classmethod
    def from_complex(cls, value: complex) -> "LogComplex":
        if value == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(value)), math.atan2(value.imag, value.real))

    @classmethod
    def from_log_signed(cls, value: LogSigned, phase: float = 0.0) -> "LogComplex":
        if value.sign == 0:
            return cls(-math.inf, 0.0)
        if value.sign < 0:
            phase += math.pi
        return cls(value.log_abs, phase)

    @property
    def is_zero(self) -> bool:
        return self.log_abs == -math.inf

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        magnitude = _exp_checked(self.log_abs)
        return complex(magnitude * math.cos(self.phase), magnitude * math.sin(self.phase))

    def conjugate(self) -> "LogComplex":
        return LogComplex(self.log_abs, -self.phase)

    def scaled(self, log_factor: float) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.log_abs + log_factor, self.phase)

    def rotated(self, angle: float) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.log_abs, self.phase + angle)

    def __mul__(self, other: Union["LogComplex", LogSigned]) -> "LogComplex":
        if isinstance(other, LogSigned):
            other = LogComplex.from_log_signed(other)
        if self.is_zero or other.is_zero:
            return LOG_COMPLEX_ZERO
        return LogComplex(self.log_abs + other.log_abs, self.phase + other.phase)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"LogComplex(exp({self.log_abs!r}) * e^(i*{self.phase!r}))"


LOG_COMPLEX_ZERO = LogComplex(-math.inf, 0.0)


def three_term_recurrence(
    seed0: LogSigned,
    seed1: LogSigned,
    steps: int,
    coefficients: Callable[[int], Tuple[float, float]],
) -> LogSigned:
    """
    Run y_j = p_j * y_{j-1} + q_j * y_{j-2} from y_0 = seed0, y_1 = seed1 and
    return y_steps, where (p_j, q_j) = coefficients(j).

    The pair is carried as plain floats against a common log scale and
    renormalized whenever it leaves the rescale window, so the range is that
    of LogSigned rather than of a double.
    """
    if steps == 0:
        return seed0
    if steps == 1:
        return seed1
    scale = max(seed0.log_abs, seed1.log_abs)
    if scale == -math.inf:
        return ZERO
    prev = seed0.to_real() if seed0.sign == 0 else seed0.sign * math.exp(seed0.log_abs - scale)
    cur = seed1.to_real() if seed1.sign == 0 else seed1.sign * math.exp(seed1.log_abs - scale)
    for j in range(2, steps + 1):
        p, q = coefficients(j)
        prev, cur = cur, p * cur + q * prev
        mag = max(abs(cur), abs(prev))
        if mag > _RESCALE_HIGH or 0.0 < mag < _RESCALE_LOW:
            prev /= mag
            cur /= mag
            scale += math.log(mag)
        elif mag == 0.0:
            return ZERO
    return LogSigned.from_real(cur).scaled(scale)
