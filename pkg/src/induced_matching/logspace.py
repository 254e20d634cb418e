"""Sign + natural-log representation of nonnegative reals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class LogValue:
    """A nonnegative real stored as ``sign`` and ``log_magnitude``.

    ``sign`` is 0 for the value zero (then ``log_magnitude`` is ``-inf``) and
    1 otherwise. Products add logs, sums use log-sum-exp, so factorials of
    size 10^8 are representable without overflow.
    """

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError(f"sign must be 0 or 1, got {self.sign}")
        if math.isnan(self.log_magnitude):
            raise ValueError("log_magnitude is NaN")
        if self.sign == 0 and self.log_magnitude != _NEG_INF:
            raise ValueError("zero must carry log_magnitude = -inf")
        if self.sign == 1 and self.log_magnitude == _NEG_INF:
            object.__setattr__(self, "sign", 0)

    @classmethod
    def zero(cls) -> LogValue:
        return cls(0, _NEG_INF)

    @classmethod
    def one(cls) -> LogValue:
        return cls(1, 0.0)

    @classmethod
    def from_log(cls, log_value: float) -> LogValue:
        if log_value == _NEG_INF:
            return cls.zero()
        return cls(1, float(log_value))

    @classmethod
    def from_float(cls, x: float) -> LogValue:
        if x < 0:
            raise ValueError(f"LogValue holds nonnegative reals only, got {x}")
        if x == 0:
            return cls.zero()
        return cls(1, math.log(x))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return math.exp(self.log_magnitude)
        except OverflowError:
            return math.inf

    @property
    def value(self) -> float:
        return float(self)

    def __mul__(self, other: LogValue) -> LogValue:
        if self.sign == 0 or other.sign == 0:
            return LogValue.zero()
        return LogValue(1, self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: LogValue) -> LogValue:
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(1, self.log_magnitude - other.log_magnitude)

    def __add__(self, other: LogValue) -> LogValue:
        return logsumexp([self, other])

    def __pow__(self, exponent: float) -> LogValue:
        if self.sign == 0:
            if exponent <= 0:
                raise ZeroDivisionError("0 raised to a non-positive power")
            return LogValue.zero()
        return LogValue(1, self.log_magnitude * exponent)

    def reciprocal(self) -> LogValue:
        return LogValue.one() / self

    # ordering follows the real values; -inf encodes zero so plain float
    # comparison of the logs is already consistent
    def __lt__(self, other: LogValue) -> bool:
        return self.log_magnitude < other.log_magnitude

    def __le__(self, other: LogValue) -> bool:
        return self.log_magnitude <= other.log_magnitude

    def __gt__(self, other: LogValue) -> bool:
        return self.log_magnitude > other.log_magnitude

    def __ge__(self, other: LogValue) -> bool:
        return self.log_magnitude >= other.log_magnitude

    def to_json(self) -> dict:
        return {"sign": self.sign, "log": format_float(self.log_magnitude)}


def logsumexp(values: Iterable[LogValue]) -> LogValue:
    """Sum of ``values`` in log space.

    The summation order is the iteration order: a running maximum is kept and
    the partial sum is rescaled whenever the maximum moves, so the result is
    a deterministic function of the input sequence.
    """
    running_max = _NEG_INF
    scaled = 0.0
    for v in values:
        if v.sign == 0:
            continue
        x = v.log_magnitude
        if x <= running_max:
            scaled += math.exp(x - running_max)
        else:
            scaled = scaled * math.exp(running_max - x) + 1.0
            running_max = x
    if running_max == _NEG_INF:
        return LogValue.zero()
    return LogValue(1, running_max + math.log(scaled))


def format_float(x: float) -> str:
    """Round-trippable decimal string (17 significant digits)."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")
