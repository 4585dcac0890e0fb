"""Signed log-space scalars and log-combinatorics.

Every information quantity in the package is carried in nats; conversion to
bits happens only when a report is rendered.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from scipy.special import gammaln

LN2 = math.log(2.0)
LN10 = math.log(10.0)


@dataclass(frozen=True)
class LogScalar:
    """A real number stored as ``sign * exp(ln_mag)``.

    ``sign == 0`` is exact zero and keeps ``ln_mag = -inf``. Values built
    with ``from_float`` remember the original double so that converting back
    is exact; rounding ``ln|x|`` alone would cost up to ``|ln x|`` ulps.
    """

    sign: int
    ln_mag: float
    exact: Optional[float] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "ln_mag", -math.inf)
        elif not math.isfinite(self.ln_mag):
            if self.ln_mag == -math.inf:
                object.__setattr__(self, "sign", 0)
            else:
                raise ValueError(f"ln_mag must be finite for nonzero sign, got {self.ln_mag!r}")

    @classmethod
    def zero(cls) -> "LogScalar":
        return cls(0, -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogScalar":
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"cannot represent non-finite value {x!r}")
        if x == 0.0:
            return cls.zero()
        return cls(1 if x > 0 else -1, math.log(abs(x)), x)

    @classmethod
    def from_log(cls, ln_mag: float, sign: int = 1) -> "LogScalar":
        return cls(sign, ln_mag)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def to_float(self) -> float:
        """Exponentiate; overflows to +-inf for huge magnitudes."""
        if self.sign == 0:
            return 0.0
        if self.exact is not None:
            return self.exact
        try:
            return self.sign * math.exp(self.ln_mag)
        except OverflowError:
            return self.sign * math.inf

    def log10(self) -> float:
        """log10 of the magnitude (``-inf`` for zero)."""
        return self.ln_mag / LN10

    def __neg__(self) -> "LogScalar":
        return LogScalar(-self.sign, self.ln_mag, None if self.exact is None else -self.exact)

    def __add__(self, other: "LogScalar") -> "LogScalar":
        return log_add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other: "LogScalar") -> "LogScalar":
        return log_add(self, -_coerce(other))

    def __mul__(self, other: "LogScalar") -> "LogScalar":
        other = _coerce(other)
        if self.sign == 0 or other.sign == 0:
            return LogScalar.zero()
        return LogScalar(self.sign * other.sign, self.ln_mag + other.ln_mag)

    __rmul__ = __mul__

    def __truediv__(self, other: "LogScalar") -> "LogScalar":
        other = _coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogScalar")
        if self.sign == 0:
            return LogScalar.zero()
        return LogScalar(self.sign * other.sign, self.ln_mag - other.ln_mag)

    def scientific(self, digits: int = 4) -> str:
        """Render as ``d.ddde+XX`` without exponentiating."""
        if self.sign == 0:
            return "0"
        l10 = self.log10()
        exponent = math.floor(l10)
        mantissa = 10.0 ** (l10 - exponent)
        text = f"{mantissa:.{digits - 1}f}"
        if text.startswith("10"):
            exponent += 1
            text = f"{mantissa / 10:.{digits - 1}f}"
        prefix = "-" if self.sign < 0 else ""
        return f"{prefix}{text}e{exponent:+d}"

    def to_json(self) -> dict:
        return {"sign": self.sign, "ln_mag": None if self.sign == 0 else self.ln_mag}

    @classmethod
    def from_json(cls, obj: dict) -> "LogScalar":
        if obj["sign"] == 0:
            return cls.zero()
        return cls(int(obj["sign"]), float(obj["ln_mag"]))


Number = Union[LogScalar, float, int]


def _coerce(x: Number) -> LogScalar:
    if isinstance(x, LogScalar):
        return x
    return LogScalar.from_float(x)


def log_add(a: Number, b: Number) -> LogScalar:
    """Sum of two log-space scalars using a shifted-exponent sum."""
    a, b = _coerce(a), _coerce(b)
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    if a.ln_mag < b.ln_mag:
        a, b = b, a
    gap = b.ln_mag - a.ln_mag  # <= 0
    if a.sign == b.sign:
        return LogScalar(a.sign, a.ln_mag + math.log1p(math.exp(gap)))
    if gap == 0.0:
        return LogScalar.zero()
    # log(1 - e^gap) through expm1 stays finite when gap is a few ulps below 0
    return LogScalar(a.sign, a.ln_mag + math.log(-math.expm1(gap)))


def log_sum(values) -> LogScalar:
    total = LogScalar.zero()
    for v in values:
        total = log_add(total, v)
    return total


def log_binomial(n: int, k: int) -> LogScalar:
    """ln C(n, k) through log-gamma.

    ``k > n``, ``k < 0`` and negative ``n`` give zero; this is the convention
    that keeps the telescoped eigenfunction count valid at ``k in {0, 1}``.
    """
    n, k = int(n), int(k)
    if n < 0 or k < 0 or k > n:
        return LogScalar.zero()
    if k == 0 or k == n:
        return LogScalar(1, 0.0)
    return LogScalar(1, float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)))


def to_bits(x: Number) -> float:
    """Convert an information quantity from nats to bits."""
    if isinstance(x, LogScalar):
        return x.to_float() / LN2
    return float(x) / LN2


def log_to_bits(x: LogScalar) -> LogScalar:
    """Nats-to-bits on a log-space value; never overflows."""
    if x.sign == 0:
        return x
    return LogScalar(x.sign, x.ln_mag - math.log(LN2))
