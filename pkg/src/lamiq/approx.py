"""Error-bounded real values for reporting irrational results.

An ApproxReal is an exact rational interval [lo, hi] guaranteed to contain the
real quantity it describes; value/error_bound are the midpoint and half-width.
Interval endpoints are exact rationals, so containment survives every
operation by construction.  These never feed back into the geometric pipeline;
they exist for final reporting and root refinement only.
"""

from __future__ import annotations

from gmpy2 import iroot, mpz

from .errors import InputError
from .rational import QQ, format_rational

# Target 2^-PRECISION_BITS interval width for freshly created irrational values.
_DEFAULT_PRECISION_BITS = 128
_precision_bits = _DEFAULT_PRECISION_BITS


def set_precision_bits(bits: int) -> None:
    global _precision_bits
    if bits < 8:
        raise InputError("precision must be at least 8 bits")
    _precision_bits = int(bits)


def get_precision_bits() -> int:
    return _precision_bits


def root_bounds(q, k: int, bits: int | None = None) -> tuple:
    """Rational l <= q**(1/k) <= u with u - l <= 2^-bits, for rational q >= 0."""
    q = QQ(q)
    if q < 0:
        raise InputError(f"cannot take even-order root path of negative {q}")
    if q == 0:
        return QQ(0), QQ(0)
    bits = _precision_bits if bits is None else bits
    scale = mpz(1) << (bits + 2)
    scaled = (q.numerator * scale**k) // q.denominator
    lo_int, _ = iroot(scaled, k)
    lo = QQ(lo_int, scale)
    if lo**k == q:
        return lo, lo
    return lo, QQ(lo_int + 1, scale)


class ApproxReal:
    """Exact rational interval certain to contain the described real number."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = QQ(lo)
        hi = lo if hi is None else QQ(hi)
        if hi < lo:
            raise InputError("interval upper bound below lower bound")
        self.lo = lo
        self.hi = hi

    # -- constructors ---------------------------------------------------

    @staticmethod
    def exactly(q) -> "ApproxReal":
        return ApproxReal(q)

    @staticmethod
    def sqrt(q, bits: int | None = None) -> "ApproxReal":
        return ApproxReal(*root_bounds(q, 2, bits))

    @staticmethod
    def rational_power(q, num: int, den: int, bits: int | None = None) -> "ApproxReal":
        """q**(num/den) for rational q > 0 and positive integers num, den."""
        q = QQ(q)
        if q <= 0:
            raise InputError("rational_power needs a positive base")
        return ApproxReal(*root_bounds(q**num, den, bits))

    @staticmethod
    def from_radq(x, bits: int | None = None) -> "ApproxReal":
        r = ApproxReal.sqrt(QQ(x.radicand), bits)
        return r * x.coeff

    # -- properties -------------------------------------------------------

    @property
    def value(self) -> QQ:
        return (self.lo + self.hi) / 2

    @property
    def error_bound(self) -> QQ:
        return (self.hi - self.lo) / 2

    @property
    def width(self) -> QQ:
        return self.hi - self.lo

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "ApproxReal":
        if isinstance(other, ApproxReal):
            return other
        return ApproxReal(QQ(other))

    def __add__(self, other):
        o = self._coerce(other)
        return ApproxReal(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return ApproxReal(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return ApproxReal(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        quotients = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return ApproxReal(min(quotients), max(quotients))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def root(self, k: int, bits: int | None = None) -> "ApproxReal":
        """k-th root of a nonnegative interval."""
        if self.lo < 0:
            raise InputError("root of an interval reaching below zero")
        lo, _ = root_bounds(self.lo, k, bits)
        _, hi = root_bounds(self.hi, k, bits)
        return ApproxReal(lo, hi)

    def power(self, num: int, den: int, bits: int | None = None) -> "ApproxReal":
        """self**(num/den) for positive intervals and positive integer exponents."""
        if self.lo <= 0:
            raise InputError("rational power needs a strictly positive interval")
        lo, _ = root_bounds(self.lo**num, den, bits)
        _, hi = root_bounds(self.hi**num, den, bits)
        return ApproxReal(lo, hi)

    # -- queries ----------------------------------------------------------

    def contains(self, q) -> bool:
        q = QQ(q)
        return self.lo <= q <= self.hi

    def separated_below(self, other) -> bool:
        """Certainly less than: intervals are disjoint with self on the left."""
        o = self._coerce(other)
        return self.hi < o.lo

    def __float__(self):
        return float(self.value)

    def decimal(self, places: int = 12) -> str:
        """Midpoint rounded to ``places`` decimals (error_bound reported separately)."""
        v = self.value
        scale = mpz(10) ** places
        n = (2 * v.numerator * scale + v.denominator) // (2 * v.denominator)
        sign = "-" if n < 0 else ""
        n = abs(n)
        whole, frac = divmod(n, scale)
        return f"{sign}{whole}.{str(frac).zfill(places)}"

    def __repr__(self):
        return f"ApproxReal({format_rational(self.lo)}, {format_rational(self.hi)})"

    def to_json(self, places: int = 20) -> dict:
        return {
            "decimal": self.decimal(places),
            "error_bound": f"{float(self.error_bound):.3e}",
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
        }
