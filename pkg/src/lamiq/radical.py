"""Quadratic-radical numbers r*sqrt(s) with r rational and s a squarefree positive integer.

Face volumes and heights at rational lattice parameters live in single square-root
extensions of the rationals, so this one form is the entire closed number system
the moment recursion needs.  Addition is only defined within one radicand; a
mismatched sum is a correctness tripwire, not a representable value.
"""

from __future__ import annotations

from gmpy2 import gcd, is_prime, is_square, isqrt, mpq, mpz

from .errors import IncompatibleRadicandError, InputError
from .rational import QQ, format_rational

_SMALL_PRIME_LIMIT = 10_000


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * limit
    sieve[0] = sieve[1] = 0
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i in range(limit) if sieve[i]]


_PRIMES = _small_primes(_SMALL_PRIME_LIMIT)


def _pollard_rho(n: mpz) -> mpz:
    """A nontrivial factor of composite odd n."""
    if n % 2 == 0:
        return mpz(2)
    x, c = mpz(2), mpz(1)
    while True:
        y, d = x, mpz(1)
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = gcd(abs(x - y), n)
        if d != n:
            return d
        c += 1
        x = c


def _factor(n: mpz, out: dict) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[int(n)] = out.get(int(n), 0) + 1
        return
    if is_square(n):
        sub: dict = {}
        _factor(isqrt(n), sub)
        for p, e in sub.items():
            out[p] = out.get(p, 0) + 2 * e
        return
    d = _pollard_rho(n)
    _factor(d, out)
    _factor(n // d, out)


def square_free_split(n) -> tuple[mpz, mpz]:
    """n = outer^2 * radical with radical squarefree; returns (outer, radical)."""
    n = mpz(n)
    if n <= 0:
        raise InputError(f"square_free_split needs a positive integer, got {n}")
    outer, radical = mpz(1), mpz(1)
    for p in _PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            outer *= mpz(p) ** (e // 2)
            if e & 1:
                radical *= p
    if n > 1:
        exps: dict[int, int] = {}
        _factor(n, exps)
        for p, e in exps.items():
            outer *= mpz(p) ** (e // 2)
            if e & 1:
                radical *= p
    return outer, radical


class RadQ:
    """coeff * sqrt(radicand), normalized so the radicand is squarefree and zero is 0*sqrt(1)."""

    __slots__ = ("coeff", "radicand")

    def __init__(self, coeff, radicand=1, _normalized=False):
        if _normalized:
            self.coeff = coeff
            self.radicand = radicand
            return
        c = QQ(coeff)
        s = mpz(radicand)
        if s < 1:
            raise InputError(f"radicand must be a positive integer, got {radicand}")
        if c == 0:
            self.coeff, self.radicand = QQ(0), mpz(1)
            return
        outer, radical = square_free_split(s)
        self.coeff = c * outer
        self.radicand = radical

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_rational(q) -> "RadQ":
        q = QQ(q)
        if q == 0:
            return RadQ(QQ(0), mpz(1), _normalized=True)
        return RadQ(q, mpz(1), _normalized=True)

    @staticmethod
    def sqrt_rational(q) -> "RadQ":
        """Exact square root of a nonnegative rational: coeff^2 * radicand == q."""
        q = QQ(q)
        if q < 0:
            raise InputError(f"sqrt of negative rational {q}")
        if q == 0:
            return RadQ.from_rational(0)
        num, den = q.numerator, q.denominator
        # sqrt(num/den) = sqrt(num*den)/den
        outer, radical = square_free_split(num * den)
        return RadQ(QQ(outer, den), radical, _normalized=True)

    @staticmethod
    def sqrt_with_radicand(q, radicand: int) -> "RadQ":
        """Square root of q > 0 under a known radicand: q must equal c^2 * radicand.

        Cheap (one integer square root); raises the radicand tripwire when the
        claim fails instead of falling back to factoring.
        """
        q = QQ(q)
        if q <= 0:
            raise InputError(f"sqrt_with_radicand needs a positive value, got {q}")
        scaled = q / radicand
        n2 = scaled.numerator * scaled.denominator
        if not is_square(n2):
            raise IncompatibleRadicandError(
                f"value {q} is not a square multiple of radicand {radicand}"
            )
        return RadQ(QQ(isqrt(n2), scaled.denominator), mpz(radicand), _normalized=True)

    # -- arithmetic ---------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, RadQ):
            if self.coeff == 0 or other.coeff == 0:
                return RadQ.from_rational(0)
            if self.radicand == other.radicand:
                return RadQ(self.coeff * other.coeff * self.radicand, mpz(1), _normalized=True)
            g = gcd(self.radicand, other.radicand)
            # (s1/g)*(s2/g) is squarefree because s1/g and s2/g are coprime and squarefree
            rad = (self.radicand // g) * (other.radicand // g)
            return RadQ(self.coeff * other.coeff * g, rad, _normalized=True)
        c = self.coeff * QQ(other)
        if c == 0:
            return RadQ.from_rational(0)
        return RadQ(c, self.radicand, _normalized=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RadQ):
            if other.coeff == 0:
                raise ZeroDivisionError("RadQ division by zero")
            # 1/sqrt(s) = sqrt(s)/s
            inv = RadQ(1 / (other.coeff * other.radicand), other.radicand, _normalized=True)
            return self * inv
        return self * (1 / QQ(other))

    def __add__(self, other):
        if not isinstance(other, RadQ):
            other = RadQ.from_rational(other)
        if self.coeff == 0:
            return other
        if other.coeff == 0:
            return self
        if self.radicand != other.radicand:
            raise IncompatibleRadicandError(
                f"cannot add sqrt({self.radicand}) and sqrt({other.radicand}) terms exactly"
            )
        c = self.coeff + other.coeff
        if c == 0:
            return RadQ.from_rational(0)
        return RadQ(c, self.radicand, _normalized=True)

    __radd__ = __add__

    def __neg__(self):
        if self.coeff == 0:
            return self
        return RadQ(-self.coeff, self.radicand, _normalized=True)

    def __sub__(self, other):
        if not isinstance(other, RadQ):
            other = RadQ.from_rational(other)
        return self + (-other)

    # -- queries ------------------------------------------------------

    def squared(self) -> QQ:
        """Exact rational value of self^2."""
        return self.coeff * self.coeff * self.radicand

    def is_rational(self) -> bool:
        return self.radicand == 1

    def as_rational(self) -> QQ:
        if self.radicand != 1:
            raise InputError(f"{self} is irrational")
        return self.coeff

    def sign(self) -> int:
        return (self.coeff > 0) - (self.coeff < 0)

    def __bool__(self):
        return self.coeff != 0

    def __eq__(self, other):
        if isinstance(other, RadQ):
            return self.coeff == other.coeff and self.radicand == other.radicand
        return self.radicand == 1 and self.coeff == other

    def __lt__(self, other):
        if not isinstance(other, RadQ):
            other = RadQ.from_rational(other)
        if self.radicand == other.radicand or not self or not other:
            return (self - other).sign() < 0
        if self.sign() != other.sign():
            return self.sign() < other.sign()
        if self.sign() > 0:
            return self.squared() < other.squared()
        return self.squared() > other.squared()

    def __le__(self, other):
        return self == other or self < other

    def __hash__(self):
        return hash((self.coeff, self.radicand))

    def __repr__(self):
        return f"RadQ({format_rational(self.coeff)}, {self.radicand})"

    def __str__(self):
        if self.radicand == 1:
            return format_rational(self.coeff)
        return f"{format_rational(self.coeff)}*sqrt({self.radicand})"

    def to_json(self) -> dict:
        return {"coeff": format_rational(self.coeff), "radicand": str(self.radicand)}

    def to_float(self) -> float:
        return float(self.coeff) * float(self.radicand) ** 0.5


def radq_normalize(coeff, radicand) -> RadQ:
    """Canonical (coeff, squarefree radicand) with the same value coeff*sqrt(radicand)."""
    return RadQ(coeff, radicand)


def radq_sqrt(q) -> RadQ:
    return RadQ.sqrt_rational(q)


RADQ_ZERO = RadQ.from_rational(0)
RADQ_ONE = RadQ.from_rational(1)
