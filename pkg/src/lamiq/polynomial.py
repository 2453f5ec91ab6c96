"""Exact univariate polynomials over the rationals, with Sturm-sequence root isolation.

The family pipeline stores moment functions as polynomials in nu = a^2 with
rational coefficients; extremum candidates are isolated as rational intervals
certified by exact sign counts, then refined by bisection.
"""

from __future__ import annotations

from gmpy2 import gcd, mpz

from .errors import InputError
from .rational import QQ, ZERO, format_rational


class Poly:
    """Dense polynomial, coefficients ascending, exact rationals, no trailing zeros."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [QQ(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @staticmethod
    def zero() -> "Poly":
        return Poly(())

    @staticmethod
    def monomial(c, k: int) -> "Poly":
        return Poly([ZERO] * k + [QQ(c)])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k: int) -> QQ:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else ZERO

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self[k] + other[k] for k in range(n)])

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly.zero()
            out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return Poly(out)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "Poly":
        c = QQ(c)
        return Poly([c * a for a in self.coeffs])

    def __pow__(self, k: int) -> "Poly":
        out = Poly([1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def derivative(self) -> "Poly":
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:])

    def __call__(self, x) -> QQ:
        x = QQ(x)
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def shift_down(self) -> tuple["Poly", int]:
        """Remove the x^k factor; returns (quotient, k)."""
        k = 0
        cs = self.coeffs
        while k < len(cs) and cs[k] == 0:
            k += 1
        return Poly(cs[k:]), k

    def content_and_primitive(self) -> tuple[QQ, "Poly"]:
        """self = content * primitive with integer primitive coefficients,
        gcd 1, and positive leading coefficient."""
        if self.is_zero():
            return ZERO, Poly.zero()
        den = mpz(1)
        for c in self.coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        ints = [c.numerator * (den // c.denominator) for c in self.coeffs]
        g = mpz(0)
        for v in ints:
            g = gcd(g, v)
        if ints[-1] < 0:
            g = -g
        prim = Poly([QQ(v, g) for v in ints])
        return QQ(g, den), prim

    def primitive(self) -> "Poly":
        return self.content_and_primitive()[1]

    def divmod(self, other) -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = [ZERO] * max(0, self.degree - other.degree + 1)
        rem = list(self.coeffs)
        d = other.degree
        lead = other.coeffs[-1]
        while len(rem) - 1 >= d and any(c != 0 for c in rem):
            while rem and rem[-1] == 0:
                rem.pop()
            if len(rem) - 1 < d:
                break
            k = len(rem) - 1 - d
            f = rem[-1] / lead
            q[k] = f
            for i, c in enumerate(other.coeffs):
                rem[k + i] -= f * c
            rem.pop()
        return Poly(q), Poly(rem)

    def root_multiplicity(self, x0) -> int:
        """Multiplicity of the rational root x0 (0 when not a root)."""
        x0 = QQ(x0)
        p = self
        m = 0
        while not p.is_zero() and p(x0) == 0:
            p, rem = p.divmod(Poly([-x0, 1]))
            assert rem.is_zero()
            m += 1
        return m

    def format_coeffs(self) -> list[str]:
        return [format_rational(c) for c in self.coeffs]

    def __repr__(self):
        if self.is_zero():
            return "Poly(0)"
        terms = [f"{format_rational(c)}*x^{k}" for k, c in enumerate(self.coeffs) if c != 0]
        return "Poly(" + " + ".join(terms) + ")"


def sturm_sequence(p: Poly) -> list[Poly]:
    """Sturm chain of the squarefree part of p."""
    # squarefree part: p / gcd(p, p')
    g = _poly_gcd(p, p.derivative())
    if g.degree > 0:
        p = p.divmod(g)[0]
    seq = [p, p.derivative()]
    while seq[-1].degree > 0:
        rem = seq[-2].divmod(seq[-1])[1]
        if rem.is_zero():
            break
        # normalize by the positive content only; the sign pattern is the point
        content, prim = rem.content_and_primitive()
        seq.append(-prim if content > 0 else prim)
    return seq


def _poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    if a.is_zero():
        return a
    return a.primitive()


def _sign_variations(values) -> int:
    signs = [1 if v > 0 else -1 for v in values if v != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _variations_at(seq: list[Poly], x) -> int:
    return _sign_variations([p(x) for p in seq])


def count_roots(p: Poly, lo, hi, seq: list[Poly] | None = None) -> int:
    """Number of distinct real roots in (lo, hi]."""
    if seq is None:
        seq = sturm_sequence(p)
    return _variations_at(seq, lo) - _variations_at(seq, hi)


def isolate_real_roots(p: Poly, lo=None, hi=None) -> list[tuple]:
    """Disjoint rational intervals, each certified (Sturm count 1) to hold one real root.

    Roots landed on exactly (by an endpoint or a bisection midpoint) come back
    as degenerate intervals [r, r].  Bounds default to the Cauchy bound on all
    real roots.
    """
    if p.is_zero():
        raise InputError("cannot isolate roots of the zero polynomial")
    if p.degree == 0:
        return []
    seq = sturm_sequence(p)
    f = seq[0]  # squarefree part
    if lo is None or hi is None:
        lead = abs(f.coeffs[-1])
        bound = 1 + max(abs(c) for c in f.coeffs) / lead
        lo = -bound if lo is None else QQ(lo)
        hi = bound if hi is None else QQ(hi)
    lo, hi = QQ(lo), QQ(hi)
    out: list[tuple] = []

    def buffer_around(x, start):
        """Radius d with x the only root in [x-d, x+d] and nonzero endpoints."""
        d = start
        while (
            f(x - d) == 0
            or f(x + d) == 0
            or count_roots(f, x - d, x + d, seq) != 1
        ):
            d = d / 2
        return d

    if f(lo) == 0:
        out.append((lo, lo))
        lo = lo + buffer_around(lo, (hi - lo) / 4)
    if hi > lo and f(hi) == 0:
        out.append((hi, hi))
        hi = hi - buffer_around(hi, (hi - lo) / 4)

    def recurse(a, b):
        # invariant: f(a) != 0 and f(b) != 0
        count = count_roots(f, a, b, seq)
        if count == 0:
            return
        if count == 1:
            out.append((a, b))
            return
        mid = (a + b) / 2
        if f(mid) == 0:
            out.append((mid, mid))
            d = buffer_around(mid, (b - a) / 4)
            recurse(a, mid - d)
            recurse(mid + d, b)
        else:
            recurse(a, mid)
            recurse(mid, b)

    if hi > lo:
        recurse(lo, hi)
    out.sort(key=lambda iv: iv[0])
    return out


def refine_root(p: Poly, interval: tuple, max_width) -> tuple:
    """Bisection refinement of an isolating interval down to the requested width."""
    a, b = QQ(interval[0]), QQ(interval[1])
    if a == b:
        return a, b
    fa = p(a)
    if fa == 0:
        return a, a
    if p(b) == 0:
        return b, b
    max_width = QQ(max_width)
    sa = 1 if fa > 0 else -1
    while b - a > max_width:
        mid = (a + b) / 2
        fm = p(mid)
        if fm == 0:
            return mid, mid
        if (1 if fm > 0 else -1) == sa:
            a = mid
        else:
            b = mid
    return a, b
