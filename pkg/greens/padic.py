"""Truncated arithmetic in Q_p and in K = Q_p(u), u^2 = g.

Scalars are stored floating-slash style: ``p**valuation * unit`` with the unit
known modulo ``p**precision``.  A zero scalar has ``precision == 0`` and keeps
its absolute precision in ``valuation`` (``EXACT`` for a true zero).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy import factorint, isprime
from sympy.ntheory import legendre_symbol

from greens.errors import (
    DivisionByIndistinguishableZero,
    NoSquareRoot,
    NotAUnit,
    PadicError,
    ZeroArgument,
)

logger = logging.getLogger("greens.padic")

EXACT = 10**9
COERCION_CAP = 400


def int_valuation(m, p):
    """p-adic valuation of an integer (EXACT for zero)."""
    if m == 0:
        return EXACT
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


def rational_valuation(q, p):
    q = Fraction(q)
    if q == 0:
        return EXACT
    return int_valuation(q.numerator, p) - int_valuation(q.denominator, p)


def _split(m, p):
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v, m


def _unit_of_rational(q, p, prec):
    vn, num = _split(q.numerator, p)
    vd, den = _split(q.denominator, p)
    mod = p**prec
    return vn - vd, num * pow(den, -1, mod) % mod


@lru_cache(maxsize=None)
def nonresidue(p):
    """The fixed nonresidue g: -1 when p = 3 mod 4, else the smallest one."""
    if p % 4 == 3:
        return -1
    for a in range(2, p):
        if legendre_symbol(a, p) == -1:
            return a
    raise PadicError(f"no quadratic nonresidue mod {p}")


def is_square_mod(a, p):
    return a % p != 0 and legendre_symbol(a % p, p) == 1


def squarefree_decomposition(d):
    """Return (f, d0) with d = f**2 * d0, f > 0 and d0 squarefree (signed)."""
    f, d0 = 1, -1 if d < 0 else 1
    for q, e in factorint(abs(d)).items():
        f *= q ** (e // 2)
        d0 *= q ** (e % 2)
    return f, d0


class PadicScalar:
    """An element of Q_p known to a finite number of digits."""

    __slots__ = ("p", "unit", "valuation", "precision")

    def __init__(self, p, unit, valuation, precision):
        self.p = p
        self.unit = unit
        self.valuation = valuation
        self.precision = precision

    @classmethod
    def zero(cls, p, absprec=EXACT):
        return cls(p, 0, absprec, 0)

    @classmethod
    def from_rational(cls, q, p, prec):
        q = Fraction(q)
        if q == 0:
            return cls.zero(p)
        v, unit = _unit_of_rational(q, p, prec)
        return cls(p, unit, v, prec)

    @classmethod
    def scaled(cls, p, m, v, absprec):
        """The element p**v * m known modulo p**absprec, normalized."""
        r = absprec - v
        if r <= 0:
            return cls.zero(p, absprec)
        m %= p**r
        if m == 0:
            return cls.zero(p, absprec)
        k, m = _split(m, p)
        return cls(p, m, v + k, r - k)

    @property
    def absolute_precision(self):
        return self.valuation + self.precision

    def is_zero(self):
        return self.precision == 0

    def _coerce(self, other, additive):
        if isinstance(other, PadicScalar):
            return other
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if q == 0:
                return PadicScalar.zero(self.p)
            if additive:
                prec = self.absolute_precision - rational_valuation(q, self.p)
            else:
                prec = self.precision
            return PadicScalar.from_rational(q, self.p, max(1, min(prec, COERCION_CAP)))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other, True)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            if other.valuation >= self.absolute_precision:
                return self
            return PadicScalar.scaled(self.p, self.unit, self.valuation, other.valuation)
        if self.is_zero():
            return other + self
        absprec = min(self.absolute_precision, other.absolute_precision)
        v = min(self.valuation, other.valuation)
        m = self.unit * self.p ** (self.valuation - v) + other.unit * self.p ** (other.valuation - v)
        return PadicScalar.scaled(self.p, m, v, absprec)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        return PadicScalar(self.p, -self.unit % self.p**self.precision, self.valuation, self.precision)

    def __sub__(self, other):
        other = self._coerce(other, True)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other, False)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return PadicScalar.zero(self.p, self.valuation + other.valuation)
        prec = min(self.precision, other.precision)
        return PadicScalar(self.p, self.unit * other.unit % self.p**prec, self.valuation + other.valuation, prec)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise DivisionByIndistinguishableZero(f"division by O({self.p}^{self.valuation})")
        mod = self.p**self.precision
        return PadicScalar(self.p, pow(self.unit, -1, mod), -self.valuation, self.precision)

    def __truediv__(self, other):
        other = self._coerce(other, False)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other, False) * self.inverse()

    def digits(self):
        """Little-endian base-p digits of the unit part."""
        out = []
        m = self.unit
        for _ in range(self.precision):
            out.append(m % self.p)
            m //= self.p
        return out

    def __repr__(self):
        if self.is_zero():
            return f"O({self.p}^{self.valuation})"
        return f"PadicScalar({self.p}^{self.valuation} * {self.unit} + O({self.p}^{self.absolute_precision}))"


class QuadExtScalar:
    """An element p**valuation * (x + y*u) of K with u**2 = g."""

    __slots__ = ("p", "g", "x", "y", "valuation", "precision")

    def __init__(self, p, g, x, y, valuation, precision):
        self.p = p
        self.g = g
        self.x = x
        self.y = y
        self.valuation = valuation
        self.precision = precision

    @classmethod
    def zero(cls, p, g, absprec=EXACT):
        return cls(p, g, 0, 0, absprec, 0)

    @classmethod
    def from_rational(cls, q, p, g, prec):
        q = Fraction(q)
        if q == 0:
            return cls.zero(p, g)
        v, unit = _unit_of_rational(q, p, prec)
        return cls(p, g, unit, 0, v, prec)

    @classmethod
    def from_padic(cls, a, g):
        if a.is_zero():
            return cls.zero(a.p, g, a.valuation)
        return cls(a.p, g, a.unit, 0, a.valuation, a.precision)

    @classmethod
    def scaled(cls, p, g, x, y, v, absprec):
        r = absprec - v
        if r <= 0:
            return cls.zero(p, g, absprec)
        mod = p**r
        x %= mod
        y %= mod
        if x == 0 and y == 0:
            return cls.zero(p, g, absprec)
        k = 0
        while x % p == 0 and y % p == 0:
            x //= p
            y //= p
            k += 1
        return cls(p, g, x, y, v + k, r - k)

    @property
    def absolute_precision(self):
        return self.valuation + self.precision

    @property
    def a(self):
        return PadicScalar.scaled(self.p, self.x, self.valuation, self.absolute_precision)

    @property
    def b(self):
        return PadicScalar.scaled(self.p, self.y, self.valuation, self.absolute_precision)

    def is_zero(self):
        return self.precision == 0

    def is_negligible(self, tolerance):
        return self.valuation >= tolerance

    def truncated(self, absprec):
        if absprec >= self.absolute_precision:
            return self
        return QuadExtScalar.scaled(self.p, self.g, self.x, self.y, self.valuation, absprec)

    def _coerce(self, other, additive):
        if isinstance(other, QuadExtScalar):
            return other
        if isinstance(other, PadicScalar):
            return QuadExtScalar.from_padic(other, self.g)
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if q == 0:
                return QuadExtScalar.zero(self.p, self.g)
            if additive:
                prec = self.absolute_precision - rational_valuation(q, self.p)
            else:
                prec = self.precision
            return QuadExtScalar.from_rational(q, self.p, self.g, max(1, min(prec, COERCION_CAP)))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other, True)
        if other is NotImplemented:
            return NotImplemented
        if other.precision == 0:
            return self.truncated(other.valuation)
        if self.precision == 0:
            return other.truncated(self.valuation)
        p = self.p
        absprec = min(self.absolute_precision, other.absolute_precision)
        v = min(self.valuation, other.valuation)
        s1 = p ** (self.valuation - v)
        s2 = p ** (other.valuation - v)
        return QuadExtScalar.scaled(
            p, self.g, self.x * s1 + other.x * s2, self.y * s1 + other.y * s2, v, absprec
        )

    __radd__ = __add__

    def __neg__(self):
        if self.precision == 0:
            return self
        mod = self.p**self.precision
        return QuadExtScalar(self.p, self.g, -self.x % mod, -self.y % mod, self.valuation, self.precision)

    def __sub__(self, other):
        other = self._coerce(other, True)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other, False)
        if other is NotImplemented:
            return NotImplemented
        if self.precision == 0 or other.precision == 0:
            return QuadExtScalar.zero(self.p, self.g, self.valuation + other.valuation)
        prec = min(self.precision, other.precision)
        mod = self.p**prec
        x = (self.x * other.x + self.g * self.y * other.y) % mod
        y = (self.x * other.y + self.y * other.x) % mod
        # units of K multiply to units, so (x, y) stays normalized
        return QuadExtScalar(self.p, self.g, x, y, self.valuation + other.valuation, prec)

    __rmul__ = __mul__

    def inverse(self):
        if self.precision == 0:
            raise DivisionByIndistinguishableZero(f"division by O({self.p}^{self.valuation})")
        mod = self.p**self.precision
        norm = (self.x * self.x - self.g * self.y * self.y) % mod
        ninv = pow(norm, -1, mod)
        return QuadExtScalar(
            self.p, self.g, self.x * ninv % mod, -self.y * ninv % mod, -self.valuation, self.precision
        )

    def __truediv__(self, other):
        other = self._coerce(other, False)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other, False) * self.inverse()

    def __pow__(self, exponent):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = QuadExtScalar(self.p, self.g, 1, 0, 0, max(self.precision, 1))
        if exponent == 0:
            return result
        if self.precision == 0:
            return QuadExtScalar.zero(self.p, self.g, self.valuation * exponent)
        base = self
        first = True
        while exponent:
            if exponent & 1:
                result = base if first else result * base
                first = False
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def conj(self):
        if self.precision == 0:
            return self
        mod = self.p**self.precision
        return QuadExtScalar(self.p, self.g, self.x, -self.y % mod, self.valuation, self.precision)

    def norm(self):
        """x * conj(x) as an element of Q_p."""
        product = self * self.conj()
        return product.a

    def reduction(self):
        """Residue of an integral element as a pair (x mod p, y mod p)."""
        if self.valuation < 0:
            return None
        if self.valuation > 0 or self.precision == 0:
            return (0, 0)
        return (self.x % self.p, self.y % self.p)

    def agreement(self, other):
        """Valuation of self - other, i.e. the number of agreeing digits."""
        return (self - other).valuation

    def digits(self):
        """Little-endian base-p digits of both unit coordinates."""
        xs, ys = [], []
        x, y = self.x, self.y
        for _ in range(self.precision):
            xs.append(x % self.p)
            ys.append(y % self.p)
            x //= self.p
            y //= self.p
        return xs, ys

    def digit_string(self):
        if self.precision == 0:
            return f"v={self.valuation};zero"
        xs, ys = self.digits()
        return f"v={self.valuation};a={''.join(map(str, xs))};b={''.join(map(str, ys))}"

    def __repr__(self):
        if self.precision == 0:
            return f"O({self.p}^{self.valuation})"
        return (
            f"QuadExtScalar({self.p}^{self.valuation} * ({self.x} + {self.y}*u) "
            f"+ O({self.p}^{self.absolute_precision}))"
        )


def _hensel_sqrt(c, r, p, prec):
    """Lift a square root r of c mod p to Z/p**prec."""
    mod = p**prec
    c %= mod
    x = r % mod
    while (x * x - c) % mod:
        x = (x - (x * x - c) * pow(2 * x, -1, mod)) % mod
    return x


@lru_cache(maxsize=4096)
def _pinned_sqrt(d, p, prec, pin):
    f, d0 = squarefree_decomposition(d)
    if d0 % p == 0:
        raise NoSquareRoot(f"{d} has odd {p}-adic valuation")
    g = nonresidue(p)
    mod = p ** (prec + 1)
    if is_square_mod(d0, p):
        r = min(r for r in range(p) if (r * r - d0) % p == 0)
        x, y = _hensel_sqrt(d0, r, p, prec + 1), 0
    else:
        c = d0 * pow(g, -1, mod) % mod
        r = min(r for r in range(1, (p + 1) // 2) if (r * r - c) % p == 0)
        x, y = 0, _hensel_sqrt(c, r, p, prec + 1)
    root = QuadExtScalar.scaled(p, g, x, y, 0, prec)
    return root * (f * pin)


def sqrt_hensel(d, field):
    """Pinned square root of a nonzero integer in K."""
    if d == 0:
        raise NoSquareRoot("zero has no pinned square root")
    return _pinned_sqrt(int(d), field.p, field.prec, field.pin)


def teichmuller(x):
    """The (p^2-1)-th root of unity congruent to the unit x."""
    if x.precision == 0 or x.valuation != 0:
        raise NotAUnit(f"{x!r} is not a unit")
    q = x.p**2
    w = x
    for _ in range(x.precision + 1):
        nxt = w**q
        if nxt.x == w.x and nxt.y == w.y:
            break
        w = nxt
    return w


def _floor_log(i, p):
    k = 0
    while p ** (k + 1) <= i:
        k += 1
    return k


def _log_one_plus(z):
    """log(1 + z) for v(z) >= 1 by the alternating series."""
    if z.precision == 0:
        return z
    target = z.absolute_precision
    total = QuadExtScalar.zero(z.p, z.g)
    power = z
    i = 1
    while True:
        if i > 1 and i * z.valuation - _floor_log(i, z.p) >= target:
            break
        total = total + power * Fraction(1 if i % 2 else -1, i)
        power = power * z
        i += 1
    return total


def log_branch(x, L=0):
    """Branch of the p-adic logarithm with log_L(p) = L."""
    if isinstance(x, PadicScalar):
        x = QuadExtScalar.from_padic(x, nonresidue(x.p))
    if x.precision == 0:
        raise ZeroArgument(f"log of O({x.p}^{x.valuation})")
    unit = QuadExtScalar(x.p, x.g, x.x, x.y, 0, x.precision)
    y = unit / teichmuller(unit)
    result = _log_one_plus(y - 1)
    if x.valuation:
        result = result + _branch_scalar(L, x) * x.valuation
    return result


def _branch_scalar(L, like):
    if isinstance(L, QuadExtScalar):
        return L
    if isinstance(L, PadicScalar):
        return QuadExtScalar.from_padic(L, like.g)
    return Fraction(L)


@dataclass(frozen=True)
class QuadField:
    """K = Q_p(u) at a fixed working precision and square-root pin."""

    p: int
    prec: int
    pin: int = 1

    def __post_init__(self):
        if self.p < 3 or not isprime(self.p):
            raise PadicError(f"p must be an odd prime, got {self.p}")
        if self.prec < 1:
            raise PadicError(f"precision must be positive, got {self.prec}")
        if self.pin not in (1, -1):
            raise PadicError(f"branch pin must be +1 or -1, got {self.pin}")

    @property
    def g(self):
        return nonresidue(self.p)

    def __call__(self, value):
        if isinstance(value, QuadExtScalar):
            return value
        if isinstance(value, PadicScalar):
            return QuadExtScalar.from_padic(value, self.g)
        return QuadExtScalar.from_rational(Fraction(value), self.p, self.g, self.prec)

    def element(self, a, b=0):
        return self(a) + self(b) * self.u()

    def zero(self):
        return QuadExtScalar.zero(self.p, self.g)

    def one(self):
        return self(1)

    def u(self):
        return QuadExtScalar(self.p, self.g, 0, 1, 0, self.prec)

    def padic(self, value):
        return PadicScalar.from_rational(value, self.p, self.prec)

    def sqrt(self, d):
        return sqrt_hensel(d, self)

    def teichmuller(self, x):
        return teichmuller(self(x))

    def log(self, x, L=0):
        return log_branch(self(x), L)

    def with_pin(self, pin):
        return QuadField(self.p, self.prec, pin)
