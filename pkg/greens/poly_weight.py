"""Polynomials of degree <= n over K: the weight action, the P_n pairing and atom payloads."""
from __future__ import annotations

import logging
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from greens.errors import ConjugateCollision
from greens.matrices import det

logger = logging.getLogger("greens.poly_weight")


def int_poly_mul(f, g):
    out = [0] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x:
            for j, y in enumerate(g):
                out[i + j] += x * y
    return out


def int_poly_pow(f, e):
    out = [1]
    for _ in range(e):
        out = int_poly_mul(out, list(f))
    return out


def gbinom(top, k):
    """Binomial coefficient top choose k for any integer top and k >= 0."""
    if k < 0:
        return 0
    if top >= 0:
        return comb(top, k) if k <= top else 0
    # (-1)^k * C(k - top - 1, k)
    return (-1) ** k * comb(k - top - 1, k)


class PolyN:
    """A polynomial sum c_i T^i, i = 0..n, with coefficients in K."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = tuple(coeffs)

    @classmethod
    def zero(cls, field, n):
        z = field.zero()
        return cls(field, [z] * (n + 1))

    @classmethod
    def from_rationals(cls, field, values, n=None):
        values = list(values)
        if n is not None:
            values += [0] * (n + 1 - len(values))
        return cls(field, [field(v) for v in values])

    @classmethod
    def monomial(cls, field, n, i):
        return cls.from_rationals(field, [1 if j == i else 0 for j in range(n + 1)])

    @property
    def n(self):
        return len(self.coeffs) - 1

    def __getitem__(self, i):
        return self.coeffs[i]

    def __iter__(self):
        return iter(self.coeffs)

    def __add__(self, other):
        return PolyN(self.field, [x + y for x, y in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        return PolyN(self.field, [x - y for x, y in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return PolyN(self.field, [-x for x in self.coeffs])

    def scale(self, c):
        return PolyN(self.field, [x * c for x in self.coeffs])

    def __call__(self, z):
        acc = self.field.zero()
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self):
        """P', padded back to length n + 1."""
        out = [self.coeffs[i] * i for i in range(1, len(self.coeffs))]
        return PolyN(self.field, out + [self.field.zero()])

    def derivatives_at(self, z, order):
        """[P(z), P'(z), ..., P^(order)(z)]."""
        values = []
        poly = self
        for _ in range(order + 1):
            values.append(poly(z))
            poly = poly.derivative()
        return values

    def taylor_at(self, a):
        """Coefficients pi_m with P(z) = sum pi_m (z - a)^m."""
        out = []
        fact = 1
        for m, value in enumerate(self.derivatives_at(a, self.n)):
            if m:
                fact *= m
            out.append(value * Fraction(1, fact))
        return out

    def valuation(self):
        return min(c.valuation for c in self.coeffs)

    def is_negligible(self, tolerance):
        return all(c.is_negligible(tolerance) for c in self.coeffs)

    def conj(self):
        return PolyN(self.field, [c.conj() for c in self.coeffs])

    def __repr__(self):
        return f"PolyN({list(self.coeffs)!r})"


@lru_cache(maxsize=4096)
def slash_matrix(gamma, n):
    """Rational matrix of P -> P|gamma on the monomial basis; column j is T^j|gamma."""
    (a, b), (c, d) = gamma
    if det(gamma) <= 0 or n % 2:
        raise ValueError(f"slash by {gamma} needs positive determinant and even n")
    half = n // 2
    scale = Fraction(1, det(gamma) ** half)
    cols = []
    for j in range(n + 1):
        col = int_poly_mul(int_poly_pow((b, a), j), int_poly_pow((d, c), n - j))
        cols.append([scale * x for x in col])
    return tuple(tuple(cols[j][i] for j in range(n + 1)) for i in range(n + 1))


def slash_pn(P, gamma):
    """(P|gamma)(T) = det^(-n/2) (cT + d)^n P((aT + b)/(cT + d))."""
    mat = slash_matrix(gamma, P.n)
    field = P.field
    out = []
    for row in mat:
        acc = field.zero()
        for coeff, x in zip(row, P.coeffs):
            if coeff:
                acc = acc + x * coeff
        out.append(acc)
    return PolyN(field, out)


@lru_cache(maxsize=64)
def pairing_weights(n):
    return tuple(Fraction((-1) ** i, comb(n, i)) for i in range(n + 1))


def pn_pair(P, Q):
    """<T^i, T^j> = (-1)^i / C(n, i) when i + j = n, else 0."""
    n = P.n
    acc = P.field.zero()
    for i, weight in enumerate(pairing_weights(n)):
        acc = acc + P.coeffs[i] * Q.coeffs[n - i] * weight
    return acc


def payload(point, n):
    """(T - w)^(n/2) (T - w')^(n/2) / (w - w')^(n/2) for an RM point w."""
    form = point.form
    if point.sqrt_disc.is_zero():
        raise ConjugateCollision(f"w - w' vanishes to precision for {form.as_list()}")
    half = n // 2
    numer = int_poly_pow((form.c, form.b, form.a), half)
    inv = point.sqrt_disc.inverse() ** half
    if half:
        logger.debug(f"payload of {form.as_list()} divides by sqrt(D)^{half}, valuation {-inv.valuation}")
    return PolyN(point.field, [inv * c for c in numer])


def atom_polynomial(form, weight, field, n):
    """weight * payload of the RM point of `form`."""
    from greens.quadforms import RMPoint

    point = RMPoint.of(form, field)
    P = payload(point, n)
    return PolyN(field, [c * weight for c in P.coeffs])


def dlog_power(P, tau):
    """Terms (j, c_j) of d^(n+1)(P(z) log(z - tau)) = sum c_j / (z - tau)^j."""
    n = P.n
    values = P.derivatives_at(tau, n)
    return [(n + 1 - i, values[i] * ((-1) ** i * factorial(n - i))) for i in range(n + 1)]
