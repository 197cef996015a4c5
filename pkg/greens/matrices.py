"""2x2 integer matrices as nested tuples ((a, b), (c, d)) and cusp helpers."""
from __future__ import annotations

from fractions import Fraction
from math import gcd

IDENTITY = ((1, 0), (0, 1))
S = ((0, -1), (1, 0))
U = ((0, 1), (-1, 1))
INFINITY = (1, 0)


def as_matrix(rows):
    (a, b), (c, d) = rows
    return ((int(a), int(b)), (int(c), int(d)))


def mat_mul(A, B):
    (a, b), (c, d) = A
    (e, f), (g, h) = B
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def det(A):
    (a, b), (c, d) = A
    return a * d - b * c


def trace(A):
    return A[0][0] + A[1][1]


def adjugate(A):
    (a, b), (c, d) = A
    return ((d, -b), (-c, a))


def negate(A):
    (a, b), (c, d) = A
    return ((-a, -b), (-c, -d))


def cusp(value):
    """Normalize a cusp to a primitive pair (x, y) with y >= 0; infinity is (1, 0)."""
    if value is None or (isinstance(value, str) and value.lower() in ("inf", "infinity", "oo")):
        return INFINITY
    if isinstance(value, tuple):
        x, y = value
    else:
        q = Fraction(value)
        x, y = q.numerator, q.denominator
    g = gcd(x, y)
    x, y = x // g, y // g
    if y < 0 or (y == 0 and x < 0):
        x, y = -x, -y
    return (x, y)


def act(A, c):
    """Moebius action of A on a cusp pair."""
    (a, b), (cc, d) = A
    x, y = c
    return cusp((a * x + b * y, cc * x + d * y))


def act_class(A, c, p, inf=-1):
    """Action of A on P^1(F_p); classes are 0..p-1 and `inf`."""
    (a, b), (cc, d) = A
    x, y = (1, 0) if c == inf else (c, 1)
    top, bottom = (a * x + b * y) % p, (cc * x + d * y) % p
    if bottom == 0:
        if top == 0:
            raise ValueError(f"{A} is singular mod {p}")
        return inf
    return top * pow(bottom, -1, p) % p
