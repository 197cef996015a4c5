"""Log-extended Laurent functions on the standard affinoid.

A :class:`LogLaurentFunction` of weight ``w`` over ``K`` is stored as

    sum_i e_i z^i                                   (entire part, disk at infinity)
  + sum_a sum_i b_{a,i} (z - a)^(-i)               (principal parts, a = 0..p-1)
  + sum_a Q_a(z) log_L(z - a)                      (rational log atoms)
  + sum_w P_w(z) log_L(z - w)                      (RM-point log atoms, keyed by form)
  + sum_w sum_j c_{w,j} (z - w)^(-j)               (poles at RM points)

Series are truncated at ``order``.  When ``mod_degree >= 0`` the function is
only known modulo polynomials of degree <= ``mod_degree`` and the matching
entire coefficients are kept at zero.

Each residue disk is handled through a chart: the component living outside
disk ``c`` is ``h_c | mu_c^(-1)`` for a power series ``h_c`` on the closed unit
disk, with ``mu_inf = 1`` and ``mu_a = ((a, -1), (1, 0))``.  Slashing by a
matrix sends chart ``c`` to chart ``c'`` through ``E = mu_c^(-1) gamma mu_c'``.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from greens.errors import (
    AffinoidError,
    AtomInRemovedDisk,
    AtomNotInRemovedDisk,
    PointCollidesWithAtom,
    PointOffAffinoid,
    UnresolvedPolynomialAmbiguity,
    UnsupportedMatrix,
)
from greens.matrices import act_class, adjugate, as_matrix, det, mat_mul
from greens.padic import EXACT, QuadExtScalar, rational_valuation
from greens.poly_weight import PolyN, gbinom, slash_pn

logger = logging.getLogger("greens.affinoid")

INF = -1


def _exact_zero(x):
    return x.precision == 0 and x.valuation >= EXACT


def chart_matrix(c):
    return ((1, 0), (0, 1)) if c == INF else ((c, -1), (1, 0))


def chart_inverse(c):
    return ((1, 0), (0, 1)) if c == INF else ((0, 1), (-1, c))


def residue_lift(q, p):
    """Integer lift in 0..p-1 of a p-integral rational."""
    q = Fraction(q)
    return q.numerator * pow(q.denominator, -1, p) % p


@lru_cache(maxsize=None)
def _shift_table(c, k):
    """Integer coefficients of (c - z)^k in the z basis."""
    return tuple(comb(k, i) * c ** (k - i) * (-1) ** i for i in range(k + 1))


@lru_cache(maxsize=2048)
def _transform_tables(E, n, R, field):
    (al, be), (ga, de) = E
    delta = al * de - be * ga
    x0 = Fraction(be, de)
    t = Fraction(ga, de)
    recenter = None
    if be:
        recenter = [
            [field(comb(j, m) * x0 ** (j - m)) for j in range(m, R + 1)] for m in range(R + 1)
        ]
    half = n // 2
    spread = []
    for r in range(R + 1):
        row = []
        for m in range(r + 1):
            coeff = gbinom(n - m, r - m)
            if coeff and (t or r == m):
                value = Fraction(delta) ** (m - half) * Fraction(de) ** (n - 2 * m) * coeff * t ** (r - m)
                row.append(field(value))
            else:
                row.append(None)
        spread.append(row)
    return recenter, spread


def chart_transform(chart, E, n, field):
    """Coefficients of (h |_{-n} E)(x) = det^(-n/2) (gx + d)^n h(Ex) for p | g, p not dividing d."""
    R = len(chart) - 1
    recenter, spread = _transform_tables(E, n, R, field)
    if recenter is None:
        g = list(chart)
    else:
        g = []
        for m in range(R + 1):
            acc = field.zero()
            row = recenter[m]
            for j in range(m, R + 1):
                h = chart[j]
                if not _exact_zero(h):
                    acc = acc + h * row[j - m]
            g.append(acc)
    out = []
    for r in range(R + 1):
        acc = field.zero()
        row = spread[r]
        for m in range(r + 1):
            coeff = row[m]
            if coeff is not None and not _exact_zero(g[m]):
                acc = acc + g[m] * coeff
        out.append(acc)
    return out


class LogLaurentFunction:
    __slots__ = (
        "field",
        "n",
        "order",
        "weight",
        "mod_degree",
        "branch",
        "entire",
        "principal",
        "rational_logs",
        "atoms",
        "poles",
    )

    def __init__(self, field, n, order, weight, mod_degree, branch, entire, principal, rational_logs, atoms, poles):
        self.field = field
        self.n = n
        self.order = order
        self.weight = weight
        self.mod_degree = mod_degree
        self.branch = branch
        self.entire = entire
        self.principal = principal
        self.rational_logs = rational_logs
        self.atoms = atoms
        self.poles = poles

    @classmethod
    def zero(cls, field, n, order, weight=None, mod_degree=-1, branch=0):
        return _Builder(field, n, order, -n if weight is None else weight, mod_degree, branch).build()

    @classmethod
    def from_series(cls, field, n, order, weight=None, entire=(), principal=None, mod_degree=-1, branch=0):
        """Series-only function from rational or K coefficients; principal maps a -> {i: b_{a,i}}."""
        b = _Builder(field, n, order, -n if weight is None else weight, mod_degree, branch)
        for i, x in enumerate(entire):
            if x:
                b.add_entire(i, field(x))
        for a, terms in (principal or {}).items():
            for i, x in terms.items():
                b.add_principal(a, i, field(x))
        return b.build()

    @property
    def mod_poly(self):
        return self.mod_degree >= 0

    def _builder(self, **changes):
        b = _Builder(
            self.field,
            self.n,
            changes.get("order", self.order),
            changes.get("weight", self.weight),
            changes.get("mod_degree", self.mod_degree),
            changes.get("branch", self.branch),
        )
        return b

    def __add__(self, other):
        if self.weight != other.weight or self.n != other.n:
            raise AffinoidError(f"cannot add weight {self.weight} and weight {other.weight} functions")
        b = self._builder(order=min(self.order, other.order), mod_degree=max(self.mod_degree, other.mod_degree))
        b.add_function(self)
        b.add_function(other)
        return b.build()

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        b = self._builder()
        b.add_function(self, c)
        return b.build()

    def classes(self):
        out = []
        if any(not x.is_zero() for x in self.entire[self.n + 1:]):
            out.append(INF)
        if self.mod_degree < 0 and any(not x.is_zero() for x in self.entire[: self.n + 1]):
            if INF not in out:
                out.append(INF)
        for a in sorted(self.principal):
            if any(not x.is_zero() for x in self.principal[a][1:]):
                out.append(a)
        return out

    def chart(self, c):
        """Chart coefficients of the component outside disk c, length order + n + 1."""
        n = self.n
        R = self.order + n
        zero = self.field.zero()
        if c == INF:
            values = list(self.entire) + [zero] * (R + 1 - len(self.entire))
            for i in range(min(self.mod_degree, n) + 1):
                values[i] = zero
            return values
        values = [zero] * (R + 1)
        series = self.principal.get(c)
        if series is not None:
            for i in range(1, len(series)):
                values[n + i] = -series[i] if i % 2 else series[i]
        return values

    def restrict(self, classes):
        """The series components in `classes`, modulo polynomials of degree <= n."""
        b = self._builder(mod_degree=self.n)
        classes = set(classes)
        if INF in classes:
            for i in range(self.n + 1, len(self.entire)):
                b.add_entire(i, self.entire[i])
        for a, series in self.principal.items():
            if a in classes:
                for i in range(1, len(series)):
                    b.add_principal(a, i, series[i])
        return b.build()

    def components(self):
        return {c: self.restrict({c}) for c in self.classes()}

    def with_branch(self, L):
        b = self._builder(branch=L)
        b.add_function(self)
        return b.build()

    def truncated(self, order):
        b = self._builder(order=order)
        b.add_function(self)
        return b.build()

    def low_polynomial(self):
        return PolyN(self.field, self.entire[: self.n + 1])

    def with_polynomial(self, P):
        """Pin the degree <= n part to P and drop the polynomial ambiguity."""
        b = self._builder(mod_degree=-1)
        b.add_function(self)
        for i in range(self.n + 1):
            b.entire[i] = P.coeffs[i]
        return b.build()

    def tail_valuation(self):
        vals = [x.valuation for x in self.entire[self.n + 1:] if not x.is_zero()]
        for series in self.principal.values():
            vals.extend(x.valuation for x in series[1:] if not x.is_zero())
        return min(vals, default=EXACT)

    def nonzero_terms(self):
        count = sum(1 for x in self.entire[self.n + 1:] if not x.is_zero())
        for series in self.principal.values():
            count += sum(1 for x in series[1:] if not x.is_zero())
        return count

    def nonpolynomial_valuation(self):
        """Smallest valuation among all data that is not a polynomial of degree <= n."""
        vals = [self.tail_valuation()]
        for P in list(self.rational_logs.values()) + list(self.atoms.values()):
            vals.append(P.valuation())
        for coeffs in self.poles.values():
            vals.extend(c.valuation for c in coeffs)
        return min(vals)

    def pruned(self, tolerance):
        """Drop log atoms and poles whose coefficients are all below `tolerance`."""
        b = self._builder()
        b.add_function(self)
        b.rational_logs = {a: Q for a, Q in b.rational_logs.items() if not Q.is_negligible(tolerance)}
        b.atoms = {f: P for f, P in b.atoms.items() if not P.is_negligible(tolerance)}
        b.poles = {f: c for f, c in b.poles.items() if any(not x.is_negligible(tolerance) for x in c.values())}
        return b.build()

    def __repr__(self):
        return (
            f"LogLaurentFunction(weight={self.weight}, order={self.order}, classes={self.classes()}, "
            f"atoms={len(self.atoms)}, rational_logs={sorted(self.rational_logs)}, mod_degree={self.mod_degree})"
        )


class _Builder:
    """Mutable accumulator for LogLaurentFunction values."""

    def __init__(self, field, n, order, weight, mod_degree, branch):
        self.field = field
        self.n = n
        self.order = order
        self.weight = weight
        self.mod_degree = min(mod_degree, n)
        self.branch = branch
        zero = field.zero()
        self.entire = [zero] * (order + 1)
        self.principal = {}
        self.rational_logs = {}
        self.atoms = {}
        self.poles = {}

    def add_entire(self, i, x):
        if i <= self.order:
            self.entire[i] = self.entire[i] + x

    def add_principal(self, a, i, x):
        if i > self.order or i < 1:
            return
        series = self.principal.get(a)
        if series is None:
            series = [self.field.zero()] * (self.order + 1)
            self.principal[a] = series
        series[i] = series[i] + x

    def add_polynomial(self, coeffs):
        """Add sum coeffs[i] z^i unless it vanishes in the quotient by P_mod_degree."""
        for i, x in enumerate(coeffs):
            if i > self.mod_degree:
                self.add_entire(i, x)

    def add_rational_log(self, a, Q):
        if a in self.rational_logs:
            self.rational_logs[a] = self.rational_logs[a] + Q
        else:
            self.rational_logs[a] = Q

    def add_atom(self, form, P):
        if form in self.atoms:
            self.atoms[form] = self.atoms[form] + P
        else:
            self.atoms[form] = P

    def add_pole(self, form, j, x):
        slot = self.poles.setdefault(form, {})
        slot[j] = slot[j] + x if j in slot else x

    def add_chart(self, c, chart):
        n = self.n
        if c == INF:
            for i in range(min(len(chart), self.order + 1)):
                if i > self.mod_degree and not _exact_zero(chart[i]):
                    self.add_entire(i, chart[i])
            return
        if self.mod_degree < n:
            low = [self.field.zero()] * (n + 1)
            for m in range(n + 1):
                e = chart[m]
                if _exact_zero(e):
                    continue
                for i, coeff in enumerate(_shift_table(c, n - m)):
                    if coeff:
                        low[i] = low[i] + e * coeff
            self.add_polynomial(low)
        for i in range(1, min(self.order, len(chart) - 1 - n) + 1):
            x = chart[n + i]
            if not _exact_zero(x):
                self.add_principal(c, i, -x if i % 2 else x)

    def add_function(self, f, c=None):
        for i, x in enumerate(f.entire):
            if i > self.mod_degree and not _exact_zero(x):
                self.add_entire(i, x if c is None else x * c)
        for a, series in f.principal.items():
            for i in range(1, len(series)):
                if not _exact_zero(series[i]):
                    self.add_principal(a, i, series[i] if c is None else series[i] * c)
        for a, Q in f.rational_logs.items():
            self.add_rational_log(a, Q if c is None else Q.scale(c))
        for form, P in f.atoms.items():
            self.add_atom(form, P if c is None else P.scale(c))
        for form, coeffs in f.poles.items():
            for j, x in enumerate(coeffs, start=1):
                self.add_pole(form, j, x if c is None else x * c)

    def log(self, x):
        return self.field.log(x, self.branch)

    def add_log_constant(self, Q, x, sign=1):
        """Add sign * log_L(x) * Q(z), a polynomial."""
        if self.mod_degree >= self.n:
            return
        value = self.log(x)
        if sign < 0:
            value = -value
        self.add_polynomial([q * value for q in Q.coeffs])

    def absorb_finite(self, Q, a, d):
        """Add Q(z) log(1 - d/(z - a)) for v(d) >= 1."""
        field = self.field
        d = field(d)
        if d.is_zero():
            return
        n = self.n
        span = self.order + n
        s = [None]
        power = d
        for j in range(1, span + 1):
            s.append(power * Fraction(1, j))
            power = power * d
        pi = Q.taylor_at(field(a))
        for i in range(1, self.order + 1):
            acc = field.zero()
            for m in range(n + 1):
                if m + i <= span and not _exact_zero(pi[m]):
                    acc = acc + pi[m] * s[m + i]
            self.add_principal(a, i, -acc)
        if self.mod_degree >= n - 1:
            return
        shifted = []
        for e in range(n):
            acc = field.zero()
            for j in range(1, n - e + 1):
                if not _exact_zero(pi[e + j]):
                    acc = acc + pi[e + j] * s[j]
            shifted.append(-acc)
        low = [field.zero()] * (n + 1)
        for e, x in enumerate(shifted):
            for i in range(e + 1):
                coeff = comb(e, i) * (-a) ** (e - i)
                if coeff:
                    low[i] = low[i] + x * coeff
        self.add_polynomial(low)

    def absorb_infinite(self, Q, r):
        """Add Q(z) log(1 - z/r) for |r| > 1."""
        field = self.field
        inv = field(r).inverse()
        s = [None]
        power = inv
        for j in range(1, self.order + 1):
            s.append(power * Fraction(1, j))
            power = power * inv
        for t in range(1, self.order + 1):
            acc = field.zero()
            for m in range(min(t - 1, self.n) + 1):
                q = Q.coeffs[m]
                if not _exact_zero(q):
                    acc = acc + q * s[t - m]
            if t > self.mod_degree:
                self.add_entire(t, -acc)

    def add_linear_log(self, Q, A, B, sign):
        """Add sign * Q(z) log_L(A z + B) for rationals A, B."""
        p = self.field.p
        A, B = Fraction(A), Fraction(B)
        if A == 0:
            self.add_log_constant(Q, B, sign)
            return
        Qs = Q if sign > 0 else -Q
        r = -B / A
        if r == 0 or rational_valuation(r, p) >= 0:
            a = residue_lift(r, p)
            self.add_log_constant(Q, A, sign)
            self.add_rational_log(a, Qs)
            if r != a:
                self.absorb_finite(Qs, a, r - a)
        else:
            self.add_log_constant(Q, B, sign)
            self.absorb_infinite(Qs, r)

    def absorb_point(self, w, P):
        """Add P(z) log_L(z - w) for w in a removed disk."""
        p = self.field.p
        if w.valuation < 0:
            self.add_log_constant(P, -w)
            self.absorb_infinite(P, w)
            return
        x, y = w.reduction()
        if y:
            raise AtomNotInRemovedDisk(f"{w!r} lies on the affinoid, not in a removed disk")
        a = x % p
        self.add_rational_log(a, P)
        self.absorb_finite(P, a, w - a)

    def build(self):
        zero = self.field.zero()
        for i in range(min(self.mod_degree, self.n) + 1):
            self.entire[i] = zero
        poles = {}
        for form, slot in self.poles.items():
            top = max(slot)
            poles[form] = tuple(slot.get(j, zero) for j in range(1, top + 1))
        return LogLaurentFunction(
            self.field,
            self.n,
            self.order,
            self.weight,
            self.mod_degree,
            self.branch,
            tuple(self.entire),
            {a: tuple(s) for a, s in sorted(self.principal.items())},
            dict(sorted(self.rational_logs.items())),
            dict(sorted(self.atoms.items())),
            dict(sorted(poles.items())),
        )


def _atom_payload(form, value, field, n):
    from greens.poly_weight import atom_polynomial

    if isinstance(value, PolyN):
        return value
    return atom_polynomial(form, value, field, n)


def from_atoms(atoms, field, n, order, branch=0, mode="symbolic"):
    """Function sum P(z) log_L(z - w) over (form, weight-or-PolyN) atoms.

    ``symbolic`` keeps affinoid atoms as they are; ``absorbed`` expands atoms
    in removed disks into rational log atoms and series.
    """
    from greens.quadforms import RMPoint

    b = _Builder(field, n, order, -n, n, branch)
    p = field.p
    for form, value in atoms:
        P = _atom_payload(form, value, field, n)
        w = RMPoint.of(form, field).root
        if mode == "symbolic":
            if w.valuation != 0 or w.y % p == 0:
                raise AtomInRemovedDisk(f"root of {form.as_list()} lies in a removed disk")
            b.add_atom(form, P)
        elif mode == "absorbed":
            b.absorb_point(w, P)
        else:
            raise ValueError(f"unknown atom mode {mode!r}")
    return b.build()


def atom_absorb(f, w, P):
    """f + P(z) log_L(z - w) with w in a removed disk, re-expanded."""
    b = f._builder()
    b.add_function(f)
    b.absorb_point(f.field(w), P)
    return b.build()


def slash(f, gamma):
    """Right slash action of weight f.weight."""
    gamma = as_matrix(gamma)
    if f.weight == f.n + 2:
        return _slash_weight_k(f, gamma)
    if f.weight != -f.n:
        raise AffinoidError(f"slash is defined on weights {-f.n} and {f.n + 2}, got {f.weight}")
    d = det(gamma)
    if d == 1:
        if gamma == ((1, 0), (0, 1)):
            return f
        return _slash_unimodular(f, gamma)
    if d == f.field.p:
        return _slash_descend(f, gamma)
    raise UnsupportedMatrix(f"slash by {gamma} with determinant {d}")


def _slash_unimodular(f, gamma):
    field, n, p = f.field, f.n, f.field.p
    b = f._builder()
    ginv = adjugate(gamma)
    for c in f.classes():
        c2 = act_class(ginv, c, p, INF)
        E = mat_mul(mat_mul(chart_inverse(c), gamma), chart_matrix(c2))
        b.add_chart(c2, chart_transform(f.chart(c), E, n, field))
    if f.poles:
        raise AffinoidError("poles only occur in weight-k functions")
    from greens.quadforms import RMPoint

    (al, be), (ga, de) = gamma
    drift = PolyN.zero(field, n)
    for form, P in f.atoms.items():
        P2 = slash_pn(P, gamma)
        w = RMPoint.of(form, field).root
        b.add_atom(form.compose(gamma), P2)
        b.add_log_constant(P2, -(w * ga) + al)
        drift = drift + P2
    for a, Q in f.rational_logs.items():
        Q2 = slash_pn(Q, gamma)
        b.add_linear_log(Q2, al - a * ga, be - a * de, 1)
        drift = drift + Q2
    if f.atoms or f.rational_logs:
        b.add_linear_log(drift, ga, de, -1)
    return b.build()


def _slash_descend(f, gamma):
    if f.atoms or f.rational_logs or f.poles:
        raise AffinoidError("slash by a determinant-p matrix needs a series-only function")
    field, n, p = f.field, f.n, f.field.p
    (al, be), (ga, de) = gamma
    if ga == 0 and al == 1 and de == p and 0 <= -be < p:
        target = -be
    elif gamma == ((p, 0), (0, 1)):
        target = INF
    else:
        raise UnsupportedMatrix(f"{gamma} is not a recursion matrix for p={p}")
    b = f._builder(mod_degree=n)
    for c in f.classes():
        E = mat_mul(mat_mul(chart_inverse(c), gamma), chart_matrix(target))
        if E[1][0] % p or E[1][1] % p == 0:
            raise UnsupportedMatrix(f"class {c} is not carried into the affinoid by {gamma}")
        b.add_chart(target, chart_transform(f.chart(c), E, n, field))
    return b.build()


def _slash_weight_k(f, gamma):
    if det(gamma) != 1:
        raise UnsupportedMatrix(f"weight-{f.weight} slash by {gamma} needs determinant 1")
    lifted = integ(f)
    return deriv(slash(lifted, gamma), f.n + 1).truncated(f.order)


def _expand_shift(field, center, k, scale):
    """Coefficients of scale * (z - center)^k in the z basis, length k + 1."""
    out = []
    for i in range(k + 1):
        out.append(scale * ((-center) ** (k - i) if k - i else field(1)) * comb(k, i))
    return out


def integ(f):
    """An (n+1)-fold antiderivative of a weight-k function, modulo P_n."""
    if f.atoms or f.rational_logs:
        raise AffinoidError("integ expects a log-free weight-k function")
    field, n = f.field, f.n
    order = f.order + n + 1
    b = _Builder(field, n, order, -n, n, f.branch)
    for j, x in enumerate(f.entire):
        if not _exact_zero(x):
            b.add_entire(j + n + 1, x * Fraction(factorial(j), factorial(j + n + 1)))

    def antiderivative(i):
        denom = 1
        for s in range(1, n + 2):
            denom *= s - i
        return Fraction(1, denom)

    for a, series in f.principal.items():
        for i in range(1, len(series)):
            x = series[i]
            if _exact_zero(x):
                continue
            if i >= n + 2:
                b.add_principal(a, i - n - 1, x * antiderivative(i))
            else:
                kappa = Fraction((-1) ** (i - 1), factorial(i - 1) * factorial(n + 1 - i))
                coeffs = _expand_shift(field, field(a), n + 1 - i, x * kappa)
                b.add_rational_log(a, PolyN(field, coeffs + [field.zero()] * (n + 1 - len(coeffs))))
    from greens.quadforms import RMPoint

    for form, coeffs in f.poles.items():
        w = RMPoint.of(form, field).root
        for j, x in enumerate(coeffs, start=1):
            if _exact_zero(x):
                continue
            if j >= n + 2:
                raise AffinoidError(f"pole of order {j} at {form.as_list()} has no log antiderivative")
            kappa = Fraction((-1) ** (j - 1), factorial(j - 1) * factorial(n + 1 - j))
            poly = _expand_shift(field, w, n + 1 - j, x * kappa)
            b.add_atom(form, PolyN(field, poly + [field.zero()] * (n + 1 - len(poly))))
    return b.build()


def _quotient(P, w):
    """Coefficients of (P(z) - P(w)) / (z - w), padded to length n + 1."""
    coeffs = P.coeffs
    n = len(coeffs) - 1
    out = [P.field.zero()] * (n + 1)
    acc = P.field.zero()
    for k in range(n, 0, -1):
        acc = acc * w + coeffs[k]
        out[k - 1] = acc
    return out


def _deriv_once(f):
    from greens.quadforms import RMPoint

    field = f.field
    b = f._builder(mod_degree=max(f.mod_degree - 1, -1), weight=f.weight + 2)
    for i in range(1, len(f.entire)):
        x = f.entire[i]
        if i > f.mod_degree and not _exact_zero(x):
            b.add_entire(i - 1, x * i)
    for a, series in f.principal.items():
        for i in range(1, len(series)):
            if not _exact_zero(series[i]):
                b.add_principal(a, i + 1, series[i] * (-i))
    for a, Q in f.rational_logs.items():
        center = field(a)
        b.add_rational_log(a, Q.derivative())
        b.add_principal(a, 1, Q(center))
        b.add_polynomial(_quotient(Q, center))
    for form, P in f.atoms.items():
        w = RMPoint.of(form, field).root
        b.add_atom(form, P.derivative())
        b.add_pole(form, 1, P(w))
        b.add_polynomial(_quotient(P, w))
    for form, coeffs in f.poles.items():
        for j, x in enumerate(coeffs, start=1):
            b.add_pole(form, j + 1, x * (-j))
    return b.build()


def deriv(f, times=1):
    """Termwise derivative; n+1 derivatives of a weight -n function give weight k."""
    for _ in range(times):
        f = _deriv_once(f)
    if times == f.n + 1 and f.weight == f.n + 2:
        b = f._builder()
        b.add_function(f)
        b.rational_logs = {}
        b.atoms = {}
        f = b.build()
    return f


def _check_point(sigma, p):
    if sigma.precision == 0 or sigma.valuation != 0 or sigma.y % p == 0:
        raise PointOffAffinoid(f"{sigma!r} is not on the standard affinoid")


def _log_jet(P, c, sigma, order, log, label):
    """Derivatives 0..order of P(z) log(z - c) at sigma."""
    diff = sigma - c
    if diff.is_zero():
        raise PointCollidesWithAtom(f"evaluation point meets the log atom at {label}")
    inv = diff.inverse()
    logs = [log(diff)]
    power = inv
    for t in range(1, order + 1):
        logs.append(power * ((-1) ** (t - 1) * factorial(t - 1)))
        power = power * inv
    derivs = P.derivatives_at(sigma, order)
    out = []
    for s in range(order + 1):
        acc = QuadExtScalar.zero(sigma.p, sigma.g)
        for t in range(s + 1):
            acc = acc + derivs[s - t] * logs[t] * comb(s, t)
        out.append(acc)
    return out


def _pole_jet(coeffs, c, sigma, order, label, first=1):
    diff = sigma - c
    if diff.is_zero():
        raise PointCollidesWithAtom(f"evaluation point meets the pole at {label}")
    inv = diff.inverse()
    top = len(coeffs) + first + order
    powers = [None, inv]
    for _ in range(top):
        powers.append(powers[-1] * inv)
    out = []
    for s in range(order + 1):
        acc = QuadExtScalar.zero(sigma.p, sigma.g)
        for idx, x in enumerate(coeffs):
            i = idx + first
            if _exact_zero(x):
                continue
            rising = 1
            for q in range(s):
                rising *= i + q
            acc = acc + x * powers[i + s] * ((-1) ** s * rising)
        out.append(acc)
    return out


def eval_jet(f, sigma, order, allow_mod_poly=False):
    """[f(sigma), f'(sigma), ..., f^(order)(sigma)] at an affinoid point."""
    from greens.quadforms import RMPoint

    field = f.field
    sigma = field(sigma)
    _check_point(sigma, field.p)
    if f.mod_degree >= 0 and not allow_mod_poly:
        raise UnresolvedPolynomialAmbiguity(f"function is only known modulo P_{f.mod_degree}")
    jet = [field.zero() for _ in range(order + 1)]
    powers = [field(1)]
    for _ in range(len(f.entire)):
        powers.append(powers[-1] * sigma)
    for s in range(order + 1):
        acc = field.zero()
        for i in range(s, len(f.entire)):
            x = f.entire[i]
            if _exact_zero(x):
                continue
            falling = 1
            for q in range(s):
                falling *= i - q
            acc = acc + x * powers[i - s] * falling
        jet[s] = jet[s] + acc

    def log(x):
        return field.log(x, f.branch)

    for a, series in f.principal.items():
        for s, value in enumerate(_pole_jet(series[1:], field(a), sigma, order, f"disk {a}")):
            jet[s] = jet[s] + value
    for form, coeffs in f.poles.items():
        w = RMPoint.of(form, field).root
        for s, value in enumerate(_pole_jet(coeffs, w, sigma, order, form.as_list())):
            jet[s] = jet[s] + value
    for a, Q in f.rational_logs.items():
        for s, value in enumerate(_log_jet(Q, field(a), sigma, order, log, f"disk {a}")):
            jet[s] = jet[s] + value
    for form, P in f.atoms.items():
        w = RMPoint.of(form, field).root
        for s, value in enumerate(_log_jet(P, w, sigma, order, log, form.as_list())):
            jet[s] = jet[s] + value
    return jet


def _digits_text(x, p):
    xs, ys = x.digits()
    sep = "" if p <= 10 else "."
    return f"{sep.join(map(str, xs))}/{sep.join(map(str, ys))}"


def _from_digits_text(text, p, g, valuation):
    xs, ys = text.split("/")
    if p <= 10:
        xd, yd = [int(ch) for ch in xs], [int(ch) for ch in ys]
    else:
        xd = [int(ch) for ch in xs.split(".") if ch]
        yd = [int(ch) for ch in ys.split(".") if ch]
    x = sum(d * p**i for i, d in enumerate(xd))
    y = sum(d * p**i for i, d in enumerate(yd))
    return QuadExtScalar(p, g, x, y, valuation, len(xd))


def dump(f):
    """Series data as `disk, power, valuation, digits` lines in a stable order."""
    if f.atoms or f.rational_logs or f.poles:
        raise AffinoidError("only series-only functions can be dumped")
    p = f.field.p
    lines = [f"# weight={f.weight} n={f.n} order={f.order} mod_degree={f.mod_degree} p={p} prec={f.field.prec}"]
    for i, x in enumerate(f.entire):
        if not x.is_zero():
            lines.append(f"inf, {i}, {x.valuation}, {_digits_text(x, p)}")
    for a, series in f.principal.items():
        for i in range(1, len(series)):
            x = series[i]
            if not x.is_zero():
                lines.append(f"{a}, {-i}, {x.valuation}, {_digits_text(x, p)}")
    return "\n".join(lines) + "\n"


def load(text, field):
    lines = [line for line in text.splitlines() if line.strip()]
    header = dict(item.split("=") for item in lines[0].lstrip("# ").split())
    if int(header["p"]) != field.p:
        raise AffinoidError(f"dump is for p={header['p']}, field has p={field.p}")
    n, order = int(header["n"]), int(header["order"])
    b = _Builder(field, n, order, int(header["weight"]), int(header["mod_degree"]), 0)
    for line in lines[1:]:
        disk, power, valuation, digits = (part.strip() for part in line.split(","))
        x = _from_digits_text(digits, field.p, field.g, int(valuation))
        if disk == "inf":
            b.add_entire(int(power), x)
        else:
            b.add_principal(int(disk), -int(power), x)
    return b.build()
