"""Indefinite binary quadratic forms, their RM points and RM divisors."""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from greens.errors import (
    DiscMismatch,
    FormError,
    NotIndefinite,
    NotInert,
    NotPrimitive,
    PellFailure,
    SquareDiscriminant,
)
from greens.matrices import IDENTITY, adjugate, det, mat_mul, negate, trace
from greens.padic import int_valuation, is_square_mod

logger = logging.getLogger("greens.quadforms")

MAX_REDUCTION_STEPS = 100000


@dataclass(frozen=True, order=True)
class QuadForm:
    """The form a*x^2 + b*x*y + c*y^2."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        disc = self.b * self.b - 4 * self.a * self.c
        if disc <= 0:
            raise NotIndefinite(f"{self.as_list()} has discriminant {disc}")
        if math.isqrt(disc) ** 2 == disc:
            raise SquareDiscriminant(f"{self.as_list()} has square discriminant {disc}")
        if math.gcd(self.a, self.b, self.c) != 1:
            raise NotPrimitive(f"{self.as_list()} is not primitive")

    @classmethod
    def from_list(cls, values):
        a, b, c = (int(v) for v in values)
        return cls(a, b, c)

    @property
    def disc(self):
        return self.b * self.b - 4 * self.a * self.c

    def as_list(self):
        return [self.a, self.b, self.c]

    def __call__(self, x, y=1):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def compose(self, m):
        """The form f(alpha*x + beta*y, gamma*x + delta*y), made primitive."""
        (al, be), (ga, de) = m
        A = self.a * al * al + self.b * al * ga + self.c * ga * ga
        B = 2 * self.a * al * be + self.b * (al * de + be * ga) + 2 * self.c * ga * de
        C = self.a * be * be + self.b * be * de + self.c * de * de
        g = math.gcd(A, B, C)
        return QuadForm(A // g, B // g, C // g)

    def negate(self):
        return QuadForm(-self.a, -self.b, -self.c)

    def level(self, p):
        return int_valuation(self.disc, p) // 2

    def prime_to_p_disc(self, p):
        return self.disc // p ** (2 * self.level(p))

    def is_inert(self, p):
        if int_valuation(self.disc, p) % 2:
            return False
        return not is_square_mod(self.prime_to_p_disc(p), p) and self.prime_to_p_disc(p) % p != 0

    def real_root(self):
        """The archimedean root (-b + sqrt(D)) / (2a)."""
        return (-self.b + math.sqrt(self.disc)) / (2 * self.a)


@dataclass(frozen=True)
class RMPoint:
    form: QuadForm
    root: object
    conj_root: object
    sqrt_disc: object
    field: object

    @classmethod
    def of(cls, form, field):
        return _rm_point(form, field)

    @property
    def level(self):
        return self.form.level(self.field.p)


@lru_cache(maxsize=65536)
def _rm_point(form, field):
    s = field.sqrt(form.disc)
    two_a = 2 * form.a
    root = (s - form.b) / two_a
    conj_root = (-s - form.b) / two_a
    return RMPoint(form, root, conj_root, s, field)


@dataclass(frozen=True)
class DivisorComponent:
    multiplicity: int
    form: QuadForm
    parity: int = 0


@dataclass(frozen=True)
class RMDivisor:
    """A finite formal sum of SL2(Z)-classes; parity 1 marks the classes [p*tau]."""

    components: tuple = ()

    @classmethod
    def from_entries(cls, entries):
        comps = []
        for m, form, parity in entries:
            if not isinstance(form, QuadForm):
                form = QuadForm.from_list(form)
            comps.append(DivisorComponent(int(m), form, int(parity)))
        return cls(tuple(comps))

    def is_empty(self):
        return all(comp.multiplicity == 0 for comp in self.components)

    def varpi(self):
        """The involution [tau] -> -[p*tau]."""
        return RMDivisor(
            tuple(DivisorComponent(-comp.multiplicity, comp.form, 1 - comp.parity) for comp in self.components)
        )

    def symmetrized(self):
        return RMDivisor(self.components + self.varpi().components)

    def validate(self, p):
        problems = []
        for comp in self.components:
            form = comp.form
            if form.level(p) != 0:
                problems.append(f"{form.as_list()} has level {form.level(p)} at p={p}")
            elif not form.is_inert(p):
                problems.append(f"{form.as_list()} (disc {form.disc}) is not inert at p={p}")
            if comp.parity not in (0, 1):
                problems.append(f"parity {comp.parity} of {form.as_list()} is not 0 or 1")
        if problems:
            raise NotInert("; ".join(problems))

    def as_entries(self):
        return [[comp.multiplicity, comp.form.as_list(), comp.parity] for comp in self.components]


def _isqrt_disc(D):
    return math.isqrt(D)


def is_reduced(f):
    s = _isqrt_disc(f.disc)
    return 0 < f.b <= s and 2 * abs(f.a) - f.b <= s and 2 * abs(f.a) + f.b >= s + 1


def rho_step(f):
    """One reduction step: returns (g, M) with f o M = g and g[0] = f[2]."""
    D = f.disc
    s = _isqrt_disc(D)
    c = f.c
    mod = 2 * abs(c)
    if abs(c) > s:
        b_new = (-f.b) % mod
        if b_new > abs(c):
            b_new -= mod
    else:
        b_new = s - (s + f.b) % mod
    t = (b_new + f.b) // (2 * c)
    c_new = (b_new * b_new - D) // (4 * c)
    return QuadForm(c, b_new, c_new), ((0, -1), (1, t))


def reduce_form(f):
    """Return (g, R) with g reduced and f o R = g."""
    R = IDENTITY
    g = f
    steps = 0
    while not is_reduced(g):
        g, M = rho_step(g)
        R = mat_mul(R, M)
        steps += 1
        if steps > MAX_REDUCTION_STEPS:
            raise FormError(f"reduction of {f.as_list()} did not terminate")
    return g, R


@lru_cache(maxsize=4096)
def _cycle(f):
    g0, R = reduce_form(f)
    cycle = [g0]
    mats = []
    g = g0
    while True:
        g, M = rho_step(g)
        mats.append(M)
        if g == g0:
            break
        cycle.append(g)
        if len(cycle) > MAX_REDUCTION_STEPS:
            raise FormError(f"cycle of {f.as_list()} did not close")
    return tuple(cycle), tuple(mats), R


def reduce_cycle(f):
    """The cycle of reduced forms in the SL2(Z)-class of f, starting at its reduction."""
    return list(_cycle(f)[0])


def same_class(f, g):
    if f.disc != g.disc:
        raise DiscMismatch(f"discriminants {f.disc} and {g.disc} differ")
    return reduce_form(g)[0] in set(_cycle(f)[0])


@lru_cache(maxsize=1024)
def crossing_forms(D):
    """Primitive forms of discriminant D with ac < 0, sorted."""
    forms = []
    b = -math.isqrt(D)
    while b * b < D:
        if (b * b - D) % 4 == 0:
            N = (b * b - D) // 4
            for a in range(1, -N + 1):
                if N % a == 0:
                    for sa in (a, -a):
                        c = N // sa
                        if math.gcd(sa, b, c) == 1:
                            forms.append(QuadForm(sa, b, c))
        b += 1
    return tuple(sorted(forms))


def intersection_sign(f):
    if f.a * f.c >= 0:
        return 0
    return 1 if f.a > 0 else -1


def _cycle_automorph(f):
    cycle, mats, R = _cycle(f)
    M = IDENTITY
    for step in mats:
        M = mat_mul(M, step)
    gamma = mat_mul(mat_mul(R, M), adjugate(R))
    if trace(gamma) < 0:
        gamma = negate(gamma)
    return gamma


def pell_solution(D):
    """Fundamental (t, y) with t^2 - D y^2 = 4 and t, y > 0."""
    f = principal_form(D)
    gamma = _cycle_automorph(f)
    t = trace(gamma)
    y = abs(gamma[1][0] // f.a)
    if t <= 2 or y <= 0 or t * t - D * y * y != 4:
        raise PellFailure(f"no fundamental unit found for D = {D}")
    return t, y


def principal_form(D):
    if D % 4 == 0:
        return QuadForm(1, 0, -D // 4)
    if D % 4 == 1:
        return QuadForm(1, 1, (1 - D) // 4)
    raise FormError(f"{D} is not a discriminant")


def automorph(f):
    """Generator of the stabilizer of f with the root as attracting fixed point."""
    t, y = pell_solution(f.disc)
    gamma = (((t - f.b * y) // 2, -f.c * y), (f.a * y, (t + f.b * y) // 2))
    if det(gamma) != 1 or f.compose(gamma) != f:
        raise PellFailure(f"automorph of {f.as_list()} failed verification")
    tau = f.real_root()
    if abs(gamma[1][0] * tau + gamma[1][1]) ** -2 >= 1:
        gamma = adjugate(gamma)
    logger.debug(f"automorph of {f.as_list()}: t={t} y={y} gamma={gamma}")
    return gamma


def level0_atoms(D, parity):
    """Signed crossing forms at {0, oo} of the components of the given parity."""
    weights = Counter()
    for comp in D.components:
        if comp.parity != parity or comp.multiplicity == 0:
            continue
        for g in crossing_forms(comp.form.disc):
            if same_class(g, comp.form):
                weights[g] += comp.multiplicity * intersection_sign(g)
    return sorted((g, w) for g, w in weights.items() if w)


def _radical_groups(atoms, n):
    """Exact Deg sums, split by the square class of sqrt(D)^(n/2)."""
    from greens.padic import squarefree_decomposition
    from greens.poly_weight import int_poly_pow

    half = n // 2
    groups = {}
    for form, weight in atoms:
        f, d0 = squarefree_decomposition(form.disc)
        key = d0 if half % 2 else 1
        # sqrt(D)^half = f^half * d0^(half//2) * (sqrt(d0) when half is odd)
        scale = Fraction(weight, f**half) / Fraction(d0) ** (half // 2)
        poly = int_poly_pow((form.c, form.b, form.a), half)
        acc = groups.setdefault(key, [Fraction(0)] * (n + 1))
        for i, coeff in enumerate(poly):
            acc[i] += scale * coeff
    return {key: coeffs for key, coeffs in groups.items() if any(coeffs)}


@dataclass(frozen=True)
class DegreeCheck:
    passed: bool
    witness: dict

    def __bool__(self):
        return self.passed


def deg_check(D, k, p, field=None):
    """Vanishing of the degree symbol at v0 and at its p+1 neighbours."""
    from greens.poly_weight import atom_polynomial, PolyN
    from greens.symbols import INF, lift_atoms

    n = k - 2
    X0 = level0_atoms(D, 0)
    Y0 = level0_atoms(D, 1)
    vertices = {"v0": X0}
    for cls, atoms in lift_atoms(Y0, p, 0).items():
        label = "v_inf" if cls == INF else f"v_{cls}"
        vertices[label] = atoms
    witness = {}
    passed = True
    for label, atoms in vertices.items():
        groups = _radical_groups(atoms, n)
        if groups:
            passed = False
            if field is not None:
                total = PolyN.zero(field, n)
                for form, weight in atoms:
                    total = total + atom_polynomial(form, weight, field, n)
                witness[label] = total
            else:
                witness[label] = groups
    logger.info(f"degree check at p={p}, k={k}: {'passed' if passed else 'failed at ' + ', '.join(witness)}")
    return DegreeCheck(passed, witness)
