"""Cocycle evaluation at the fundamental automorph, the pairing and the expected-value check."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb, factorial

from greens.affinoid import eval_jet
from greens.errors import (
    NoSquareRoot,
    NonEmbeddableRoot,
    NormalizationMismatch,
    NotInert,
    PathThroughAtom,
    PointCollidesWithAtom,
)
from greens.matrices import act, cusp
from greens.padic import int_valuation
from greens.quadforms import RMPoint, automorph
from greens.symbols import symbol_eval

logger = logging.getLogger("greens.cocycle")

BASE_CUSPS = (0, None)


def fundamental_gamma(form, p=None):
    """SL2(Z) stabilizer of the target with its root as attracting fixed point."""
    if p is not None and (form.level(p) != 0 or not form.is_inert(p)):
        raise NotInert(f"target {form.as_list()} must be inert of level 0 at p={p}")
    return automorph(form)


def evaluate_cocycle(J, gamma, base=0):
    """J(gamma) as the symbol value on {base, gamma * base}."""
    start = cusp(base)
    return symbol_eval(J, start, act(gamma, start))


def literal_coefficients(n):
    half = n // 2
    return [
        Fraction((-1) ** j * comb(n - j, half - j), factorial(j) * comb(n, half)) for j in range(half + 1)
    ]


def raising_coefficients(n):
    """Coefficients c_j of J^(j) / (z - conj)^(n/2 - j) after n/2 raising steps."""
    k = n + 2
    coeffs = [Fraction(1)]
    for m in range(n // 2):
        nxt = [Fraction(0)] * (m + 2)
        for j, c in enumerate(coeffs):
            nxt[j + 1] += c
            nxt[j] += c * (2 - k + 2 * m - (m - j))
        coeffs = nxt
    return coeffs


def normalization_ratio(n):
    """The constant relating the raising form of the pairing to the literal sum."""
    literal = literal_coefficients(n)
    raised = raising_coefficients(n)
    ratio = raised[-1] / literal[-1]
    if any(r != ratio * c for r, c in zip(raised, literal)):
        raise NormalizationMismatch(f"raising coefficients {raised} are not proportional to {literal}")
    return ratio


def pairing_constant(n):
    """Scale applied to the literal sum, -1/2 at n = 2."""
    return 1 / normalization_ratio(n)


def literal_pairing(J, point, n=None):
    """Unscaled binomial sum of the jet of J at the root of `point`."""
    n = J.n if n is None else n
    half = n // 2
    sigma = point.root
    gap = sigma - point.conj_root
    jet = eval_jet(J, sigma, half)
    total = J.field.zero()
    for j, coeff in enumerate(literal_coefficients(n)):
        total = total + jet[j] * coeff / gap ** (half - j)
    return total


def pair_value(J, point, n=None):
    """Pairing of J against the cycle of `point` under the pinned normalization."""
    n = J.n if n is None else n
    return literal_pairing(J, point, n) * J.field(pairing_constant(n))


def green_value(J, target, field):
    """Pairing of J(gamma_sigma) at sigma, retrying from the cusp oo on a collision."""
    gamma = fundamental_gamma(target, field.p)
    point = RMPoint.of(target, field)
    for base in BASE_CUSPS:
        try:
            value = pair_value(evaluate_cocycle(J, gamma, base), point)
        except PointCollidesWithAtom as exc:
            logger.warning(f"base cusp {base if base is not None else 'inf'}: {exc}")
            continue
        return value, gamma
    raise PathThroughAtom(f"every base cusp puts an atom on the root of {target.as_list()}")


@dataclass(frozen=True)
class Factor:
    m: int
    x: Fraction
    exponent: int


@dataclass(frozen=True)
class AlgebraicExpr:
    """prefactor * log((sqrt m + x) / (sqrt m - x))^e summed over factors."""

    rational: Fraction
    sqrt_of: int | None
    factors: tuple

    def describe(self):
        pre = str(self.rational) + (f"/sqrt({self.sqrt_of})" if self.sqrt_of else "")
        parts = [f"((sqrt({f.m})+{f.x})/(sqrt({f.m})-{f.x}))^{f.exponent}" for f in self.factors]
        return f"{pre} * log({' * '.join(parts)})"


def _embedded_sqrt(m, field):
    if int_valuation(abs(m), field.p) % 2:
        raise NonEmbeddableRoot(f"sqrt({m}) is ramified at p={field.p}")
    try:
        return field.sqrt(m)
    except NoSquareRoot as exc:
        raise NonEmbeddableRoot(f"sqrt({m}) does not embed: {exc}") from exc


def expected_value(expr, field, branch, signs=None, prefactor_sign=1):
    """The expression under the chosen square-root signs."""
    signs = signs or {}
    total = field.zero()
    for f in expr.factors:
        root = _embedded_sqrt(f.m, field) * signs.get(f.m, 1)
        ratio = (root + f.x) / (root - f.x)
        total = total + field.log(ratio, branch) * f.exponent
    scale = field(expr.rational) * prefactor_sign
    if expr.sqrt_of:
        scale = scale / _embedded_sqrt(expr.sqrt_of, field)
    return total * scale


def compare_expected(value, expr, field, branch=0):
    """Best agreement valuation of `value` with `expr` over the square-root embeddings."""
    ms = sorted({f.m for f in expr.factors})
    prefactor_signs = (1, -1) if expr.sqrt_of else (1,)
    best, best_choice = None, None
    for choice in product((1, -1), repeat=len(ms)):
        signs = dict(zip(ms, choice))
        for pre in prefactor_signs:
            agreement = value.agreement(expected_value(expr, field, branch, signs, pre))
            if best is None or agreement > best:
                best, best_choice = agreement, (signs, pre)
    logger.info(f"expected value agrees to valuation {best} with signs {best_choice}")
    return best
