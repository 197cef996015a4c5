from fractions import Fraction

import pytest
from sympy.solvers.diophantine.diophantine import diop_DN

from greens.errors import DiscMismatch, NotIndefinite, NotInert, NotPrimitive, SquareDiscriminant
from greens.matrices import det
from greens.quadforms import (
    QuadForm,
    RMDivisor,
    RMPoint,
    automorph,
    crossing_forms,
    deg_check,
    intersection_sign,
    is_reduced,
    level0_atoms,
    pell_solution,
    reduce_cycle,
    reduce_form,
    same_class,
)
from tests.conftest import FOUR_PHI, PHI, SQRT5, agree


def unit_powers(t, y, D):
    """(x, w) with x + w sqrt(D) = ((t + y sqrt(D)) / 2)**m for m = 1, 2, 3 while integral."""
    x, w = Fraction(t, 2), Fraction(y, 2)
    a, b = x, w
    for _ in range(3):
        if a.denominator == 1 and b.denominator == 1:
            yield int(a), int(b)
        a, b = a * x + b * w * D, a * w + b * x


def test_form_validation():
    with pytest.raises(NotIndefinite):
        QuadForm(1, 0, 1)
    with pytest.raises(SquareDiscriminant):
        QuadForm(1, 0, -4)
    with pytest.raises(NotPrimitive):
        QuadForm(2, 0, -10)


def test_form_basics():
    f = QuadForm.from_list([1, -4, -16])
    assert f.disc == 80
    assert f.level(3) == 0
    assert f.is_inert(3)
    assert not QuadForm(1, 0, -3).is_inert(3)
    assert f(2, 1) == 4 - 8 - 16


@pytest.mark.parametrize("form", [QuadForm(7, 13, -3), QuadForm(-5, 11, 3), FOUR_PHI, QuadForm(10, 21, 7)])
def test_reduce_form(form):
    g, R = reduce_form(form)
    assert is_reduced(g)
    assert det(R) == 1
    assert form.compose(R) == g


def test_reduce_cycle_is_closed():
    cycle = reduce_cycle(PHI)
    assert all(is_reduced(g) for g in cycle)
    assert all(g.disc == 5 for g in cycle)


def test_same_class():
    assert same_class(PHI, QuadForm(1, 1, -1))
    assert same_class(PHI, PHI.compose(((2, 1), (1, 1))))
    with pytest.raises(DiscMismatch):
        same_class(PHI, SQRT5)


@pytest.mark.parametrize("D", [5, 8, 12, 13, 20, 32, 80, 245])
def test_pell_matches_sympy(D):
    t, y = pell_solution(D)
    assert t * t - D * y * y == 4
    x1, y1 = diop_DN(D, 1)[0]
    # the smallest integral power of (t + y sqrt D)/2 is the fundamental norm-one unit of Z[sqrt D]
    assert next(unit_powers(t, y, D)) == (x1, y1)


def test_automorph_of_four_phi():
    gamma = automorph(FOUR_PHI)
    assert gamma == ((13, 32), (2, 5))
    assert det(gamma) == 1
    assert FOUR_PHI.compose(gamma) == FOUR_PHI


def test_automorph_fixes_root(field):
    for form in (FOUR_PHI, QuadForm(1, 0, -20), PHI):
        (a, b), (c, d) = automorph(form)
        w = RMPoint.of(form, field).root
        assert agree((w * a + b) / (w * c + d), w) >= field.prec - 2


def test_crossing_forms_disc5():
    forms = crossing_forms(5)
    assert forms == (QuadForm(-1, -1, 1), QuadForm(-1, 1, 1), QuadForm(1, -1, -1), QuadForm(1, 1, -1))
    assert [intersection_sign(f) for f in forms] == [-1, -1, 1, 1]


def test_level0_atoms_single_class():
    D = RMDivisor.from_entries([(1, PHI, 0)])
    assert level0_atoms(D, 0) == [
        (QuadForm(-1, -1, 1), -1),
        (QuadForm(-1, 1, 1), -1),
        (QuadForm(1, -1, -1), 1),
        (QuadForm(1, 1, -1), 1),
    ]
    assert level0_atoms(D, 1) == []


def test_rm_point_roots(field):
    point = RMPoint.of(FOUR_PHI, field)
    assert agree(point.root * point.root - point.root * 4 - 16, field.zero()) >= field.prec - 2
    assert agree(point.root - point.conj_root, point.sqrt_disc) >= field.prec - 1
    assert point.level == 0


def test_divisor_varpi_and_validation():
    D = RMDivisor.from_entries([(9, PHI, 0), (-2, SQRT5, 0)])
    assert D.varpi().as_entries() == [[-9, [1, -1, -1], 1], [2, [1, 0, -5], 1]]
    assert len(D.symmetrized().components) == 4
    D.validate(3)
    with pytest.raises(NotInert):
        RMDivisor.from_entries([(1, QuadForm(1, 0, -3), 0)]).validate(3)


def test_degree_check_passes_for_flagship_divisors(a1_divisor, a3_divisor):
    assert deg_check(a1_divisor, 4, 3)
    assert deg_check(a3_divisor, 4, 3)


def test_degree_check_fails_for_single_class():
    check = deg_check(RMDivisor.from_entries([(1, PHI, 0)]), 4, 3)
    assert not check
    assert "v0" in check.witness


def test_degree_check_disc32_conjugate_pair():
    f = QuadForm(1, 0, -8)
    D = RMDivisor.from_entries([(1, f, 0), (-1, f.negate(), 0)])
    assert deg_check(D, 4, 3)
