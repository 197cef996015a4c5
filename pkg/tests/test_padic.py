from fractions import Fraction

import pytest

from greens.errors import DivisionByIndistinguishableZero, NoSquareRoot, NotAUnit, PadicError, ZeroArgument
from greens.padic import (
    QuadField,
    int_valuation,
    nonresidue,
    rational_valuation,
    squarefree_decomposition,
    teichmuller,
)
from tests.conftest import agree


def test_valuations():
    assert int_valuation(54, 3) == 3
    assert int_valuation(7, 3) == 0
    assert rational_valuation(Fraction(2, 9), 3) == -2
    assert rational_valuation(Fraction(27, 4), 3) == 3


@pytest.mark.parametrize("p, g", [(3, -1), (7, -1), (5, 2), (13, 2), (17, 3)])
def test_nonresidue(p, g):
    assert nonresidue(p) == g


@pytest.mark.parametrize("d, expected", [(20, (2, 5)), (80, (4, 5)), (-10, (1, -10)), (245, (7, 5)), (-1, (1, -1))])
def test_squarefree_decomposition(d, expected):
    assert squarefree_decomposition(d) == expected


def test_field_rejects_bad_parameters():
    with pytest.raises(PadicError):
        QuadField(4, 10)
    with pytest.raises(PadicError):
        QuadField(3, 0)
    with pytest.raises(PadicError):
        QuadField(3, 10, pin=2)


def test_u_squares_to_nonresidue(field):
    u = field.u()
    assert agree(u * u, field(field.g)) >= field.prec


def test_rational_arithmetic(field):
    x = field(Fraction(2, 3))
    y = field(Fraction(5, 7))
    assert x.valuation == -1
    assert agree(x * y, field(Fraction(10, 21))) >= field.prec - 1
    assert agree(x / y, field(Fraction(14, 15))) >= field.prec - 1
    assert agree(x + y - x, y) >= field.prec - 1


def test_inverse_in_extension(field):
    x = field.element(2, 5)
    assert agree(x * x.inverse(), field.one()) >= field.prec


def test_division_by_zero_raises(field):
    with pytest.raises(DivisionByIndistinguishableZero):
        field.one() / field.zero()


def test_norm_and_conjugate(field):
    x = field.element(3, 2)
    # 9 - g * 4 with g = -1
    assert agree(x * x.conj(), field(13)) >= field.prec
    assert (x.norm() - field.padic(13)).valuation >= field.prec


def test_sqrt_squares_back(field):
    for d in (-1, 5, 20, -7, 80, 7):
        r = field.sqrt(d)
        assert agree(r * r, field(d)) >= field.prec - 1


def test_sqrt_pinned_by_squarefree_part(field):
    assert agree(field.sqrt(20), field.sqrt(5) * 2) >= field.prec
    assert agree(field.sqrt(45), field.sqrt(5) * 3) >= field.prec


def test_sqrt_pin_flips_sign():
    plus = QuadField(3, 15).sqrt(5)
    minus = QuadField(3, 15).with_pin(-1).sqrt(5)
    assert agree(plus, -minus) >= 15


def test_sqrt_of_odd_valuation_fails(field):
    with pytest.raises(NoSquareRoot):
        field.sqrt(3)
    with pytest.raises(NoSquareRoot):
        field.sqrt(0)


def test_teichmuller_is_root_of_unity(field):
    x = field.element(2, 1)
    w = teichmuller(x)
    assert agree(w ** 8, field.one()) >= field.prec
    assert w.reduction() == x.reduction()


def test_teichmuller_needs_unit(field):
    with pytest.raises(NotAUnit):
        teichmuller(field(3))


def test_log_is_a_homomorphism(field):
    x = field.element(1, 3)
    y = field.element(2, 1)
    assert agree(field.log(x * y), field.log(x) + field.log(y)) >= field.prec - 2


def test_log_kills_torsion(field):
    assert field.log(-1).valuation >= field.prec
    assert field.log(field.teichmuller(field.element(1, 1))).valuation >= field.prec - 1


def test_log_branch_at_p(field):
    assert agree(field.log(3, 5), field(5)) >= field.prec - 1
    assert field.log(3, 0).valuation >= field.prec


def test_branch_shift_is_affine(field):
    x = field(Fraction(18, 5))  # valuation 2
    shift = field.log(x, 1) - field.log(x, 0)
    assert agree(shift, field(2)) >= field.prec - 2


def test_log_of_zero_raises(field):
    with pytest.raises(ZeroArgument):
        field.log(field.zero())


def test_digit_string_is_little_endian(field):
    assert field(5).digit_string().startswith("v=0;a=21")
