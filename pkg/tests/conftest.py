import pytest

from greens.padic import QuadField
from greens.quadforms import QuadForm, RMDivisor

PHI = QuadForm(1, -1, -1)
SQRT5 = QuadForm(1, 0, -5)
SQRT2 = QuadForm(1, 0, -2)
TWO_SQRT2 = QuadForm(1, 0, -8)
FOUR_PHI = QuadForm(1, -4, -16)


def agree(x, y):
    """Number of agreeing p-adic digits (valuation of the difference)."""
    return (x - y).valuation


@pytest.fixture
def field():
    return QuadField(3, 20)


@pytest.fixture
def wide_field():
    return QuadField(3, 40)


@pytest.fixture
def a1_divisor():
    return RMDivisor.from_entries([(9, PHI, 0), (-2, SQRT5, 0)]).symmetrized()


@pytest.fixture
def a3_divisor():
    return RMDivisor.from_entries([(7, SQRT2, 0), (-4, TWO_SQRT2, 0)]).symmetrized()


@pytest.fixture
def affinoid_point(field):
    """u, a point of the standard affinoid."""
    return field.u()


@pytest.fixture
def other_point(field):
    return field.element(1, 1)
