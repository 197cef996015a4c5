from fractions import Fraction

import pytest

from greens.affinoid import (
    INF,
    LogLaurentFunction,
    atom_absorb,
    chart_transform,
    deriv,
    dump,
    eval_jet,
    from_atoms,
    integ,
    load,
    slash,
)
from greens.errors import (
    AffinoidError,
    AtomInRemovedDisk,
    AtomNotInRemovedDisk,
    PointOffAffinoid,
    UnresolvedPolynomialAmbiguity,
    UnsupportedMatrix,
)
from greens.matrices import S, U
from greens.poly_weight import PolyN
from greens.quadforms import QuadForm, RMPoint
from tests.conftest import PHI, agree

ORDER = 40


def zero(field, n=2, mod_degree=-1):
    return LogLaurentFunction.zero(field, n, ORDER, mod_degree=mod_degree)


def test_chart_transform_identity(field):
    chart = [field(i + 1) for i in range(8)]
    out = chart_transform(chart, ((1, 0), (0, 1)), 2, field)
    assert all(agree(x, y) >= field.prec for x, y in zip(out, chart))


def test_from_series_and_classes(field):
    f = LogLaurentFunction.from_series(field, 2, ORDER, entire=[0, 0, 0, 1], principal={1: {2: 3}})
    assert f.classes() == [INF, 1]
    assert set(f.components()) == {INF, 1}
    assert f.restrict({1}).classes() == [1]


def test_symbolic_atoms_must_lie_on_affinoid(field):
    with pytest.raises(AtomInRemovedDisk):
        from_atoms([(QuadForm(1, -3, -9), 1)], field, 2, ORDER)


def test_absorb_finite_disk_matches_log(field, affinoid_point):
    P = PolyN.from_rationals(field, [1, 2, -1])
    w = field(1) + field.u() * 3
    f = atom_absorb(zero(field), w, P)
    assert list(f.rational_logs) == [1]
    value = eval_jet(f, affinoid_point, 0)[0]
    expected = P(affinoid_point) * field.log(affinoid_point - w)
    assert agree(value, expected) >= field.prec - 4


def test_absorb_infinite_disk_matches_log(field, affinoid_point):
    P = PolyN.from_rationals(field, [2, 0, 1])
    w = field(Fraction(1, 3)) + field.u()
    f = atom_absorb(zero(field), w, P)
    assert not f.rational_logs
    value = eval_jet(f, affinoid_point, 0)[0]
    expected = P(affinoid_point) * field.log(affinoid_point - w)
    assert agree(value, expected) >= field.prec - 4


def test_absorb_rejects_affinoid_points(field):
    with pytest.raises(AtomNotInRemovedDisk):
        atom_absorb(zero(field), field.element(1, 1), PolyN.from_rationals(field, [1, 0, 0]))


def test_slash_by_s_moves_monomial_into_disk_zero(field):
    f = LogLaurentFunction.from_series(field, 2, ORDER, entire=[0, 0, 0, 1])
    g = slash(f, S)
    # z^3 | S = z^2 * (-1/z)^3 = -1/z
    assert g.classes() == [0]
    assert agree(g.principal[0][1], field(-1)) >= field.prec


def test_unimodular_slash_matches_direct_evaluation(field, affinoid_point):
    f = LogLaurentFunction.from_series(field, 2, ORDER, entire=[1, 0, 2, 0, 1], principal={2: {1: 1, 3: -1}})
    for gamma in (S, U, ((2, 1), (1, 1))):
        (a, b), (c, d) = gamma
        z = affinoid_point
        moved = (z * a + b) / (z * c + d)
        direct = eval_jet(f, moved, 0)[0] * (z * c + d) ** 2
        assert agree(eval_jet(slash(f, gamma), z, 0)[0], direct) >= field.prec - 4


def test_slash_composes(field, other_point):
    f = LogLaurentFunction.from_series(field, 2, ORDER, entire=[0, 1, 0, 3], principal={0: {2: 1}})
    A, B = ((2, 1), (1, 1)), U
    from greens.matrices import mat_mul

    left = slash(slash(f, A), B)
    right = slash(f, mat_mul(A, B))
    assert agree(eval_jet(left, other_point, 0)[0], eval_jet(right, other_point, 0)[0]) >= field.prec - 4


def test_slash_with_atoms_matches_direct_evaluation(field, other_point):
    f = from_atoms([(PHI, 1)], field, 2, ORDER).with_polynomial(PolyN.zero(field, 2))
    z = other_point
    (a, b), (c, d) = S
    direct = eval_jet(f, (z * a + b) / (z * c + d), 0)[0] * (z * c + d) ** 2
    assert agree(eval_jet(slash(f, S), z, 0)[0], direct) >= field.prec - 4


def test_descend_requires_series_only(field):
    f = from_atoms([(PHI, 1)], field, 2, ORDER)
    with pytest.raises(AffinoidError):
        slash(f, ((1, 0), (0, 3)))


def test_descend_rejects_other_matrices(field):
    f = LogLaurentFunction.from_series(field, 2, ORDER, principal={1: {3: 1}}, mod_degree=2)
    with pytest.raises(UnsupportedMatrix):
        slash(f, ((3, 1), (0, 1)))
    with pytest.raises(UnsupportedMatrix):
        slash(f, ((2, 0), (0, 1)))


def test_descend_lands_in_target_disk(field):
    f = LogLaurentFunction.from_series(field, 2, ORDER, principal={1: {3: 1}}, mod_degree=2)
    assert slash(f, ((1, -2), (0, 3))).classes() == [2]
    assert slash(f, ((3, 0), (0, 1))).classes() == [INF]


def test_weight_k_slash_of_simple_pole(field, affinoid_point):
    f = LogLaurentFunction.from_series(field, 2, 30, weight=4, principal={1: {1: 1}})
    g = slash(f, S)
    z = affinoid_point
    # (1/(z - 1)) |_4 S = -1 / (z^3 (z + 1))
    expected = -((z ** 3) * (z + 1)).inverse()
    assert agree(eval_jet(g, z, 0)[0], expected) >= field.prec - 6


def test_integ_then_deriv_recovers_function(field, affinoid_point):
    f = LogLaurentFunction.from_series(field, 2, 30, weight=4, entire=[1, 2], principal={0: {1: 1, 5: 2}})
    back = deriv(integ(f), 3)
    assert back.weight == 4
    assert back.mod_degree == -1
    assert agree(eval_jet(back, affinoid_point, 0)[0], eval_jet(f, affinoid_point, 0)[0]) >= field.prec - 4


def test_eval_jet_derivatives(field, affinoid_point):
    f = LogLaurentFunction.from_series(field, 2, ORDER, entire=[0, 0, 0, 1], principal={0: {1: 1}})
    z = affinoid_point
    jet = eval_jet(f, z, 2)
    assert agree(jet[0], z ** 3 + z.inverse()) >= field.prec - 1
    assert agree(jet[1], z * z * 3 - (z * z).inverse()) >= field.prec - 1
    assert agree(jet[2], z * 6 + (z ** 3).inverse() * 2) >= field.prec - 1


def test_eval_jet_preconditions(field):
    f = zero(field)
    with pytest.raises(PointOffAffinoid):
        eval_jet(f, field(1), 0)
    with pytest.raises(UnresolvedPolynomialAmbiguity):
        eval_jet(zero(field, mod_degree=2), field.u(), 0)
    assert eval_jet(zero(field, mod_degree=2), field.u(), 0, allow_mod_poly=True)[0].is_zero()


def test_log_atom_jet(field, other_point):
    point = RMPoint.of(PHI, field)
    P = PolyN.from_rationals(field, [0, 1, 0])
    f = from_atoms([(PHI, P)], field, 2, ORDER).with_polynomial(PolyN.zero(field, 2))
    z = other_point
    jet = eval_jet(f, z, 1)
    assert agree(jet[0], z * field.log(z - point.root)) >= field.prec - 2
    assert agree(jet[1], field.log(z - point.root) + z / (z - point.root)) >= field.prec - 2


def test_pruned_drops_tiny_atoms(field):
    P = PolyN.from_rationals(field, [3 ** 25, 0, 0])
    f = from_atoms([(PHI, P)], field, 2, ORDER)
    assert not f.pruned(20).atoms


def test_dump_and_load(field):
    f = LogLaurentFunction.from_series(
        field, 2, 12, entire=[0, 0, 0, Fraction(5, 3), 7], principal={2: {1: 4, 6: Fraction(1, 9)}}, mod_degree=2
    )
    text = dump(f)
    assert text.splitlines()[1].startswith("inf, 3, -1, ")
    g = load(text, field)
    assert g.classes() == f.classes()
    assert agree(g.principal[2][6], f.principal[2][6]) >= field.prec - 2


def test_dump_refuses_log_atoms(field):
    with pytest.raises(AffinoidError):
        dump(from_atoms([(PHI, 1)], field, 2, ORDER))
