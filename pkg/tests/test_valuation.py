from fractions import Fraction

import numpy as np
import pytest

from helpers import random_lattice_simplex
from solidangles import families as fam
from solidangles.polytope import DimensionError, Polytope
from solidangles.valuation import (
    HalfOpenParallelepiped,
    IndicatorValuation,
    SolidAngleValuation,
    ValuationError,
    g_numerator,
    get_valuation,
    height_slice,
    monotonicity_compare,
    n_eval,
    nonnegativity_check,
    parallelepiped_numerator,
    translation_spot_check,
)

IND = IndicatorValuation()
SOLID = SolidAngleValuation()
SQUARE = fam.unit_cube(2)
TRIANGLE = fam.standard_simplex(2)


def test_lookup():
    assert get_valuation("indicator").name == "indicator"
    assert get_valuation("solid").name == "solid"
    with pytest.raises(ValuationError):
        get_valuation("volume")


def test_indicator_on_reeve():
    assert n_eval(fam.reeve(12), 1, IND) == 4
    assert tuple(g_numerator(fam.reeve(12), IND).entries) == (1, 0, 11, 0)


def test_solid_on_square_and_indicator_on_triangle():
    assert np.allclose(g_numerator(SQUARE, SOLID).entries, [0, 1, 1])
    assert tuple(g_numerator(TRIANGLE, IND).entries) == (1, 0, 0)


def test_monotone_examples():
    rep = monotonicity_compare(TRIANGLE, SQUARE, IND)
    assert rep["ok"]
    assert [r["a"] for r in rep["rows"]] == [1, 0, 0] and [r["b"] for r in rep["rows"]] == [1, 1, 0]
    rep = monotonicity_compare(TRIANGLE, SQUARE, SOLID)
    assert rep["ok"]
    assert np.allclose([r["a"] for r in rep["rows"]], [0, 0.5, 0.5])


def test_monotone_requires_containment():
    with pytest.raises(ValueError):
        monotonicity_compare(SQUARE, TRIANGLE, IND)


def test_point_slice_conventions():
    point = Polytope([(1, 2)], allow_lower_dim=True)
    assert IND(point, (1, 2)) == 1
    assert IND(point, (1, 3)) == 0
    assert SOLID(point, (1, 2)) == 0.0
    assert IND.point_value == 1 and SOLID.point_value == 0


def test_indicator_rejects_non_integer_points():
    assert IND(SQUARE, (Fraction(1, 2), 0)) == 0


def test_translation_invariance():
    for v in (IND, SOLID):
        assert translation_spot_check(v, fam.reeve(3), (0, 0, 0), (2, -1, 5))
        assert translation_spot_check(v, SQUARE, (1, 0), (-3, 4))


def test_unit_segment_parallelepiped():
    seg = fam.unit_cube(1)
    pi = HalfOpenParallelepiped.of_simplex(seg)
    assert pi.volume == 1
    assert pi.lattice_points() == [(0, 0)]
    vec = parallelepiped_numerator(seg, SOLID)
    assert np.allclose(vec.entries, [0, 1])
    assert tuple(parallelepiped_numerator(seg, IND).entries) == (1, 0)


@pytest.mark.parametrize("h", [1, 2, 5, 12])
def test_reeve_parallelepiped(h):
    s = fam.reeve(h)
    pi = HalfOpenParallelepiped.of_simplex(s)
    assert pi.volume == h and len(pi.lattice_points()) == h
    assert tuple(parallelepiped_numerator(s, IND).entries) == (1, 0, h - 1, 0)
    assert np.allclose(parallelepiped_numerator(s, SOLID).entries,
                       g_numerator(s, SOLID).entries, atol=1e-9)


def test_parallelepiped_coordinates():
    pi = HalfOpenParallelepiped.of_simplex(fam.reeve(2))
    for x in pi.lattice_points():
        assert all(0 <= c < 1 for c in pi.coordinates(x))


def test_height_slice_is_hypersimplex_image():
    s = fam.standard_simplex(2)
    assert height_slice(s, 1) == s
    sl = height_slice(s, 2)
    assert set(sl.vertices) == {(1, 0), (0, 1), (1, 1)}
    assert height_slice(s, 3).dim == 0


@pytest.mark.parametrize("seed", range(5))
def test_random_simplices_both_routes(seed):
    s = random_lattice_simplex(np.random.default_rng(seed), 3, box=2)
    assert tuple(parallelepiped_numerator(s, IND).entries) == tuple(g_numerator(s, IND).entries)


def test_parallelepiped_rejects_non_simplex():
    with pytest.raises(DimensionError):
        parallelepiped_numerator(SQUARE, IND)


def test_nonnegativity_check_flags_negative():
    from solidangles.ehrhart import NumeratorVector
    assert not nonnegativity_check(NumeratorVector((1, -1), (0.0, 0.0)))["ok"]
    assert nonnegativity_check(g_numerator(fam.cross_polytope(3), IND))["ok"]


def test_g_numerator_rejects_rational():
    with pytest.raises(ValueError):
        g_numerator(fam.half_prism(2), IND)
