from fractions import Fraction
from math import comb

import pytest

from solidangles import families as fam
from solidangles.ehrhart import (
    NumeratorVector,
    QuasiPolynomial,
    binomial_transform,
    count,
    count_relative_interior,
    ehrhart_polynomial,
    fit_ehrhart,
    hstar,
    reciprocity_check,
)
from solidangles.polytope import Polytope, SizeError, count_lattice_points
from solidangles.rational_linalg import Polynomial


@pytest.mark.parametrize("h", [1, 2, 12])
def test_reeve_t2(h):
    assert count(fam.reeve(h), 2) == h + 9


@pytest.mark.parametrize("d", [1, 2, 3])
def test_standard_simplex_counts(d):
    s = fam.standard_simplex(d)
    assert [count(s, t) for t in range(1, 5)] == [comb(t + d, d) for t in range(1, 5)]


def test_interior_of_standard_triangle():
    tri = fam.standard_simplex(2)
    assert count_relative_interior(tri, tri.top_face, 3) == 1


@pytest.mark.parametrize("h", [1, 12, 20])
def test_reeve_polynomial(h):
    poly = ehrhart_polynomial(fam.reeve(h))
    assert poly.exact_coeffs() == (1, 2 - Fraction(h, 6), 1, Fraction(h, 6))


def test_half_segment_constituents():
    q = fit_ehrhart(fam.interval(0, Fraction(1, 2)))
    assert q.period == 2
    even, odd = q.constituents
    assert even.exact_coeffs() == (1, Fraction(1, 2))
    assert odd.exact_coeffs() == (Fraction(1, 2), Fraction(1, 2))
    assert [q(t) for t in range(1, 7)] == [t // 2 + 1 for t in range(1, 7)]


def test_rational_collapse_to_polynomial():
    # [1/3, 4/3] has exactly one integer point per unit length
    q = fit_ehrhart(fam.interval(Fraction(1, 3), Fraction(4, 3)))
    assert q.period == 3
    q2 = fit_ehrhart(Polytope([(0, 0), (Fraction(1, 2), 0), (0, 1), (Fraction(1, 2), 1)]))
    assert q2.period == 2


@pytest.mark.parametrize("h", [1, 2, 12])
def test_reciprocity(h):
    rep = reciprocity_check(fam.reeve(h), ts=(1, 2, 3))
    assert rep["ok"]
    assert ehrhart_polynomial(fam.reeve(h))(-1) == 0


def test_reciprocity_cube():
    assert reciprocity_check(fam.unit_cube(3), ts=(1, 2, 3, 4))["ok"]


@pytest.mark.parametrize("h", [1, 2, 12])
def test_hstar_reeve(h):
    assert tuple(hstar(fam.reeve(h)).entries) == (1, 0, h - 1, 0)


def test_hstar_small_examples():
    assert tuple(hstar(fam.unit_cube(2)).entries) == (1, 1, 0)
    for d in (1, 2, 3):
        assert tuple(hstar(fam.standard_simplex(d)).entries) == (1,) + (0,) * d


def test_hstar_sums_to_normalized_volume():
    p = fam.cross_polytope(3)
    assert sum(hstar(p).entries) == 6 * p.volume()


def test_binomial_transform_with_errors():
    vec = binomial_transform([0, 1, 4], [0.0, 0.1, 0.1])
    assert tuple(vec.entries) == (0, 1, 1)
    assert vec.errors[1] == pytest.approx(0.1)
    assert isinstance(vec, NumeratorVector) and vec.denominator_exponent == 3


def test_count_validation():
    with pytest.raises(ValueError):
        count(fam.unit_cube(2), 0)


def test_quasipolynomial_coefficient_period():
    a = Polynomial.from_exact([0, 1])
    b = Polynomial.from_exact([Fraction(1, 2), 1])
    q = QuasiPolynomial(2, (a, b))
    assert q.coefficient_period(1) == 1
    assert q.coefficient_period(0) == 2
    assert not q.is_polynomial
    assert QuasiPolynomial(2, (a, a)).collapse().period == 1


def test_lattice_scan_size_guard():
    big = Polytope([(0, 0, 0), (10**4, 0, 0), (0, 10**4, 0), (0, 0, 10**4)])
    with pytest.raises(SizeError):
        count_lattice_points(big, 1)
