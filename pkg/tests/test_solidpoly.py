import itertools
from fractions import Fraction

import numpy as np
import pytest

from helpers import random_lattice_polytope, random_lattice_simplex
from solidangles import families as fam
from solidangles.angle import EnginePolicy
from solidangles.polytope import Polytope, SizeError
from solidangles.solidpoly import (
    EngineAccuracyError,
    _integer_solvable,
    a_eval,
    a_eval_by_faces,
    brianchon_gram_residual,
    brianchon_gram_sum,
    face_index,
    fit_solid,
    fit_solid_constituents,
    is_unimodal,
    j_index,
    numerator,
    numerator_checks,
    parity_support,
    period_report,
    unimodality_report,
    vertex_sum,
)

EXACT = EnginePolicy()


def test_cube_at_one():
    for d in (1, 2, 3):
        assert a_eval(fam.unit_cube(d), 1).value == pytest.approx(1.0, abs=1e-12)


def test_reeve_one_at_one_is_vertex_sum():
    p = fam.reeve(1)
    assert a_eval(p, 1).value == pytest.approx(0.127, abs=1e-3)
    assert a_eval(p, 1).value == pytest.approx(vertex_sum(p).value, abs=1e-14)


def test_a_eval_zero_and_negative():
    assert a_eval(fam.unit_cube(2), 0).value == 0
    with pytest.raises(ValueError):
        a_eval(fam.unit_cube(2), -1)


def test_square_by_faces():
    sq = fam.unit_cube(2)
    assert a_eval_by_faces(sq, 2).value == pytest.approx(4.0)
    assert a_eval(sq, 2).value == pytest.approx(4.0)
    tri = fam.standard_simplex(2)
    assert a_eval_by_faces(tri, 1).value == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(8))
def test_point_and_face_sums_agree(seed):
    rng = np.random.default_rng(seed)
    p = random_lattice_polytope(rng, 2 + seed % 2)
    for t in (1, 2):
        assert a_eval(p, t).value == pytest.approx(a_eval_by_faces(p, t).value, abs=1e-9)


def test_reeve_two_by_faces():
    p = fam.reeve(2)
    for t in (1, 2):
        assert a_eval(p, t).value == pytest.approx(a_eval_by_faces(p, t).value, abs=1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_polygon_law(seed):
    rng = np.random.default_rng(100 + seed)
    p = random_lattice_polytope(rng, 2, n_points=5, box=3)
    sp = fit_solid(p)
    assert sp.coeffs[2] == pytest.approx(float(p.volume()), abs=1e-9)
    assert abs(sp.coeffs[1]) < 1e-9 and sp.coeffs[0] == 0
    assert sp.is_exact and sp.poly.exact[2] == p.volume()
    for t in (1, 2, 3):
        assert a_eval(p, t).value == pytest.approx(float(p.volume()) * t * t, abs=1e-9)


def test_parity_support():
    assert parity_support(3) == [3, 1]
    assert parity_support(4) == [4, 2]


def test_parity_residual_without_enforcement():
    for p in (fam.reeve(3), fam.regular_tetrahedron(), fam.cross_polytope(3)):
        sp = fit_solid(p, parity=False)
        assert abs(sp.coeffs[2]) < 1e-6
        assert not sp.parity_enforced


def test_triangulation_additivity():
    cube = fam.unit_cube(3)
    for t in (1, 2, 3):
        pieces = sum(a_eval(s, t).value for s in fam.all_permutation_simplices(3))
        assert pieces == pytest.approx(a_eval(cube, t).value, abs=1e-8)
        assert pieces == pytest.approx(t ** 3, abs=1e-8)


def test_cube_exact_recovery():
    sp = fit_solid(fam.unit_cube(3))
    assert sp.is_exact and sp.poly.exact_coeffs() == (0, 0, 0, 1)
    d = sp.to_dict()
    assert d["coefficients"] == ["0", "0", "0", "1"]


def test_reeve_fit_not_marked_exact():
    sp = fit_solid(fam.reeve(5))
    assert not sp.is_exact
    assert sp.coeffs[1] < 0


def test_fit_raises_on_inaccurate_engine():
    # 4-D Monte Carlo with very few samples cannot meet the residual bound ...
    # unless the bound is honest; either way the result must be consistent
    policy = EnginePolicy(mode="mc", mc_samples=2_000, seed=5)
    try:
        sp = fit_solid(fam.cross_polytope(4), policy)
    except EngineAccuracyError:
        return
    vol = float(fam.cross_polytope(4).volume())
    assert abs(sp.coeffs[4] - vol) <= sp.errors[4] + 1e-9


@pytest.mark.parametrize("p", [fam.standard_simplex(3), fam.permutation_simplex([3, 2, 1]),
                               fam.delta_h([4, 4]), fam.delta_h([-6, -6])])
def test_only_vertex_unimodular_simplex_numerator(p):
    assert p.volume() == Fraction(1, 6)
    s = vertex_sum(p).value
    assert np.allclose(numerator(p).entries, [0, s, 1 - 2 * s, s], atol=1e-12)


@pytest.mark.parametrize("p", [fam.regular_tetrahedron(), fam.reeve(4)])
def test_only_vertex_simplex_numerator_general_volume(p):
    # the middle entry is 6 vol - 2S; it reduces to 1 - 2S only at volume 1/6
    s = vertex_sum(p).value
    v = float(p.volume())
    assert np.allclose(numerator(p).entries, [0, s, 6 * v - 2 * s, s], atol=1e-11)
    rep = unimodality_report(p)
    assert rep["vertex_sum_threshold"] == pytest.approx(2 * v)


def test_small_numerators():
    assert np.allclose(numerator(fam.unit_cube(2)).entries, [0, 1, 1], atol=1e-12)
    assert np.allclose(numerator(fam.unit_cube(1)).entries, [0, 1], atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_numerator_theorem_on_random_simplices(seed):
    rng = np.random.default_rng(200 + seed)
    p = random_lattice_simplex(rng, 3)
    assert numerator_checks(numerator(p))["ok"]


def test_numerator_checks_report_violations():
    from solidangles.ehrhart import NumeratorVector
    rep = numerator_checks(NumeratorVector((0.1, 0.5, -0.2, 0.4), (0.0,) * 4))
    assert not rep["ok"] and len(rep["violations"]) >= 3


def test_is_unimodal():
    assert is_unimodal([0, 1, 3, 1])
    assert is_unimodal([0, 1, 1, 1])
    assert not is_unimodal([0, 0.4, 0.2, 0.4])


def test_unimodality_reports():
    for h in (3, 5, 12):
        rep = unimodality_report(fam.reeve(h))
        assert rep["linear_coefficient"] < 0 <= rep["volume"]
        assert rep["unimodal"] and rep["numerator_unimodal"]
    tet = unimodality_report(fam.regular_tetrahedron())
    assert tet["vertex_sum"]["value"] < 1 / 3 and tet["unimodal"]
    far = unimodality_report(fam.delta_h([-20, -20]))
    assert far["vertex_sum"]["value"] > 1 / 3
    assert not far["unimodal"] and not far["numerator_unimodal"]
    assert np.allclose(far["pattern"], far["numerator"]["entries"], atol=1e-9)


def test_brianchon_gram_examples():
    assert brianchon_gram_residual(fam.unit_cube(2)) == pytest.approx(0, abs=1e-15)
    tet = fam.regular_tetrahedron()
    # -1 + 4/2 - 6 * (edge angle) + 4 * (vertex angle) = 0
    assert brianchon_gram_sum(tet).value == pytest.approx(0, abs=1e-12)
    for h in range(1, 6):
        assert brianchon_gram_residual(fam.reeve(h)) < 1e-9


def test_vertex_sum_examples():
    assert vertex_sum(fam.standard_simplex(3)).value == pytest.approx(0.206, abs=1e-3)
    q = Polytope([(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)])
    assert vertex_sum(q).value == pytest.approx(1 / 6, abs=1e-12)
    assert vertex_sum(Polytope([(0, 0), (5, 1), (2, 7)])).value == pytest.approx(0.5, abs=1e-15)


# -- periods ---------------------------------------------------------------


def brute_solvable(a, c, box=6):
    """Oracle: search a box of integer vectors."""
    n = len(a[0])
    for x in itertools.product(range(-box, box + 1), repeat=n):
        if all(sum(r[i] * x[i] for i in range(n)) == ci for r, ci in zip(a, c)):
            return True
    return False


@pytest.mark.parametrize("seed", range(40))
def test_integer_solvability_against_search(seed):
    rng = np.random.default_rng(seed)
    rows = int(rng.integers(1, 3))
    while True:
        a = rng.integers(-3, 4, (rows, 3)).tolist()
        if np.linalg.matrix_rank(np.array(a)) == rows:
            break
    c = rng.integers(-4, 5, rows).tolist()
    assert _integer_solvable(a, c) == brute_solvable(a, c)


def test_j_index():
    p = fam.half_prism(2)
    assert j_index(p, 2) == 1
    assert j_index(p, 1) == 2
    assert j_index(p, 0) == 2
    seg = fam.interval(Fraction(1, 3), Fraction(4, 3))
    assert j_index(seg, 0) == 3 and j_index(seg, 1) == 1
    facet = next(f for f in p.faces if f.dim == 1 and all(p.vertices[i][0] == 0 for i in f.vertices))
    assert face_index(p, facet) == 1


def test_period_examples():
    rep = period_report(fam.half_prism(2))
    assert rep["collapses"] and rep["ok"]
    assert rep["quasipolynomial"]["period"] == 1
    rep = period_report(fam.interval(0, Fraction(1, 2)))
    assert rep["collapses"] and rep["predicted_collapse"]
    rep = period_report(fam.interval(0, Fraction(1, 3)))
    assert not rep["collapses"] and not rep["predicted_collapse"] and rep["ok"]


def test_constant_term_nonzero_per_constituent():
    # constituents of odd-dimensional rational polytopes can carry a constant term
    q = fit_solid_constituents(fam.interval(0, Fraction(1, 3)))
    assert float(q.constituents[1].coeff(0)) == pytest.approx(1 / 6, abs=1e-9)
    assert float(q.constituents[1].coeff(1)) == pytest.approx(1 / 3, abs=1e-9)


def test_period_size_guards():
    with pytest.raises(SizeError):
        period_report(fam.interval(0, Fraction(1, 7)))
    with pytest.raises(SizeError):
        period_report(fam.unit_cube(4))
