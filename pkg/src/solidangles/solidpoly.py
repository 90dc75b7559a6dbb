"""Solid-angle sums A_P(t), their (quasi)polynomials and numerators.

A_P(t) adds the solid angle of tP at every integer point. Angles depend
only on the face whose relative interior holds the point, so evaluations
count points per face and look the angle up once per face.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, lcm
from typing import Sequence

import numpy as np

from .angle import DEFAULT_POLICY, EnginePolicy, face_angle
from .ehrhart import (
    NumeratorVector,
    QuasiPolynomial,
    _check_t,
    binomial_transform,
)
from .polytope import (
    DimensionError,
    Face,
    Polytope,
    SizeError,
    count_lattice_points,
    count_relative_interior,
    lattice_point_faces,
)
from .rational_linalg import Polynomial, rank


class EngineAccuracyError(RuntimeError):
    """Fit residuals exceed the propagated error bound; raise the sample count."""


@dataclass(frozen=True)
class Estimate:
    value: float
    abs_error: float = 0.0

    def to_dict(self) -> dict:
        return {"value": self.value, "abs_error": self.abs_error}


@dataclass(frozen=True)
class SolidPolynomial:
    poly: Polynomial
    dim: int
    parity_enforced: bool
    evaluations: tuple[tuple[int, float, float], ...] = ()

    @property
    def coeffs(self) -> tuple[float, ...]:
        c = list(self.poly.coeffs) + [0.0] * (self.dim + 1 - len(self.poly.coeffs))
        return tuple(c)

    @property
    def errors(self) -> tuple[float, ...]:
        e = list(self.poly.errors) + [0.0] * (self.dim + 1 - len(self.poly.errors))
        return tuple(e)

    @property
    def is_exact(self) -> bool:
        return self.poly.is_exact

    def __call__(self, t):
        return self.poly(t)

    def to_dict(self) -> dict:
        out = self.poly.to_dict()
        n = self.dim + 1
        out["coefficients"] = (out["coefficients"] + [0] * n)[:n]
        out["errors"] = list(self.errors)
        out.update(dim=self.dim, parity_enforced=self.parity_enforced, exact=self.is_exact,
                   evaluations=[{"t": t, "value": v, "abs_error": e} for t, v, e in self.evaluations])
        return out


def _require_full(p: Polytope) -> None:
    if not p.is_full_dimensional:
        raise DimensionError("solid-angle sums need a full-dimensional polytope")


def a_eval(p: Polytope, t: int, policy: EnginePolicy = DEFAULT_POLICY) -> Estimate:
    """Sum of the solid angles of tP over its integer points."""
    _require_full(p)
    if t == 0:
        return Estimate(0.0, 0.0)
    if t < 0:
        raise ValueError("t must be nonnegative")
    total, err = 0.0, 0.0
    groups = lattice_point_faces(p, t)
    # fixed summation order keeps the float total reproducible
    for tight in sorted(groups, key=lambda s: (len(s), sorted(s))):
        n = groups[tight]
        ang = face_angle(p, p.face_with_facets(tight), policy)
        total += n * ang.value
        err += n * ang.abs_error
    return Estimate(total, err)


def a_eval_by_faces(p: Polytope, t: int, policy: EnginePolicy = DEFAULT_POLICY) -> Estimate:
    """Same sum regrouped as face angle times relative-interior count."""
    _require_full(p)
    total, err = 0.0, 0.0
    for face in p.faces:
        n = count_relative_interior(p, face, t)
        if n:
            ang = face_angle(p, face, policy)
            total += n * ang.value
            err += n * ang.abs_error
    return Estimate(total, err)


def parity_support(d: int) -> list[int]:
    return [k for k in range(d, 0, -2)]


def _solve_with_bounds(ts: Sequence[int], vals: Sequence[float], errs: Sequence[float],
                       support: Sequence[int]):
    """Solve from the first len(support) points and check the rest.

    Returns coefficients, coefficient bounds and per-extra-point
    (residual, bound) pairs where each bound propagates the input errors
    through the interpolation weights.
    """
    k = len(support)
    v = np.array([[float(t) ** e for e in support] for t in ts[:k]])
    vinv = np.linalg.inv(v)
    head = np.array(vals[:k], dtype=float)
    herr = np.array(errs[:k], dtype=float)
    coef = vinv @ head
    cerr = np.abs(vinv) @ herr
    checks = []
    for t, val, e in zip(ts[k:], vals[k:], errs[k:]):
        row = np.array([float(t) ** ex for ex in support])
        w = row @ vinv
        pred = float(w @ head)
        bound = e + float(np.abs(w) @ herr) + 1e-12 * max(1.0, abs(val))
        checks.append((t, val - pred, bound))
    return coef, cerr, checks


def _recover_exact(coefs: list[float], errs: list[float], d: int, evals) -> tuple | None:
    """Rational coefficients with denominators <= 2 d!, if they reproduce the data."""
    maxden = 2 * factorial(max(d, 1))
    exact = []
    for c, e in zip(coefs, errs):
        r = Fraction(c).limit_denominator(maxden)
        if abs(float(r) - c) > max(e, 1e-9):
            return None
        exact.append(r)
    for t, val, err in evals:
        pred = sum(float(c) * t**k for k, c in enumerate(exact))
        if abs(pred - val) > err + 1e-9:
            return None
    return tuple(exact)


def fit_solid(p: Polytope, policy: EnginePolicy = DEFAULT_POLICY, parity: bool = True):
    """Solid-angle polynomial (lattice P) or quasipolynomial (rational P).

    With ``parity`` only the exponents d, d-2, ... are fitted, from
    t = 1..ceil(d/2); two further evaluations are checked against the
    propagated error bounds.
    """
    _require_full(p)
    d = p.dim
    if p.denominator > 1:
        return _fit_solid_quasi(p, policy)
    support = parity_support(d) if parity else list(range(1, d + 1))
    ts = list(range(1, len(support) + 3))
    ests = [a_eval(p, t, policy) for t in ts]
    vals = [e.value for e in ests]
    errs = [e.abs_error for e in ests]
    coef, cerr, checks = _solve_with_bounds(ts, vals, errs, support)
    bad = [(t, r, b) for t, r, b in checks if abs(r) > b]
    if bad:
        raise EngineAccuracyError(
            f"residuals {bad} exceed their bounds; increase mc_samples or tighten tol")
    coeffs, cerrs = [0.0] * (d + 1), [0.0] * (d + 1)
    for e, c, ce in zip(support, coef, cerr):
        coeffs[e], cerrs[e] = float(c), float(ce)
    evals = tuple(zip(ts, vals, errs))
    exact = _recover_exact(coeffs, cerrs, d, evals)
    poly = Polynomial(tuple(coeffs), exact or (), tuple(cerrs),
                      residuals=tuple(r for _, r, _ in checks))
    return SolidPolynomial(poly, d, parity, evals)


def _residue_ts(r: int, period: int, n: int) -> list[int]:
    return [r + period * j for j in range(n)] if r else [period * j for j in range(1, n + 1)]


def fit_solid_constituents(p: Polytope, policy: EnginePolicy = DEFAULT_POLICY) -> QuasiPolynomial:
    """One full-degree fit per residue class mod the vertex denominator (uncollapsed)."""
    _require_full(p)
    d = p.dim
    period = p.denominator
    support = list(range(d + 1))
    constituents = []
    for r in range(period):
        ts = _residue_ts(r, period, d + 3)
        for t in ts:
            _check_t(p, t, period)
        ests = [a_eval(p, t, policy) for t in ts]
        vals = [e.value for e in ests]
        errs = [e.abs_error for e in ests]
        coef, cerr, checks = _solve_with_bounds(ts, vals, errs, support)
        bad = [(t, res, b) for t, res, b in checks if abs(res) > b]
        if bad:
            raise EngineAccuracyError(f"residue {r}: residuals {bad} exceed their bounds")
        constituents.append(Polynomial(tuple(float(c) for c in coef), (),
                                       tuple(float(e) for e in cerr),
                                       residuals=tuple(res for _, res, _ in checks)))
    return QuasiPolynomial(period, tuple(constituents))


def _fit_solid_quasi(p: Polytope, policy: EnginePolicy, tol: float = 1e-9) -> QuasiPolynomial:
    return fit_solid_constituents(p, policy).collapse(tol)


def numerator(p: Polytope, policy: EnginePolicy = DEFAULT_POLICY) -> NumeratorVector:
    """Numerator of sum_t A_P(t) z^t over (1 - z)^(d+1), from A(0) = 0 and A(1..d)."""
    _require_full(p)
    if not p.is_lattice:
        raise ValueError("numerator needs a lattice polytope")
    ests = [Estimate(0.0, 0.0)] + [a_eval(p, t, policy) for t in range(1, p.dim + 1)]
    return binomial_transform([e.value for e in ests], [e.abs_error for e in ests])


def numerator_checks(vec: NumeratorVector, zero_tol: float = 1e-9,
                     palindrome_tol: float = 1e-8) -> dict:
    """Zero constant term, positive entries and palindromy, within error bounds."""
    a, e = vec.entries, vec.errors
    d = len(a) - 1
    violations = []
    if abs(a[0]) > zero_tol + e[0]:
        violations.append(f"a_0 = {a[0]} is not zero")
    for j in range(1, d + 1):
        if not a[j] > 0:
            violations.append(f"a_{j} = {a[j]} is not positive")
        k = d + 1 - j
        if abs(a[j] - a[k]) > e[j] + e[k] + palindrome_tol:
            violations.append(f"a_{j} = {a[j]} differs from a_{k} = {a[k]}")
    return {"check": "solid-numerator", "numerator": vec.to_dict(),
            "violations": violations, "ok": not violations}


def is_unimodal(entries: Sequence[float], tol: float = 0.0) -> bool:
    """Weakly rises then weakly falls (ignoring the zero constant term)."""
    xs = list(entries)
    while xs and xs[0] == 0:
        xs.pop(0)
    i = 0
    while i + 1 < len(xs) and xs[i + 1] >= xs[i] - tol:
        i += 1
    while i + 1 < len(xs) and xs[i + 1] <= xs[i] + tol:
        i += 1
    return i == len(xs) - 1


def vertex_sum(p: Polytope, policy: EnginePolicy = DEFAULT_POLICY) -> Estimate:
    _require_full(p)
    total, err = 0.0, 0.0
    for face in p.faces:
        if face.dim == 0:
            a = face_angle(p, face, policy)
            total += a.value
            err += a.abs_error
    return Estimate(total, err)


def unimodality_report(p: Polytope, policy: EnginePolicy = DEFAULT_POLICY) -> dict:
    if p.dim != 3 or not p.is_lattice:
        raise ValueError("unimodality criterion is implemented for 3-dimensional lattice polytopes")
    sp = fit_solid(p, policy)
    vol, c = sp.coeffs[3], sp.coeffs[1]
    pattern = [0.0, vol + c, 4 * vol - 2 * c, vol + c]
    vec = numerator(p, policy)
    out = {
        "volume": vol,
        "linear_coefficient": c,
        "pattern": pattern,
        "numerator": vec.to_dict(),
        "unimodal": c <= vol,
        "numerator_unimodal": is_unimodal(vec.entries),
    }
    if p.is_simplex and count_lattice_points(p, 1) == 4:
        # A(t) = vol t^3 + (S - vol) t, numerator (0, S, 6 vol - 2S, S):
        # unimodal iff S <= 2 vol, which is 1/3 for unimodular simplices
        s = vertex_sum(p, policy)
        threshold = float(2 * p.volume())
        out["vertex_sum"] = s.to_dict()
        out["vertex_sum_threshold"] = threshold
        out["vertex_sum_unimodal"] = s.value <= threshold
    return out


def brianchon_gram_sum(p: Polytope, policy: EnginePolicy = DEFAULT_POLICY) -> Estimate:
    _require_full(p)
    total, err = 0.0, 0.0
    for face in p.faces:
        a = face_angle(p, face, policy)
        total += (-1) ** face.dim * a.value
        err += a.abs_error
    return Estimate(total, err)


def brianchon_gram_residual(p: Polytope, policy: EnginePolicy = DEFAULT_POLICY) -> float:
    """|alternating sum of face angles|, zero up to engine error."""
    return abs(brianchon_gram_sum(p, policy).value)


# ---------------------------------------------------------------------------
# periods


def _integer_solvable(a: list[list[int]], c: list[int]) -> bool:
    """Does a x = c have an integer solution (a has full row rank)?

    Column operations bring ``a`` to lower-triangular Hermite shape; the
    system is then solved by forward substitution.
    """
    a = [row[:] for row in a]
    r = len(a)
    ncols = len(a[0]) if r else 0
    for i in range(r):
        for j in range(i + 1, ncols):
            while a[i][j] != 0:
                q = a[i][i] // a[i][j]
                for row in a:
                    row[i] -= q * row[j]
                for row in a:
                    row[i], row[j] = row[j], row[i]
        if a[i][i] == 0:
            # row is dependent on the earlier ones within these columns
            for j in range(i + 1, ncols):
                if a[i][j] != 0:
                    break
            else:
                raise ValueError("matrix does not have full row rank")
    y = []
    for i in range(r):
        rest = c[i] - sum(a[i][k] * y[k] for k in range(i))
        if rest % a[i][i]:
            return False
        y.append(rest // a[i][i])
    return True


def face_index(p: Polytope, face: Face) -> int:
    """Smallest q >= 1 such that the affine span of q*face holds an integer point."""
    rows, offs = [], []
    for j in sorted(face.facets):
        h = p.facets[j]
        cand = rows + [list(h.normal)]
        if rank(cand) > len(rows):
            rows.append(list(h.normal))
            offs.append(h.offset)
    if not rows:
        return 1
    den = p.denominator
    for q in range(1, den + 1):
        c = [q * o for o in offs]
        if any(x.denominator != 1 for x in c):
            continue
        if _integer_solvable(rows, [int(x) for x in c]):
            return q
    return den


def j_index(p: Polytope, j: int) -> int:
    return lcm(1, *(face_index(p, f) for f in p.faces if f.dim == j))


def one_dim_collapse_predicted(a, b) -> bool:
    """Criterion for A_[a,b] to be a polynomial."""
    a, b = Fraction(a), Fraction(b)
    isint = lambda x: x.denominator == 1  # noqa: E731
    return ((isint(a) and isint(2 * b)) or (isint(2 * a) and isint(b)) or isint(b - a))


def period_report(p: Polytope, policy: EnginePolicy = DEFAULT_POLICY, tol: float = 1e-9) -> dict:
    """Observed coefficient periods of the solid-angle quasipolynomial.

    Each observed period is checked to divide the matching j-index.
    """
    _require_full(p)
    if p.dim > 3:
        raise SizeError("period reports are limited to dimension <= 3")
    if p.denominator > 6:
        raise SizeError("period reports are limited to vertex denominators <= 6")
    q = fit_solid_constituents(p, policy)
    d = p.dim
    rows = []
    for j in range(d + 1):
        obs = q.coefficient_period(j, tol)
        pj = j_index(p, j)
        rows.append({"degree": j, "observed_period": obs, "j_index": pj,
                     "divides": pj % obs == 0,
                     "values": [c.coeff(j) for c in q.constituents]})
    collapsed = q.collapse(tol)
    out = {"declared_period": q.period, "collapsed_period": collapsed.period,
           "collapses": collapsed.period == 1, "coefficients": rows,
           "quasipolynomial": collapsed.to_dict(),
           "ok": all(r["divides"] for r in rows)}
    if d == 1:
        a, b = p.vertices[0][0], p.vertices[1][0]
        out["predicted_collapse"] = one_dim_collapse_predicted(a, b)
        out["ok"] = out["ok"] and out["predicted_collapse"] == out["collapses"]
    return out
