"""Lattice-point counts, Ehrhart (quasi)polynomials, reciprocity and h*."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from .polytope import (
    Face,
    Polytope,
    SizeError,
    count_lattice_points,
    count_relative_interior as _count_relint,
)
from .rational_linalg import Polynomial, fit_polynomial


class InternalConsistencyError(RuntimeError):
    """A fit disagreed with an extra evaluation; the enumeration is wrong."""


class TheoremViolation(RuntimeError):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


@dataclass(frozen=True)
class NumeratorVector:
    """Coefficients a_0..a_d of a series numerator over (1 - z)^(d+1)."""

    entries: tuple
    errors: tuple[float, ...]

    @property
    def denominator_exponent(self) -> int:
        return len(self.entries)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(a, (int, Fraction)) for a in self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        return {"entries": [str(a) if isinstance(a, Fraction) else a for a in self.entries],
                "errors": list(self.errors),
                "denominator_exponent": self.denominator_exponent}


def binomial_transform(values: Sequence, errors: Sequence[float] | None = None) -> NumeratorVector:
    """Numerator of sum_t f(t) z^t from f(0..d) when f has degree <= d.

    a_k = sum_j (-1)^j C(d+1, j) f(k - j).
    """
    d = len(values) - 1
    errors = list(errors) if errors is not None else [0.0] * (d + 1)
    entries, errs = [], []
    for k in range(d + 1):
        entries.append(sum(((-1) ** j * comb(d + 1, j) * values[k - j] for j in range(k + 1)),
                           type(values[0])(0)))
        errs.append(float(sum(comb(d + 1, j) * errors[k - j] for j in range(k + 1))))
    return NumeratorVector(tuple(entries), tuple(errs))


@dataclass(frozen=True)
class QuasiPolynomial:
    """Constituent polynomials indexed by t mod period."""

    period: int
    constituents: tuple[Polynomial, ...]

    def __call__(self, t):
        return self.constituents[t % self.period](t)

    @property
    def is_polynomial(self) -> bool:
        return self.period == 1

    def coefficient_period(self, k: int, tol: float = 0.0) -> int:
        """Smallest q dividing the period with c_k(t) = c_k(t mod q)."""
        for q in range(1, self.period + 1):
            if self.period % q:
                continue
            if all(_close(self.constituents[r].coeff(k), self.constituents[r % q].coeff(k), tol)
                   for r in range(self.period)):
                return q
        return self.period

    def collapse(self, tol: float = 0.0) -> "QuasiPolynomial":
        """Reduce to the minimal period under which the constituents repeat."""
        for q in range(1, self.period + 1):
            if self.period % q:
                continue
            if all(_same_poly(self.constituents[r], self.constituents[r % q], tol)
                   for r in range(self.period)):
                return QuasiPolynomial(q, self.constituents[:q])
        return self

    def to_dict(self) -> dict:
        return {"period": self.period, "constituents": [c.to_dict() for c in self.constituents]}


def _close(a, b, tol: float) -> bool:
    if tol == 0 and isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= tol


def _same_poly(p: Polynomial, q: Polynomial, tol: float) -> bool:
    n = max(len(p.coeffs), len(q.coeffs))
    return all(_close(p.coeff(k), q.coeff(k), tol) for k in range(n))


def _check_t(p: Polytope, t: int, period: int = 1) -> None:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t > 2 * (p.dim + 1) * period:
        raise SizeError(f"t = {t} exceeds the evaluation cap 2(d+1)p = {2 * (p.dim + 1) * period}")


def count(p: Polytope, t: int) -> int:
    """Number of integer points in tP."""
    if t < 1:
        raise ValueError("t must be a positive integer")
    return count_lattice_points(p, t)


def count_relative_interior(p: Polytope, face: Face, t: int) -> int:
    if t < 1:
        raise ValueError("t must be a positive integer")
    return _count_relint(p, face, t)


def fit_ehrhart(p: Polytope) -> QuasiPolynomial:
    """Ehrhart polynomial (period 1) or quasipolynomial with collapsed period.

    Lattice polytopes use L(0) = 1 plus d evaluations and two checks;
    rational ones fit each residue class mod the vertex denominator from
    d + 3 positive evaluations.
    """
    d = p.dim
    period = p.denominator
    if period == 1:
        pts = [(0, 1)] + [(t, count_lattice_points(p, t)) for t in range(1, d + 3)]
        poly = fit_polynomial(pts, range(d + 1))
        if any(r != 0 for r in poly.residuals):
            raise InternalConsistencyError(f"Ehrhart fit residuals {poly.residuals}")
        return QuasiPolynomial(1, (poly,))
    constituents = []
    for r in range(period):
        ts = [r + period * j for j in range(d + 3)] if r else [period * j for j in range(1, d + 4)]
        for t in ts:
            _check_t(p, t, period)
        poly = fit_polynomial([(t, count_lattice_points(p, t)) for t in ts], range(d + 1))
        if any(x != 0 for x in poly.residuals):
            raise InternalConsistencyError(f"residue {r}: fit residuals {poly.residuals}")
        constituents.append(poly)
    return QuasiPolynomial(period, tuple(constituents)).collapse()


def ehrhart_polynomial(p: Polytope) -> Polynomial:
    q = fit_ehrhart(p)
    if not q.is_polynomial:
        raise ValueError(f"counting function has period {q.period}")
    return q.constituents[0]


def reciprocity_check(p: Polytope, ts: Sequence[int] = (1, 2, 3)) -> dict:
    """Compare L(-t) with (-1)^d times the interior count, exactly."""
    if not p.is_lattice:
        raise ValueError("reciprocity check needs a lattice polytope")
    poly = ehrhart_polynomial(p)
    d = p.dim
    rows = []
    for t in ts:
        lhs = poly(Fraction(-t))
        inner = count_relative_interior(p, p.top_face, t)
        rows.append({"t": t, "L(-t)": str(lhs), "interior": inner,
                     "ok": lhs == (-1) ** d * inner})
    return {"check": "ehrhart-reciprocity", "rows": rows, "ok": all(r["ok"] for r in rows)}


def hstar(p: Polytope) -> NumeratorVector:
    """h*-vector via the binomial transform of L(0..d)."""
    if not p.is_lattice:
        raise ValueError("h* is defined here for lattice polytopes")
    values = [1] + [count_lattice_points(p, t) for t in range(1, p.dim + 1)]
    vec = binomial_transform(values)
    if any(a < 0 for a in vec.entries):
        raise TheoremViolation(f"negative h* entry {vec.entries}", {"entries": list(vec.entries)})
    return vec
