"""Translation-invariant nonnegative valuations and their numerators.

Two built-ins are provided: the solid angle and the lattice indicator.
Numerators of sum_t N_P(t) z^t come either from direct evaluation of
N_P(0..d) or, for a lattice simplex, from the lattice points of the
fundamental parallelepiped of the cone over it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import ceil, floor
from typing import Sequence

from .angle import DEFAULT_POLICY, EnginePolicy, solid_angle
from .ehrhart import NumeratorVector, binomial_transform
from .polytope import DimensionError, Polytope, count_lattice_points, lattice_points
from .rational_linalg import det, solve, transpose, vector
from .solidpoly import a_eval


class ValuationError(ValueError):
    pass


class Valuation:
    """A nonnegative translation-invariant valuation nu(K, x).

    ``point_value`` is nu on a 0-dimensional polytope at its own point and
    ``parallelepiped_mode`` says whether the parallelepiped construction
    uses half-open membership or closed height slices.
    """

    name: str = "valuation"
    exact: bool = False
    point_value = 0
    parallelepiped_mode = "closed_slice"

    def __call__(self, k: Polytope, x: Sequence):
        raise NotImplementedError

    def total(self, p: Polytope, t: int):
        """N_P(t) = sum over integer x of nu(tP, x); returns (value, error)."""
        if t == 0:
            return self.point_value, 0.0
        tp = p.scaled(t)
        return sum(self(tp, x) for x in lattice_points(p, t)), 0.0

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class IndicatorValuation(Valuation):
    name = "indicator"
    exact = True
    point_value = 1
    parallelepiped_mode = "half_open"

    def __call__(self, k: Polytope, x: Sequence) -> int:
        x = vector(x)
        return int(all(v.denominator == 1 for v in x) and k.contains(x))

    def total(self, p: Polytope, t: int):
        if t == 0:
            return 1, 0.0
        return count_lattice_points(p, t), 0.0


@dataclass
class SolidAngleValuation(Valuation):
    policy: EnginePolicy = field(default_factory=lambda: DEFAULT_POLICY)

    name = "solid"
    exact = False
    point_value = 0
    parallelepiped_mode = "closed_slice"

    def __call__(self, k: Polytope, x: Sequence) -> float:
        if not k.is_full_dimensional:
            return 0.0
        return solid_angle(k, x, self.policy).value

    def total(self, p: Polytope, t: int):
        est = a_eval(p, t, self.policy)
        return est.value, est.abs_error


BUILTINS = {"indicator": IndicatorValuation, "solid": SolidAngleValuation}


def get_valuation(name: str, policy: EnginePolicy = DEFAULT_POLICY) -> Valuation:
    if name in ("indicator", "count", "lattice"):
        return IndicatorValuation()
    if name in ("solid", "solid-angle", "angle"):
        return SolidAngleValuation(policy)
    raise ValuationError(f"unknown valuation {name!r}; built-ins are 'solid' and 'indicator'")


def n_eval(p: Polytope, t: int, v: Valuation):
    """N_P(t) for valuation ``v``; solid angles return a float, counts an int."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return v.total(p, t)[0]


def g_numerator(p: Polytope, v: Valuation) -> NumeratorVector:
    """Numerator of sum_t N_P(t) z^t over (1 - z)^(d+1)."""
    if not p.is_lattice:
        raise ValueError("numerators need a lattice polytope")
    vals, errs = zip(*(v.total(p, t) for t in range(p.dim + 1)))
    return binomial_transform(list(vals), list(errs))


def nonnegativity_check(vec: NumeratorVector) -> dict:
    bad = [j for j, (a, e) in enumerate(zip(vec.entries, vec.errors)) if a < -e - 1e-12]
    return {"check": "numerator-nonnegative", "numerator": vec.to_dict(),
            "violations": [f"a_{j} = {vec.entries[j]} < 0" for j in bad], "ok": not bad}


def contains_polytope(q: Polytope, p: Polytope) -> bool:
    return all(q.contains(v) for v in p.vertices)


def monotonicity_compare(p: Polytope, q: Polytope, v: Valuation, tol: float = 1e-9) -> dict:
    """Entrywise a_i <= b_i for nested lattice polytopes P inside Q."""
    if p.dim_ambient != q.dim_ambient:
        raise DimensionError("polytopes live in different dimensions")
    if not contains_polytope(q, p):
        raise ValueError("P is not contained in Q")
    a, b = g_numerator(p, v), g_numerator(q, v)
    rows, bad = [], []
    for i, (x, y, ex, ey) in enumerate(zip(a.entries, b.entries, a.errors, b.errors)):
        ok = x <= y + ex + ey + (0 if v.exact else tol)
        rows.append({"i": i, "a": float(x), "b": float(y), "ok": ok})
        if not ok:
            bad.append(i)
    return {"check": "monotonicity", "valuation": v.name, "P": a.to_dict(), "Q": b.to_dict(),
            "rows": rows, "violations": bad, "ok": not bad}


@dataclass(frozen=True)
class ConeOver:
    """Cone over a lattice simplex: generators (v_i, 1) in one dimension up."""

    base: Polytope

    @property
    def generators(self) -> list[tuple[Fraction, ...]]:
        return [tuple(v) + (Fraction(1),) for v in self.base.vertices]


@dataclass(frozen=True)
class HalfOpenParallelepiped:
    """{sum lambda_i w_i : 0 <= lambda_i < 1} for linearly independent w_i."""

    edges: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def of_simplex(cls, s: Polytope) -> "HalfOpenParallelepiped":
        if not (s.is_full_dimensional and s.is_simplex):
            raise DimensionError("parallelepiped needs a full-dimensional simplex")
        return cls(tuple(ConeOver(s).generators))

    @property
    def volume(self) -> Fraction:
        return abs(det(self.edges))

    def coordinates(self, x: Sequence) -> tuple[Fraction, ...]:
        return solve(transpose(self.edges), vector(x))

    def lattice_points(self) -> list[tuple[int, ...]]:
        """Integer points with every coordinate lambda_i in [0, 1)."""
        n = len(self.edges)
        lo = [floor(sum(min(Fraction(0), w[i]) for w in self.edges)) for i in range(n)]
        hi = [ceil(sum(max(Fraction(0), w[i]) for w in self.edges)) for i in range(n)]
        m = transpose(self.edges)
        out = []
        for x in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
            lam = solve(m, x)
            if all(0 <= c < 1 for c in lam):
                out.append(tuple(x))
        return out


def height_slice(s: Polytope, k: int) -> Polytope:
    """Height-k slice of the closed parallelepiped, as a polytope in R^d.

    It is the image of the hypersimplex {lambda in [0,1]^(d+1), sum = k},
    whose vertices are the 0/1 vectors with k ones.
    """
    verts = [tuple(sum(s.vertices[i][c] for i in sub) for c in range(s.dim_ambient))
             for sub in combinations(range(len(s.vertices)), k)]
    return Polytope(verts, allow_lower_dim=True)


def parallelepiped_numerator(s: Polytope, v: Valuation) -> NumeratorVector:
    """Numerator entries as valuation sums over the parallelepiped by height."""
    if not (s.is_full_dimensional and s.is_simplex and s.is_lattice):
        raise DimensionError("expected a full-dimensional lattice simplex")
    d = s.dim
    if v.parallelepiped_mode == "half_open":
        counts = [0] * (d + 1)
        for x in HalfOpenParallelepiped.of_simplex(s).lattice_points():
            counts[x[-1]] += 1
        return NumeratorVector(tuple(counts), (0.0,) * (d + 1))
    entries, errs = [0.0], [0.0]
    for k in range(1, d + 1):
        sl = height_slice(s, k)
        value, err = v.total(sl, 1)
        entries.append(value)
        errs.append(err)
    return NumeratorVector(tuple(entries), tuple(errs))


def translation_spot_check(v: Valuation, k: Polytope, x: Sequence, y: Sequence) -> bool:
    """nu(K + y, x + y) == nu(K, x) for an integer shift y."""
    x, y = vector(x), vector(y)
    lhs = v(k.translated(y), tuple(a + b for a, b in zip(x, y)))
    rhs = v(k, x)
    return abs(lhs - rhs) <= 1e-12
