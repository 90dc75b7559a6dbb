"""Exact rational scalars, matrices and small polynomial fits.

Every geometric predicate in the package runs through these helpers, so
they work on :class:`fractions.Fraction` throughout. Matrices are plain
row lists; nothing here allocates numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from numbers import Rational as _RationalABC
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction
RVector = tuple[Fraction, ...]
RMatrix = list[list[Fraction]]


class ShapeError(ValueError):
    pass


class SingularMatrixError(ArithmeticError):
    pass


class ArityError(ValueError):
    """Raised when a fit has fewer data points than unknowns."""


def to_rational(x) -> Fraction:
    """Parse ints, Fractions, exact floats and ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, _RationalABC):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        f = Fraction(float(x))
        # only accept floats that are short decimals, e.g. 0.5
        g = f.limit_denominator(10**6)
        if float(g) != float(x):
            raise ValueError(f"float {x!r} is not a short rational; pass a string 'p/q'")
        return g
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


def vector(xs: Iterable) -> RVector:
    return tuple(to_rational(x) for x in xs)


def matrix(rows: Iterable[Iterable]) -> RMatrix:
    m = [list(vector(r)) for r in rows]
    if m and any(len(r) != len(m[0]) for r in m):
        raise ShapeError("ragged matrix")
    return m


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def sub(u, v) -> RVector:
    return tuple(a - b for a, b in zip(u, v))


def add(u, v) -> RVector:
    return tuple(a + b for a, b in zip(u, v))


def scale(c, u) -> RVector:
    return tuple(c * a for a in u)


def transpose(m: Sequence[Sequence]) -> RMatrix:
    return [list(col) for col in zip(*m)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> RMatrix:
    if a and len(a[0]) != len(b):
        raise ShapeError(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x?")
    bt = transpose(b)
    return [[dot(row, col) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> RVector:
    return tuple(dot(row, v) for row in a)


def identity(n: int) -> RMatrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _bareiss(rows: list[list[int]]) -> int:
    """Integer determinant by fraction-free elimination."""
    a = [r[:] for r in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant.

    Rows are scaled to integers first so the elimination itself never
    leaves the integers.
    """
    n = len(m)
    if any(len(r) != n for r in m):
        raise ShapeError("determinant needs a square matrix")
    if n == 0:
        return Fraction(1)
    rows, scale_ = [], 1
    for r in m:
        r = [to_rational(x) for x in r]
        den = lcm(*(x.denominator for x in r))
        rows.append([int(x * den) for x in r])
        scale_ *= den
    return Fraction(_bareiss(rows), scale_)


def row_reduce(m: Sequence[Sequence]) -> tuple[RMatrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = [[to_rational(x) for x in r] for r in m]
    if not a:
        return a, []
    nrows, ncols = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def rank(m: Sequence[Sequence]) -> int:
    if not m:
        return 0
    return len(row_reduce(m)[1])


def nullspace(m: Sequence[Sequence], ncols: int | None = None) -> list[RVector]:
    """Basis of {x : m x = 0}."""
    if not m:
        if ncols is None:
            raise ShapeError("empty matrix needs an explicit column count")
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    red, pivots = row_reduce(m)
    n = len(red[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            x[pc] = -row[f]
        basis.append(tuple(x))
    return basis


def solve(m: Sequence[Sequence], rhs: Sequence) -> RVector:
    """Exact solution of a square nonsingular system."""
    n = len(m)
    if any(len(r) != n for r in m) or len(rhs) != n:
        raise ShapeError("solve needs a square matrix and matching right-hand side")
    aug = [list(r) + [b] for r, b in zip(m, rhs)]
    red, pivots = row_reduce(aug)
    if pivots[:n] != list(range(n)) or len(pivots) > n:
        raise SingularMatrixError("matrix is singular")
    return tuple(red[i][n] for i in range(n))


def inverse(m: Sequence[Sequence]) -> RMatrix:
    n = len(m)
    cols = [solve(m, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
    return transpose(cols)


def primitive_integer(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a nonzero rational vector to coprime integers (same direction)."""
    v = [to_rational(x) for x in v]
    den = lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    g = gcd(*ints)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(i // g for i in ints)


@dataclass(frozen=True)
class Polynomial:
    """Coefficients indexed by degree, with optional exact values.

    ``errors`` holds an absolute bound per coefficient (zero when the
    coefficient is exact) and ``residuals`` the misfit on any evaluation
    points not used to solve for the coefficients.
    """

    coeffs: tuple[float, ...]
    exact: tuple[Fraction | None, ...] = ()
    errors: tuple[float, ...] = ()
    residuals: tuple = field(default=(), compare=False)

    def __post_init__(self):
        coeffs = list(self.coeffs)
        exact = list(self.exact) if self.exact else [None] * len(coeffs)
        errors = list(self.errors) if self.errors else [0.0] * len(coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0 and (exact[-1] is None or exact[-1] == 0):
            coeffs.pop(), exact.pop(), errors.pop()
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs))
        object.__setattr__(self, "exact", tuple(exact))
        object.__setattr__(self, "errors", tuple(float(e) for e in errors))

    @classmethod
    def from_exact(cls, coeffs: Sequence, residuals=()) -> "Polynomial":
        cs = [to_rational(c) for c in coeffs]
        return cls(tuple(float(c) for c in cs), tuple(cs), residuals=tuple(residuals))

    @property
    def is_exact(self) -> bool:
        return all(e is not None for e in self.exact)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def exact_coeffs(self) -> tuple[Fraction, ...]:
        if not self.is_exact:
            raise ValueError("polynomial has float-only coefficients")
        return self.exact

    def __call__(self, t):
        if self.is_exact and isinstance(t, (int, Fraction)):
            return sum((c * Fraction(t) ** k for k, c in enumerate(self.exact)), Fraction(0))
        return sum(c * t**k for k, c in enumerate(self.coeffs))

    def coeff(self, k: int):
        if k >= len(self.coeffs):
            return Fraction(0) if self.is_exact else 0.0
        return self.exact[k] if self.is_exact else self.coeffs[k]

    def to_dict(self) -> dict:
        out = {"coefficients": [format_rational(c) if c is not None else v
                                for c, v in zip(self.exact, self.coeffs)],
               "errors": list(self.errors)}
        if self.residuals:
            out["residuals"] = [format_rational(r) if isinstance(r, Fraction) else float(r)
                                for r in self.residuals]
        return out


def fit_polynomial(points: Sequence[tuple[int, object]], degree_support: Iterable[int]) -> Polynomial:
    """Fit a polynomial whose nonzero coefficients sit on ``degree_support``.

    The first ``len(support)`` points determine the coefficients; any
    remaining points are reported as residuals. Exact (int/Fraction) values
    keep the whole computation rational.
    """
    support = sorted(set(degree_support))
    if not support:
        raise ArityError("empty degree support")
    if len(points) < len(support):
        raise ArityError(f"{len(points)} points cannot determine {len(support)} coefficients")
    ts = [t for t, _ in points]
    if len(set(ts)) != len(ts):
        raise ValueError("evaluation points must be distinct")
    k = len(support)
    head, tail = points[:k], points[k:]
    exact = all(isinstance(v, (int, Fraction, np.integer)) for _, v in points)
    size = support[-1] + 1
    if exact:
        a = [[Fraction(t) ** e for e in support] for t, _ in head]
        sol = solve(a, [to_rational(v) for _, v in head])
        cs = [Fraction(0)] * size
        for e, c in zip(support, sol):
            cs[e] = c
        poly = Polynomial.from_exact(cs)
        res = tuple(to_rational(v) - poly(Fraction(t)) for t, v in tail)
        return Polynomial.from_exact(cs, residuals=res)
    a = np.array([[float(t) ** e for e in support] for t, _ in head])
    try:
        sol = np.linalg.solve(a, np.array([float(v) for _, v in head]))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    cs = [0.0] * size
    for e, c in zip(support, sol):
        cs[e] = float(c)
    poly = Polynomial(tuple(cs))
    res = tuple(float(v) - poly(float(t)) for t, v in tail)
    return Polynomial(tuple(cs), residuals=res)


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    return lcm(1, *(to_rational(v).denominator for v in values))
