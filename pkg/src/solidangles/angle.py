"""Normalized solid angles of pointed cones and of points in polytopes.

Angles are fractions of the full sphere, so a halfspace has angle 1/2.
Three engines are provided: closed forms up to dimension 3 (arc length and
Girard's spherical excess), the Aomoto hypergeometric series for simplicial
cones, and seeded Monte Carlo sampling.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

from .polytope import (
    Face,
    LinealityError,
    Polytope,
    PointedCone,
    face_cone,
    triangulate_cone,
)
from .rational_linalg import det as rdet, to_rational, vector

EXACT_BOOKKEEPING = 1e-12
CLAMP_TOL = 1e-12
MC_BLOCK = 1 << 16


class DegeneracyError(ValueError):
    pass


class AomotoDivergence(ArithmeticError):
    """The series did not settle; callers should fall back to sampling."""


@dataclass(frozen=True)
class AngleValue:
    value: float
    method: str
    abs_error: float = 0.0
    n: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if not (-1e-12 <= self.value <= 1 + 1e-12):
            raise ValueError(f"angle {self.value} outside [0, 1]")
        if self.abs_error < 0:
            raise ValueError("negative error bound")

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class EnginePolicy:
    """Engine choice for cones of dimension 4 and up.

    Lower dimensions always use closed forms. ``exact`` (the default) and
    ``aomoto`` both run the series and fall back to Monte Carlo when it does
    not settle; ``mc`` samples directly.
    """

    mode: str = "exact"
    mc_samples: int = 1_000_000
    seed: int = 0
    tol: float = 1e-10
    max_total_order: int = 60
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("exact", "aomoto", "mc"):
            raise ValueError(f"unknown engine policy {self.mode!r}")

    @classmethod
    def from_env(cls, **overrides) -> "EnginePolicy":
        mode = os.environ.get("SOLIDANGLES_POLICY", "exact")
        return cls(mode=overrides.pop("mode", None) or mode, **overrides)


DEFAULT_POLICY = EnginePolicy()


def _clamp(x: float) -> float:
    if x > 1 + CLAMP_TOL or x < -1 - CLAMP_TOL:
        raise ValueError(f"cosine {x} outside [-1, 1]")
    return min(1.0, max(-1.0, x))


# ---------------------------------------------------------------------------
# closed forms


def planar_angle(c: PointedCone) -> AngleValue:
    """Angle of a two-dimensional cone as a fraction of the full turn."""
    if c.dim != 2:
        raise DegeneracyError(f"planar angle needs a 2-dimensional cone, got {c.dim}")
    if c.lineality_dim == 1 and len(c.halfspaces) == 1:
        return AngleValue(0.5, "exact")
    if not c.is_pointed:
        raise LinealityError("cone contains a line")
    gens, _ = c.coordinates()
    a, b = gens[0], gens[-1]
    theta = math.atan2(abs(a[0] * b[1] - a[1] * b[0]), float(a @ b))
    return AngleValue(theta / (2 * math.pi), "exact", EXACT_BOOKKEEPING)


def _spherical_corner(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    x, y = np.cross(a, b), np.cross(a, c)
    return math.acos(_clamp(float(x @ y) / (np.linalg.norm(x) * np.linalg.norm(y))))


def girard_angle(v1: Sequence, v2: Sequence, v3: Sequence) -> AngleValue:
    """Solid angle of the simplicial cone spanned by three vectors in R^3.

    The spherical triangle cut out on the unit sphere has area equal to its
    angle sum minus pi; each corner angle is the angle between the two
    planes through that generator.
    """
    if all(isinstance(x, (int, Fraction)) for v in (v1, v2, v3) for x in v):
        if rdet([vector(v) for v in (v1, v2, v3)]) == 0:
            raise DegeneracyError("generators are linearly dependent")
    else:
        m = np.array([v1, v2, v3], dtype=float)
        scale = np.prod(np.linalg.norm(m, axis=1))
        if scale == 0 or abs(np.linalg.det(m)) <= 1e-12 * scale:
            raise DegeneracyError("generators are linearly dependent")
    a, b, c = (np.asarray([float(x) for x in v]) for v in (v1, v2, v3))
    excess = (_spherical_corner(a, b, c) + _spherical_corner(b, a, c)
              + _spherical_corner(c, a, b) - math.pi)
    return AngleValue(max(0.0, excess / (4 * math.pi)), "exact", EXACT_BOOKKEEPING)


def cone_angle_3d(c: PointedCone) -> AngleValue:
    """Girard's formula summed over a fan triangulation of a pointed 3-cone."""
    if c.dim != 3:
        raise DegeneracyError(f"expected a 3-dimensional cone, got {c.dim}")
    if not c.is_pointed:
        raise LinealityError("cone contains a line")
    tri = triangulate_cone(c)
    # exact generators when no projection is needed
    coords = c.generators if c.ambient == 3 else list(c.coordinates()[0])
    total = 0.0
    for s in tri.simplices:
        total += girard_angle(*(coords[i] for i in s)).value
    return AngleValue(total, "exact", EXACT_BOOKKEEPING * len(tri.simplices))


# ---------------------------------------------------------------------------
# Aomoto series


@dataclass(frozen=True)
class AomotoInput:
    """Gram data of a spherical simplex given by unit inward normals.

    ``gram`` holds <n_i, n_j>, ``minors`` the determinants of the principal
    minors with row/column k removed, ``k_diag`` their ratios to det(gram),
    and ``b`` the Gram-like matrix the series is built on.
    """

    normals: np.ndarray
    gram: np.ndarray = field(repr=False)
    minors: np.ndarray = field(repr=False)
    k_diag: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    k_power: float = 0.5

    @classmethod
    def from_normals(cls, normals, k_power: float = 0.5) -> "AomotoInput":
        """Build the matrices; ``k_power=1`` reproduces the literal K^-1 G^-1 K^-1.

        With ``k_power=0.5`` the matrix B is the Gram matrix of the unit
        generators, i.e. B = K^-1/2 G^-1 K^-1/2.
        """
        n = np.asarray(normals, dtype=float)
        n = n / np.linalg.norm(n, axis=1, keepdims=True)
        d = len(n)
        if np.linalg.matrix_rank(n) < d:
            raise DegeneracyError("normals are linearly dependent")
        g = n @ n.T
        gdet = np.linalg.det(g)
        minors = np.array([np.linalg.det(np.delete(np.delete(g, k, 0), k, 1)) if d > 1 else 1.0
                           for k in range(d)])
        kd = minors / gdet
        kinv = np.diag(kd ** -k_power)
        b = kinv @ np.linalg.inv(g) @ kinv
        b = (b + b.T) / 2
        return cls(n, g, minors, kd, b, k_power)

    @classmethod
    def from_cone(cls, c: PointedCone, k_power: float = 0.5) -> "AomotoInput":
        if not c.is_simplicial:
            raise DegeneracyError("the series needs a simplicial cone")
        _, normals = c.coordinates()
        return cls.from_normals(normals, k_power)

    @property
    def dim(self) -> int:
        return len(self.normals)

    def dihedral_cosines(self) -> np.ndarray:
        return -self.gram


@lru_cache(maxsize=None)
def _half_gamma_logs(n: int) -> np.ndarray:
    """log Gamma(j/2) for j = 1..n via the half-integer recurrence."""
    out = np.empty(n + 1)
    out[0] = np.inf
    out[1] = 0.5 * math.log(math.pi)
    if n >= 2:
        out[2] = 0.0
    for j in range(3, n + 1):
        out[j] = out[j - 2] + math.log((j - 2) / 2)
    return out


@lru_cache(maxsize=None)
def _log_factorials(n: int) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, n + 1)))])


@lru_cache(maxsize=256)
def _order_block(order: int, pairs: tuple[tuple[int, int], ...], d: int):
    """All multi-indices of one total order with their cone-independent parts.

    Returns (m, log_weight) where log_weight = sum log Gamma((s_k+1)/2) -
    sum log m_ij!, and s_k sums the entries of m touching index k.
    """
    npairs = len(pairs)
    if npairs == 0:
        m = np.zeros((1 if order == 0 else 0, 0), dtype=np.int8)
    else:
        bars = np.array(list(combinations(range(order + npairs - 1), npairs - 1)),
                        dtype=np.int32).reshape(-1, npairs - 1)
        edges = np.hstack([np.full((len(bars), 1), -1), bars,
                           np.full((len(bars), 1), order + npairs - 1)])
        m = (np.diff(edges, axis=1) - 1).astype(np.int8)
    inc = np.zeros((npairs, d), dtype=np.int32)
    for p, (i, j) in enumerate(pairs):
        inc[p, i] = inc[p, j] = 1
    s = m.astype(np.int32) @ inc
    hg = _half_gamma_logs(2 * order + 2)
    lf = _log_factorials(order + 1)
    logw = hg[s + 1].sum(axis=1) - lf[m].sum(axis=1)
    return m, logw


def _raw_series(inp: AomotoInput, tol: float, max_total_order: int,
                strictly_positive: bool = False) -> tuple[float, float, int]:
    """Partial sums of C * sum_m prod(-2b)^m/m! prod Gamma(...), by total order.

    Returns (value, last_order_magnitude, orders_used).
    """
    d = inp.dim
    b = inp.b
    all_pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    if strictly_positive:
        pairs = tuple(all_pairs)
    else:
        # m_ij > 0 terms vanish when b_ij == 0
        pairs = tuple(p for p in all_pairs if abs(b[p]) > 0)
    bv = np.array([b[p] for p in pairs])
    with np.errstate(divide="ignore"):
        logx = np.log(np.abs(2 * bv)) if len(bv) else np.zeros(0)
    neg = (-2 * bv) < 0
    const = math.sqrt(max(np.linalg.det(b), 0.0)) / math.pi ** (d / 2)
    total, mags = 0.0, []
    for order in range(max_total_order + 1):
        m, logw = _order_block(order, pairs, d)
        if strictly_positive:
            keep = np.all(m > 0, axis=1)
            m, logw = m[keep], logw[keep]
        if len(m):
            if len(pairs):
                with np.errstate(invalid="ignore"):
                    logt = logw + np.where(m == 0, 0.0, m * logx).sum(axis=1)
            else:
                logt = logw
            sign = np.where((m[:, neg].sum(axis=1) % 2) == 1, -1.0, 1.0) if len(pairs) else 1.0
            terms = sign * np.exp(logt)
            total += float(terms.sum())
            mags.append(float(np.abs(terms).sum()))
        else:
            mags.append(0.0)
        if not pairs and order == 0:
            return const * total, 0.0, 1
        if order >= 2 and mags[-1] * const < tol and mags[-2] * const < tol:
            return const * total, const * mags[-1], order + 1
        if order >= 12 and all(mags[-k] > mags[-k - 1] for k in range(1, 6)):
            raise AomotoDivergence(f"order magnitudes still growing at order {order}")
    raise AomotoDivergence(f"no convergence to {tol} within total order {max_total_order}")


@lru_cache(maxsize=None)
def orthant_normalization(d: int) -> float:
    """Measured factor that maps the raw series onto the normalized angle.

    The raw series is summed for the coordinate orthant, whose normalized
    angle is 2^-d, and the ratio is returned.
    """
    raw, _, _ = _raw_series(AomotoInput.from_normals(np.eye(d)), 1e-15, 4)
    return 2.0 ** -d / raw


def aomoto_angle(a: AomotoInput, tol: float = 1e-10, max_total_order: int = 60,
                 calibrated: bool = True, strictly_positive: bool = False) -> AngleValue:
    """Solid angle of a spherical simplex from the hypergeometric series.

    ``calibrated`` rescales by :func:`orthant_normalization`; turning it off
    and passing ``strictly_positive=True`` with ``k_power=1`` inputs gives
    the series exactly as it is usually printed, for comparison reports.
    """
    if a.dim < 2:
        raise DegeneracyError("series needs dimension at least 2")
    value, err, _ = _raw_series(a, tol, max_total_order, strictly_positive)
    if calibrated:
        f = orthant_normalization(a.dim)
        value, err = value * f, err * f
    value = min(1.0, max(0.0, value))
    return AngleValue(value, "aomoto", err)


# ---------------------------------------------------------------------------
# Monte Carlo


def _block_count(normals: np.ndarray, seed: int, block: int, size: int) -> int:
    rng = np.random.Generator(np.random.Philox(key=seed, counter=block << 128))
    z = rng.standard_normal((size, normals.shape[1]))
    return int(np.all(z @ normals.T >= 0, axis=1).sum())


def monte_carlo_angle(c: PointedCone, n: int = 1_000_000, seed: int = 0,
                      workers: int = 1) -> AngleValue:
    """Fraction of uniform directions in the cone's span that land inside.

    Directions come in fixed blocks from a counter-based generator keyed by
    ``seed``, so sample i is the same no matter how blocks are scheduled.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    _, normals = c.coordinates()
    if c.dim == 0:
        return AngleValue(1.0, "monte-carlo", 0.0, n, seed)
    sizes = [min(MC_BLOCK, n - i) for i in range(0, n, MC_BLOCK)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            counts = list(ex.map(lambda ib: _block_count(normals, seed, ib[0], ib[1]),
                                 enumerate(sizes)))
    else:
        counts = [_block_count(normals, seed, i, s) for i, s in enumerate(sizes)]
    p = sum(counts) / n
    return AngleValue(p, "monte-carlo", 3 * math.sqrt(p * (1 - p) / n), n, seed)


# ---------------------------------------------------------------------------
# dispatch


def cone_angle(c: PointedCone, policy: EnginePolicy = DEFAULT_POLICY) -> AngleValue:
    """Angle of a pointed cone using the engine the policy selects."""
    k = c.dim
    if k == 0:
        return AngleValue(1.0, "exact")
    if k == 1:
        return AngleValue(0.5, "exact")
    if k == 2:
        return planar_angle(c)
    if k == 3:
        return cone_angle_3d(c)
    if policy.mode == "mc":
        return monte_carlo_angle(c, policy.mc_samples, policy.seed, policy.workers)
    try:
        total, err = 0.0, 0.0
        for piece in triangulate_cone(c).pieces():
            v = aomoto_angle(AomotoInput.from_cone(piece), policy.tol, policy.max_total_order)
            total += v.value
            err += v.abs_error
        return AngleValue(min(total, 1.0), "aomoto", err)
    except AomotoDivergence:
        return monte_carlo_angle(c, policy.mc_samples, policy.seed, policy.workers)


@lru_cache(maxsize=4096)
def face_angle(p: Polytope, face: Face, policy: EnginePolicy = DEFAULT_POLICY) -> AngleValue:
    """Solid angle of P at any relative-interior point of ``face``."""
    if face.dim == p.dim_ambient:
        return AngleValue(1.0, "exact")
    if face.dim == p.dim_ambient - 1:
        return AngleValue(0.5, "exact")
    return cone_angle(face_cone(p, face), policy)


def solid_angle(p: Polytope, x: Sequence, policy: EnginePolicy = DEFAULT_POLICY,
                t=1) -> AngleValue:
    """Solid angle of tP at the point x (zero outside)."""
    x = vector(x)
    if not p.contains(x, t):
        return AngleValue(0.0, "exact")
    return face_angle(p, p.face_with_facets(p.tight_facets(x, t)), policy)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _prism_corner(c: PointedCone, up: bool) -> PointedCone:
    last = 1 if up else -1
    gens = [tuple(g) + (0,) for g in c.generators]
    gens.append(tuple([0] * c.ambient) + (last,))
    return PointedCone.from_generators(gens)


def prism_angle_bound_check(c: PointedCone, x: Sequence | None = None, n: int = 1_000_000,
                            seed: int = 0) -> dict:
    """Compare the two corner angles of K x [0,1] over the apex with the base angle.

    The apex ``x`` only fixes where the cone sits; angles are translation
    invariant, so it does not enter the computation. The bound constant is
    the ratio of unit-ball volumes in dimensions d and d+1.
    """
    if c.ambient != c.dim or c.dim > 3:
        raise DegeneracyError("prism check needs a full-dimensional cone in dimension <= 3")
    base = cone_angle(c)
    low = monte_carlo_angle(_prism_corner(c, True), n, seed)
    high = monte_carlo_angle(_prism_corner(c, False), n, seed + 1)
    sigma = math.hypot(low.abs_error, high.abs_error) / 3
    const = unit_ball_volume(c.dim) / unit_ball_volume(c.dim + 1)
    bound = const * base.value
    worst = max(low.value, high.value)
    return {
        "apex": [str(to_rational(a)) for a in x] if x is not None else None,
        "base_angle": base.to_dict(),
        "corner_low": low.to_dict(),
        "corner_high": high.to_dict(),
        "corner_product_form": base.value / 2,
        "constant": const,
        "bound": bound,
        "corners_agree": abs(low.value - high.value) <= 4 * sigma,
        "bound_holds": worst <= bound,
        "ok": abs(low.value - high.value) <= 4 * sigma and worst <= bound,
    }


# ---------------------------------------------------------------------------
# calibration report

SERIES_VARIANTS = {
    # name: (k_power, strictly_positive, calibrated)
    "literal": (1.0, True, False),
    "literal-nonnegative": (1.0, False, False),
    "unit-gram": (0.5, False, False),
    "calibrated": (0.5, False, True),
}


def _variant_value(normals, variant: str, tol: float, max_total_order: int) -> float | None:
    k_power, strict, cal = SERIES_VARIANTS[variant]
    try:
        a = AomotoInput.from_normals(normals, k_power)
        value, _, _ = _raw_series(a, tol, max_total_order, strict)
    except (AomotoDivergence, DegeneracyError, ValueError):
        return None
    if cal:
        value *= orthant_normalization(len(normals))
    return value


def random_near_orthogonal_cone(rng: np.random.Generator, d: int, max_deg: float = 15.0):
    """Simplicial cone whose generators are e_i tilted by at most ``max_deg`` degrees."""
    gens = []
    for i in range(d):
        e = np.eye(d)[i]
        w = rng.standard_normal(d)
        w -= (w @ e) * e
        w /= np.linalg.norm(w)
        ang = math.radians(rng.uniform(0, max_deg))
        gens.append(math.cos(ang) * e + math.sin(ang) * w)
    return np.array(gens)


def _normals_of_generators(gens: np.ndarray) -> np.ndarray:
    """Inward facet normals: rows of the inverse transpose."""
    return np.linalg.inv(gens).T


def aomoto_calibration_report(n_cones: int = 10, seed: int = 0, tol: float = 1e-12,
                              max_total_order: int = 60) -> dict:
    """Orthant normalization in d = 3, 4 and a variant-by-variant table against Girard."""
    orthant = []
    for d in (3, 4):
        raw, _, _ = _raw_series(AomotoInput.from_normals(np.eye(d)), 1e-15, 4)
        lit = _variant_value(np.eye(d), "literal", 1e-15, 4)
        orthant.append({"d": d, "target": 2.0 ** -d, "raw_series": raw,
                        "measured_ratio": 2.0 ** -d / raw,
                        "literal_series": lit})
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_cones):
        gens = random_near_orthogonal_cone(rng, 3)
        ref = girard_angle(*gens).value
        normals = _normals_of_generators(gens)
        row = {"girard": ref}
        for name in SERIES_VARIANTS:
            v = _variant_value(normals, name, tol, max_total_order)
            row[name] = v
            row[name + "_error"] = None if v is None else abs(v - ref)
        rows.append(row)
    summary = {}
    for name in SERIES_VARIANTS:
        errs = [r[name + "_error"] for r in rows]
        ok = [e for e in errs if e is not None]
        summary[name] = {"max_error": max(ok) if ok else None,
                         "failures": len(errs) - len(ok)}
    return {"orthant": orthant, "cones": rows, "summary": summary,
            "calibrated_ok": summary["calibrated"]["max_error"] is not None
            and summary["calibrated"]["max_error"] < 1e-6}
