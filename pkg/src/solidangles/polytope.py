"""Exact polytope geometry: facets, faces, lattice points, tangent cones.

Facets come from brute force over vertex subsets and faces from
intersections of facet vertex sets. Both are fine for desk-scale inputs
(dimension at most 4, a few dozen vertices) and never touch floating point.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import factorial, floor, ceil
from typing import Iterable, Sequence

import numpy as np

from .rational_linalg import (
    RVector,
    det,
    dot,
    format_rational,
    lcm_of_denominators,
    nullspace,
    primitive_integer,
    rank,
    row_reduce,
    solve,
    sub,
    to_rational,
    vector,
)

MAX_HULL_DIM = 4
MAX_SCAN_POINTS = 20_000_000


class DimensionError(ValueError):
    pass


class ContainmentError(ValueError):
    pass


class LinealityError(ValueError):
    pass


class SizeError(ValueError):
    pass


@dataclass(frozen=True)
class Halfspace:
    """``<normal, x> >= offset`` with a primitive integer normal."""

    normal: tuple[int, ...]
    offset: Fraction

    @classmethod
    def through(cls, normal: Sequence, offset) -> "Halfspace":
        normal = [to_rational(a) for a in normal]
        offset = to_rational(offset)
        prim = primitive_integer(normal)
        # primitive_integer rescales by a positive factor
        factor = next(Fraction(p) / a for p, a in zip(prim, normal) if a != 0)
        return cls(prim, offset * factor)

    def value(self, x: Sequence, t=1) -> Fraction:
        return dot(self.normal, x) - t * self.offset

    def contains(self, x: Sequence, t=1) -> bool:
        return self.value(x, t) >= 0

    def flipped(self) -> "Halfspace":
        return Halfspace(tuple(-a for a in self.normal), -self.offset)

    def to_dict(self) -> dict:
        return {"normal": list(self.normal), "offset": format_rational(self.offset)}


@dataclass(frozen=True)
class Face:
    dim: int
    vertices: frozenset[int]
    facets: frozenset[int]

    def __repr__(self) -> str:
        return f"Face(dim={self.dim}, vertices={sorted(self.vertices)})"


def _affine_rank(points: Sequence[RVector]) -> int:
    if len(points) <= 1:
        return 0
    p0 = points[0]
    return rank([sub(p, p0) for p in points[1:]])


def _full_dim_facets(points: Sequence[RVector]) -> list[Halfspace]:
    d = len(points[0])
    if d == 0:
        return []
    found: dict[tuple, Halfspace] = {}
    for idx in combinations(range(len(points)), d):
        base = points[idx[0]]
        diffs = [sub(points[i], base) for i in idx[1:]]
        ns = nullspace(diffs, d) if diffs else nullspace([], d)
        if len(ns) != 1:
            continue
        h = Halfspace.through(ns[0], dot(ns[0], base))
        vals = [h.value(p) for p in points]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            h = h.flipped()
        else:
            continue
        found[(h.normal, h.offset)] = h
    return sorted(found.values(), key=lambda h: (h.normal, h.offset))


def hull_facets(vertices: Iterable[Sequence], allow_lower_dim: bool = False) -> list[Halfspace]:
    """Irredundant inward facet halfspaces of the convex hull.

    For lower-dimensional input (with ``allow_lower_dim``) the facets are
    those relative to the affine hull; their normals have zeros outside a
    set of coordinates that parametrize the hull.
    """
    pts = sorted({vector(v) for v in vertices})
    if not pts:
        raise DimensionError("empty point set")
    d = len(pts[0])
    if d > MAX_HULL_DIM:
        raise DimensionError(f"ambient dimension {d} exceeds the brute-force limit {MAX_HULL_DIM}")
    k = _affine_rank(pts)
    if k == d:
        return _full_dim_facets(pts)
    if not allow_lower_dim:
        raise DimensionError(f"points span an affine space of dimension {k} < {d}")
    if k == 0:
        return []
    coords = _hull_coordinates(pts)
    projected = [tuple(p[c] for c in coords) for p in pts]
    out = []
    for h in _full_dim_facets(projected):
        normal = [0] * d
        for c, a in zip(coords, h.normal):
            normal[c] = a
        out.append(Halfspace(tuple(normal), h.offset))
    return out


def _hull_coordinates(pts: Sequence[RVector]) -> list[int]:
    p0 = pts[0]
    diffs = [sub(p, p0) for p in pts[1:]]
    return row_reduce(diffs)[1]


def _affine_equations(pts: Sequence[RVector]) -> list[Halfspace]:
    d = len(pts[0])
    p0 = pts[0]
    diffs = [sub(p, p0) for p in pts[1:]]
    ns = nullspace(diffs, d) if diffs else nullspace([], d)
    return [Halfspace.through(n, dot(n, p0)) for n in ns]


class Polytope:
    """Convex hull of finitely many rational points.

    Redundant input points are dropped and the vertices are stored in
    lexicographic order, so equal hulls compare equal regardless of how
    they were listed.
    """

    def __init__(self, vertices: Iterable[Sequence], allow_lower_dim: bool = False):
        pts = sorted({vector(v) for v in vertices})
        if not pts:
            raise DimensionError("a polytope needs at least one point")
        self.dim_ambient = len(pts[0])
        if any(len(p) != self.dim_ambient for p in pts):
            raise DimensionError("points have mixed dimensions")
        self.dim = _affine_rank(pts)
        if self.dim < self.dim_ambient and not allow_lower_dim:
            raise DimensionError(
                f"points span dimension {self.dim} in R^{self.dim_ambient}; "
                "pass allow_lower_dim=True for faces")
        self.facets: tuple[Halfspace, ...] = tuple(hull_facets(pts, allow_lower_dim=True))
        self.equations: tuple[Halfspace, ...] = (
            tuple(_affine_equations(pts)) if self.dim < self.dim_ambient else ())
        self.vertices: tuple[RVector, ...] = tuple(p for p in pts if self._is_vertex(p))

    def _is_vertex(self, p: RVector) -> bool:
        if self.dim == 0:
            return True
        tight = [h.normal for h in self.facets if h.value(p) == 0]
        return len(tight) >= self.dim and rank(tight) == self.dim

    # -- identity -------------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, Polytope) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        vs = ", ".join("(" + ",".join(map(str, v)) + ")" for v in self.vertices)
        return f"Polytope([{vs}])"

    @property
    def is_full_dimensional(self) -> bool:
        return self.dim == self.dim_ambient

    @property
    def is_lattice(self) -> bool:
        return all(x.denominator == 1 for v in self.vertices for x in v)

    @property
    def is_simplex(self) -> bool:
        return len(self.vertices) == self.dim + 1

    @property
    def denominator(self) -> int:
        """Least common multiple of the vertex coordinate denominators."""
        return lcm_of_denominators(x for v in self.vertices for x in v)

    def to_json_dict(self) -> dict:
        return {"vertices": [[format_rational(x) for x in v] for v in self.vertices]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, data: dict, allow_lower_dim: bool = False) -> "Polytope":
        if "vertices" not in data:
            raise ValueError("polytope JSON needs a 'vertices' key")
        return cls([[to_rational(x) for x in v] for v in data["vertices"]], allow_lower_dim)

    @classmethod
    def from_json(cls, text: str) -> "Polytope":
        return cls.from_json_dict(json.loads(text))

    # -- membership -----------------------------------------------------
    def contains(self, x: Sequence, t=1) -> bool:
        x = vector(x)
        return (all(h.value(x, t) == 0 for h in self.equations)
                and all(h.value(x, t) >= 0 for h in self.facets))

    def tight_facets(self, x: Sequence, t=1) -> frozenset[int]:
        x = vector(x)
        return frozenset(i for i, h in enumerate(self.facets) if h.value(x, t) == 0)

    def scaled(self, t) -> "Polytope":
        t = to_rational(t)
        return Polytope([[t * x for x in v] for v in self.vertices],
                        allow_lower_dim=not self.is_full_dimensional)

    def translated(self, y: Sequence) -> "Polytope":
        y = vector(y)
        return Polytope([[a + b for a, b in zip(v, y)] for v in self.vertices],
                        allow_lower_dim=not self.is_full_dimensional)

    # -- faces ----------------------------------------------------------
    @cached_property
    def _facet_vertex_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(i for i, v in enumerate(self.vertices) if h.value(v) == 0)
                     for h in self.facets)

    @cached_property
    def faces(self) -> tuple[Face, ...]:
        """All nonempty faces, the polytope itself included, by dimension."""
        fsets = self._facet_vertex_sets
        seen: set[frozenset[int]] = {frozenset(range(len(self.vertices)))}
        frontier = list(set(fsets))
        seen.update(frontier)
        while frontier:
            nxt = []
            for s in frontier:
                for f in fsets:
                    meet = s & f
                    if meet and meet not in seen:
                        seen.add(meet)
                        nxt.append(meet)
            frontier = nxt
        faces = []
        for s in seen:
            tight = frozenset(j for j, f in enumerate(fsets) if s <= f)
            dim = _affine_rank([self.vertices[i] for i in sorted(s)])
            faces.append(Face(dim, s, tight))
        faces.sort(key=lambda f: (f.dim, sorted(f.vertices)))
        return tuple(faces)

    @cached_property
    def _face_by_facets(self) -> dict[frozenset[int], Face]:
        return {f.facets: f for f in self.faces}

    def face_with_facets(self, tight: frozenset[int]) -> Face:
        return self._face_by_facets[frozenset(tight)]

    @property
    def top_face(self) -> Face:
        return self.faces[-1]

    def f_vector(self) -> tuple[int, ...]:
        c = Counter(f.dim for f in self.faces)
        return tuple(c[k] for k in range(self.dim + 1))

    def face_polytope(self, face: Face) -> "Polytope":
        return Polytope([self.vertices[i] for i in sorted(face.vertices)], allow_lower_dim=True)

    def subfaces(self, face: Face, codim: int = 1) -> list[Face]:
        return [g for g in self.faces if g.dim == face.dim - codim and g.vertices < face.vertices]

    def superfaces(self, face: Face, codim: int = 1) -> list[Face]:
        return [g for g in self.faces if g.dim == face.dim + codim and face.vertices < g.vertices]

    # -- volume ---------------------------------------------------------
    def triangulation(self) -> list[tuple[int, ...]]:
        """Pulling triangulation into simplices on the polytope's vertices."""
        if not self.is_full_dimensional:
            raise DimensionError("triangulation needs a full-dimensional polytope")
        return [tuple(sorted(s)) for s in triangulate_cone(self.cone_over()).simplices]

    def volume(self) -> Fraction:
        """Euclidean volume (equals the induced-lattice volume when full-dimensional)."""
        if self.dim_ambient == 0:
            return Fraction(1)
        d = self.dim_ambient
        total = Fraction(0)
        for s in self.triangulation():
            v0 = self.vertices[s[0]]
            total += abs(det([sub(self.vertices[i], v0) for i in s[1:]]))
        return total / factorial(d)

    def normalized_facet_volumes(self) -> list[Fraction]:
        """Facet volumes measured in the lattice each facet's hyperplane induces.

        Uses a pyramid over the facet whose apex sits at lattice distance one.
        """
        out = []
        d = self.dim_ambient
        for j, h in enumerate(self.facets):
            verts = [self.vertices[i] for i in sorted(self._facet_vertex_sets[j])]
            nn = dot(h.normal, h.normal)
            apex = tuple(a + Fraction(n) / nn for a, n in zip(verts[0], h.normal))
            out.append(Polytope(verts + [apex]).volume() * d)
        return out

    def cone_over(self) -> "PointedCone":
        """Cone over the polytope lifted to height one."""
        gens = tuple(primitive_integer(tuple(v) + (Fraction(1),)) for v in self.vertices)
        hs = tuple(Halfspace.through(tuple(h.normal) + (-h.offset,), 0) for h in self.facets)
        # generator i must correspond to vertex i; primitive scaling keeps order
        return PointedCone(gens, hs, self.dim_ambient + 1, 0, self.dim_ambient + 1)


# ---------------------------------------------------------------------------
# lattice points


def _box(p: Polytope, t: int) -> tuple[list[int], list[int]]:
    d = p.dim_ambient
    lo = [ceil(min(v[i] for v in p.vertices) * t) for i in range(d)]
    hi = [floor(max(v[i] for v in p.vertices) * t) for i in range(d)]
    return lo, hi


def _integer_rows(hs: Sequence[Halfspace]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normals scaled so that the offsets become integers (num/den form)."""
    if not hs:
        return np.zeros((0, 0), dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    normals = np.array([h.normal for h in hs], dtype=np.int64)
    num = np.array([h.offset.numerator for h in hs], dtype=np.int64)
    den = np.array([h.offset.denominator for h in hs], dtype=np.int64)
    return normals, num, den


def _scan(p: Polytope, t: int):
    """Yield (points, slack_facets, slack_equations) chunks over the bounding box.

    Slack values are ``den * <n, x> - t * num``, exact in int64 at desk scale.
    """
    if t < 0:
        raise ValueError("dilation factor must be nonnegative")
    d = p.dim_ambient
    lo, hi = _box(p, t)
    if any(a > b for a, b in zip(lo, hi)):
        return
    sizes = [b - a + 1 for a, b in zip(lo, hi)]
    if int(np.prod(sizes, dtype=object)) > MAX_SCAN_POINTS:
        raise SizeError(f"bounding box of {t}P holds more than {MAX_SCAN_POINTS} points")
    fn, fnum, fden = _integer_rows(p.facets)
    en, enum_, eden = _integer_rows(p.equations)
    inner = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo[1:], hi[1:])]
    if inner:
        grid = np.stack(np.meshgrid(*inner, indexing="ij"), axis=-1).reshape(-1, d - 1)
    else:
        grid = np.zeros((1, 0), dtype=np.int64)
    for x0 in range(lo[0], hi[0] + 1):
        pts = np.hstack([np.full((len(grid), 1), x0, dtype=np.int64), grid])
        fs = (pts @ fn.T) * fden - t * fnum if len(fn) else np.zeros((len(pts), 0), dtype=np.int64)
        es = (pts @ en.T) * eden - t * enum_ if len(en) else np.zeros((len(pts), 0), dtype=np.int64)
        keep = np.all(fs >= 0, axis=1) & np.all(es == 0, axis=1)
        if keep.any():
            yield pts[keep], fs[keep], es[keep]


def lattice_points(p: Polytope, t: int = 1) -> list[tuple[int, ...]]:
    """Integer points of the dilate tP, sorted lexicographically."""
    out: list[tuple[int, ...]] = []
    for pts, _, _ in _scan(p, t):
        out.extend(tuple(int(a) for a in row) for row in pts)
    return out


def lattice_point_faces(p: Polytope, t: int = 1) -> Counter:
    """Count the integer points of tP by the set of facets they lie on."""
    counts: Counter = Counter()
    for _, fs, _ in _scan(p, t):
        tight = fs == 0
        rows, mult = np.unique(tight, axis=0, return_counts=True)
        for row, m in zip(rows, mult):
            counts[frozenset(np.flatnonzero(row).tolist())] += int(m)
    return counts


def count_lattice_points(p: Polytope, t: int = 1) -> int:
    return sum(len(pts) for pts, _, _ in _scan(p, t))


def count_relative_interior(p: Polytope, face: Face, t: int = 1) -> int:
    """Integer points of t times the relative interior of ``face``."""
    if t == 0:
        return 1 if face.dim == 0 else 0
    n = 0
    tight = np.array(sorted(face.facets), dtype=np.int64)
    others = np.array([j for j in range(len(p.facets)) if j not in face.facets], dtype=np.int64)
    for _, fs, _ in _scan(p, t):
        ok = np.ones(len(fs), dtype=bool)
        if len(tight):
            ok &= np.all(fs[:, tight] == 0, axis=1)
        if len(others):
            ok &= np.all(fs[:, others] > 0, axis=1)
        n += int(ok.sum())
    return n


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class PointedCone:
    """Cone at the origin with both descriptions.

    ``generators`` are primitive integer vectors, ``halfspaces`` have zero
    offsets and ``dim`` is the dimension of the linear span of the
    generators, which may be smaller than ``ambient``.
    """

    generators: tuple[tuple[int, ...], ...]
    halfspaces: tuple[Halfspace, ...]
    dim: int
    lineality_dim: int
    ambient: int

    @classmethod
    def from_generators(cls, gens: Iterable[Sequence]) -> "PointedCone":
        gens = [vector(g) for g in gens]
        gens = [g for g in gens if any(gens_ != 0 for gens_ in g)]
        if not gens:
            raise DimensionError("a cone needs a nonzero generator")
        ambient = len(gens[0])
        prim = sorted({primitive_integer(g) for g in gens})
        k = rank(prim)
        basis = [tuple(Fraction(x) for x in r) for r in row_reduce(prim)[0][:k]]
        facets: dict[tuple, Halfspace] = {}
        for sub_ in combinations(range(len(prim)), k - 1):
            rows = [prim[i] for i in sub_]
            # normal = sum c_j basis_j orthogonal to the chosen generators
            m = [[dot(r, b) for b in basis] for r in rows]
            ns = nullspace(m, k) if rows else nullspace([], k)
            if len(ns) != 1:
                continue
            normal = [sum((c * b[i] for c, b in zip(ns[0], basis)), Fraction(0)) for i in range(ambient)]
            h = Halfspace.through(normal, 0)
            vals = [h.value(g) for g in prim]
            if all(v >= 0 for v in vals):
                pass
            elif all(v <= 0 for v in vals):
                h = h.flipped()
            else:
                continue
            facets[h.normal] = h
        hs = tuple(sorted(facets.values(), key=lambda h: h.normal))
        lin = k - (rank([h.normal for h in hs]) if hs else 0)
        if lin == 0:
            prim = [g for g in prim
                    if rank([h.normal for h in hs if h.value(g) == 0] or [[0] * ambient]) == k - 1]
        return cls(tuple(prim), hs, k, lin, ambient)

    @classmethod
    def from_halfspaces(cls, normals: Iterable[Sequence]) -> "PointedCone":
        """Full-dimensional cone {u : <n_i, u> >= 0}."""
        normals = [vector(n) for n in normals]
        d = len(normals[0])
        lin = d - rank(normals)
        if lin > 0:
            raise LinealityError("halfspace cone contains a line")
        rays = set()
        for sub_ in combinations(normals, d - 1):
            ns = nullspace(list(sub_), d)
            if len(ns) != 1:
                continue
            r = ns[0]
            if all(dot(n, r) >= 0 for n in normals):
                rays.add(primitive_integer(r))
            elif all(dot(n, r) <= 0 for n in normals):
                rays.add(primitive_integer([-x for x in r]))
        return cls.from_generators(sorted(rays))

    @property
    def is_pointed(self) -> bool:
        return self.lineality_dim == 0

    @property
    def is_simplicial(self) -> bool:
        return self.is_pointed and len(self.generators) == self.dim

    def contains(self, u: Sequence) -> bool:
        u = vector(u)
        return all(h.value(u) >= 0 for h in self.halfspaces) and self._in_span(u)

    def _in_span(self, u: RVector) -> bool:
        return rank(list(self.generators) + [u]) == self.dim

    def orthonormal_basis(self) -> np.ndarray:
        """Float orthonormal basis (ambient x dim) of the generators' span."""
        if self.dim == self.ambient:
            return np.eye(self.ambient)
        g = np.array(self.generators, dtype=float).T
        u, _, _ = np.linalg.svd(g, full_matrices=False)
        return u[:, : self.dim]

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Generators and halfspace normals in orthonormal span coordinates."""
        q = self.orthonormal_basis()
        gens = np.array(self.generators, dtype=float) @ q
        normals = (np.array([h.normal for h in self.halfspaces], dtype=float) @ q
                   if self.halfspaces else np.zeros((0, self.dim)))
        return gens, normals

    def _facet_sets(self) -> list[frozenset[int]]:
        return [frozenset(i for i, g in enumerate(self.generators) if h.value(g) == 0)
                for h in self.halfspaces]

    def subcone(self, idx: Sequence[int]) -> "PointedCone":
        return PointedCone.from_generators([self.generators[i] for i in idx])


@dataclass(frozen=True)
class Triangulation:
    cone: PointedCone
    simplices: tuple[tuple[int, ...], ...]

    def pieces(self) -> list[PointedCone]:
        return [self.cone.subcone(s) for s in self.simplices]


def triangulate_cone(c: PointedCone) -> Triangulation:
    """Pulling triangulation using only the cone's own generators.

    The lowest-index generator is pulled first at every level, which makes
    the pieces of neighbouring faces agree.
    """
    if not c.is_pointed:
        raise LinealityError("cannot triangulate a cone with lineality")
    fsets = c._facet_sets()
    gens = c.generators
    rank_cache: dict[frozenset[int], int] = {}

    def rk(s: frozenset[int]) -> int:
        if s not in rank_cache:
            rank_cache[s] = rank([gens[i] for i in sorted(s)]) if s else 0
        return rank_cache[s]

    def pull(face: frozenset[int]) -> list[tuple[int, ...]]:
        r = rk(face)
        if len(face) == r:
            return [tuple(sorted(face))]
        apex = min(face)
        subs = {face & f for f in fsets}
        out = []
        for s in subs:
            if apex in s or s == face or rk(s) != r - 1:
                continue
            out.extend((apex,) + piece for piece in pull(s))
        return out

    whole = frozenset(range(len(gens)))
    return Triangulation(c, tuple(sorted(tuple(sorted(s)) for s in pull(whole))))


def _project_out(u: RVector, basis: Sequence[RVector]) -> RVector:
    """Orthogonal projection of ``u`` onto the complement of span(basis)."""
    if not basis:
        return u
    gram = [[dot(a, b) for b in basis] for a in basis]
    coef = solve(gram, [dot(a, u) for a in basis])
    return tuple(x - sum((c * b[i] for c, b in zip(coef, basis)), Fraction(0))
                 for i, x in enumerate(u))


def tangent_cone(p: Polytope, x: Sequence, t=1) -> tuple[Face, PointedCone]:
    """Carrier face of ``x`` in tP and the pointed cone transverse to it.

    The feasible cone at ``x`` contains the carrier face's direction space
    as its lineality; projecting orthogonally onto the complement gives a
    pointed cone of dimension ``d - dim(carrier)`` with the same solid angle.
    """
    if not p.is_full_dimensional:
        raise DimensionError("tangent cones are defined for full-dimensional polytopes")
    x = vector(x)
    if not p.contains(x, t):
        raise ContainmentError(f"{x} is not in the polytope")
    face = p.face_with_facets(p.tight_facets(x, t))
    return face, face_cone(p, face)


def face_cone(p: Polytope, face: Face) -> PointedCone:
    d = p.dim_ambient
    verts = [p.vertices[i] for i in sorted(face.vertices)]
    dirs = [sub(v, verts[0]) for v in verts[1:]]
    basis = [tuple(r) for r in row_reduce(dirs)[0][: face.dim]] if dirs else []
    k = d - face.dim
    rays = []
    for g in p.superfaces(face):
        w = p.vertices[min(g.vertices - face.vertices)]
        rays.append(primitive_integer(_project_out(sub(w, verts[0]), basis)))
    hs = tuple(Halfspace.through(p.facets[j].normal, 0) for j in sorted(face.facets))
    return PointedCone(tuple(sorted(set(rays))), hs, k, 0, d)
