"""Named polytope families used in examples, tests and the CLI."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Sequence

from .angle import DEFAULT_POLICY, EnginePolicy
from .polytope import Polytope
from .rational_linalg import to_rational
from .solidpoly import vertex_sum


class FamilyValidationError(ValueError):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise FamilyValidationError(msg)


def _unit(d: int, i: int) -> list[int]:
    return [int(j == i) for j in range(d)]


def reeve(h: int) -> Polytope:
    """Reeve's tetrahedron conv{0, e1, e2, (1, 1, h)}."""
    _require(isinstance(h, int) and h >= 1, "reeve needs an integer h >= 1")
    return Polytope([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, h)])


def permutation_simplex(perm: Sequence[int]) -> Polytope:
    """conv{0, e_p(1), e_p(1) + e_p(2), ..., e_p(1) + ... + e_p(d)}, 1-based ``perm``.

    The origin is included so the simplices over all permutations triangulate
    the unit cube; without it the hull would only be (d-1)-dimensional.
    """
    d = len(perm)
    _require(sorted(perm) == list(range(1, d + 1)), "perm must be a permutation of 1..d")
    pts, cur = [[0] * d], [0] * d
    for i in perm:
        cur = cur[:]
        cur[i - 1] = 1
        pts.append(cur)
    return Polytope(pts)


def all_permutation_simplices(d: int) -> list[Polytope]:
    return [permutation_simplex(p) for p in permutations(range(1, d + 1))]


def unit_cube(d: int) -> Polytope:
    _require(1 <= d <= 4, "unit_cube supports 1 <= d <= 4")
    return Polytope(list(product((0, 1), repeat=d)))


def delta_h(hs: Sequence[int]) -> Polytope:
    """conv{0, e_1, ..., e_(d-1), (h_1, ..., h_(d-1), 1)} with d = len(hs) + 1 > 2."""
    d = len(hs) + 1
    _require(d > 2, "delta_h needs d > 2, i.e. at least two heights")
    _require(all(isinstance(h, int) for h in hs), "heights must be integers")
    pts = [[0] * d] + [_unit(d, i) for i in range(d - 1)] + [list(hs) + [1]]
    return Polytope(pts)


def regular_tetrahedron() -> Polytope:
    return Polytope([(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)])


def standard_simplex(d: int) -> Polytope:
    _require(1 <= d <= 4, "standard_simplex supports 1 <= d <= 4")
    return Polytope([[0] * d] + [_unit(d, i) for i in range(d)])


def half_prism(d: int) -> Polytope:
    """[0, 1/2] x [0, 1]^(d-1)."""
    _require(1 <= d <= 4, "half_prism supports 1 <= d <= 4")
    return Polytope([(Fraction(a, 2),) + rest for a in (0, 1) for rest in product((0, 1), repeat=d - 1)])


def interval(a, b) -> Polytope:
    a, b = to_rational(a), to_rational(b)
    _require(a < b, "interval needs a < b")
    return Polytope([(a,), (b,)])


def cross_polytope(d: int) -> Polytope:
    _require(1 <= d <= 4, "cross_polytope supports 1 <= d <= 4")
    return Polytope([[s * x for x in _unit(d, i)] for i in range(d) for s in (1, -1)])


FAMILIES = {
    "reeve": reeve,
    "permutation_simplex": permutation_simplex,
    "unit_cube": unit_cube,
    "delta_h": delta_h,
    "regular_tetrahedron": regular_tetrahedron,
    "standard_simplex": standard_simplex,
    "half_prism": half_prism,
    "interval": interval,
    "cross_polytope": cross_polytope,
}


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: tuple = field(default=())

    def build(self) -> Polytope:
        return build(self)


def build(spec: FamilySpec) -> Polytope:
    try:
        ctor = FAMILIES[spec.name]
    except KeyError:
        raise FamilyValidationError(
            f"unknown family {spec.name!r}; choose from {sorted(FAMILIES)}") from None
    p = spec.params
    if spec.name in ("permutation_simplex", "delta_h"):
        return ctor(list(p))
    return ctor(*p)


# ---------------------------------------------------------------------------
# the Delta(h, h, 1, ..., 1) scan


def _acos(x: float) -> float:
    return math.acos(min(1.0, max(-1.0, x)))


def delta_vertex_angles_closed_form(h: float) -> tuple[float, float, float, float]:
    """Vertex angles of conv{0, e1, e2, (h, h, 1)} at 0, e1, e2, (h, h, 1).

    Corner angles of each vertex's spherical triangle in closed form. At
    the apex (h, h, 1) the plane through 0, e1, e2 meets the other two at
    arccos(-h^2 / (h^2 + 1)).
    """
    r2 = h * h + 1
    q2 = 4 * h * h - 4 * h + 3
    a = _acos(h / math.sqrt(r2))
    b = _acos((-2 * h + 1) / math.sqrt(q2))
    c = _acos((2 * h * h - h + 1) / math.sqrt(r2 * q2))
    top = _acos(-h * h / r2)
    k = 1 / (4 * math.pi)
    return (k * (2 * a + top - math.pi),
            k * (a + b + c - math.pi),
            k * (a + b + c - math.pi),
            k * (top + 2 * c - math.pi))


def delta_apex_angle_as_printed(h: float) -> float:
    """Apex angle with -h^2 / sqrt(h^2 + 1) in place of -h^2 / (h^2 + 1).

    Kept only to show that this reading disagrees with the direct
    computation; its arccos argument leaves [-1, 1] once h >= 2 (nan then).
    """
    r2 = h * h + 1
    q2 = 4 * h * h - 4 * h + 3
    arg = -h * h / math.sqrt(r2)
    if abs(arg) > 1:
        return math.nan
    c = _acos((2 * h * h - h + 1) / math.sqrt(r2 * q2))
    return (math.acos(arg) + 2 * c - math.pi) / (4 * math.pi)


def asymptotic_vertex_sum_scan(hs: Sequence[int], d: int = 3,
                               policy: EnginePolicy = DEFAULT_POLICY) -> dict:
    """Vertex sums of Delta(h, h, 1, ..., 1) over ``hs`` with a trend check.

    Positive h should decrease toward 0, negative h increase toward 1/2 as
    h becomes more negative.
    """
    _require(d >= 3, "scan needs d >= 3")
    rows = []
    for h in hs:
        s = vertex_sum(delta_h([h, h] + [1] * (d - 3)), policy)
        row = {"h": h, "S": s.value, "abs_error": s.abs_error}
        if d == 3:
            row["closed_form"] = sum(delta_vertex_angles_closed_form(h))
        rows.append(row)
    pos = sorted((r for r in rows if r["h"] > 0), key=lambda r: r["h"])
    neg = sorted((r for r in rows if r["h"] < 0), key=lambda r: -r["h"])
    dec = all(b["S"] < a["S"] + a["abs_error"] + b["abs_error"] for a, b in zip(pos, pos[1:]))
    inc = all(b["S"] > a["S"] - a["abs_error"] - b["abs_error"] for a, b in zip(neg, neg[1:]))
    return {"d": d, "rows": rows, "positive_decreasing": dec, "negative_increasing": inc,
            "ok": dec and inc}
