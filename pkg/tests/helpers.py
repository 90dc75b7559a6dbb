"""Random polytope generators and the acceptance result registry."""
from __future__ import annotations

import itertools
from contextlib import contextmanager

import numpy as np

from solidangles.polytope import PointedCone, Polytope, lattice_points
from solidangles.rational_linalg import det

ACCEPTANCE_LINES: list[str] = []


@contextmanager
def criterion(number: int, title: str):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    try:
        yield
    except BaseException as exc:
        line = f"criterion {number:2d} FAIL  {title}  ({type(exc).__name__}: {str(exc)[:200]})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"criterion {number:2d} PASS  {title}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def random_lattice_simplex(rng: np.random.Generator, d: int, box: int = 3) -> Polytope:
    while True:
        pts = [tuple(int(x) for x in rng.integers(-box, box + 1, d)) for _ in range(d + 1)]
        base = pts[0]
        if det([[a - b for a, b in zip(p, base)] for p in pts[1:]]) != 0:
            return Polytope(pts)


def random_lattice_polytope(rng: np.random.Generator, d: int, n_points: int = 6,
                            box: int = 2) -> Polytope:
    while True:
        pts = {tuple(int(x) for x in rng.integers(-box, box + 1, d)) for _ in range(n_points)}
        try:
            p = Polytope(sorted(pts))
        except ValueError:
            continue
        if p.is_full_dimensional:
            return p


def random_nested_pair(rng: np.random.Generator, d: int) -> tuple[Polytope, Polytope]:
    """Q random; P the hull of a random full-dimensional subset of Q's integer points."""
    q = random_lattice_polytope(rng, d, n_points=2 * d + 2, box=2)
    pts = lattice_points(q, 1)
    while True:
        k = int(rng.integers(d + 1, len(pts) + 1))
        idx = rng.choice(len(pts), size=k, replace=False)
        try:
            p = Polytope([pts[i] for i in sorted(idx)])
        except ValueError:
            continue
        if p.is_full_dimensional:
            return p, q


def random_near_orthogonal_integer_cone(rng: np.random.Generator, d: int, scale: int,
                                        spread: int) -> PointedCone:
    """Generators scale*e_i plus integer noise in [-spread, spread] off the diagonal."""
    gens = []
    for i in range(d):
        v = [int(x) for x in rng.integers(-spread, spread + 1, d)]
        v[i] = scale
        gens.append(tuple(v))
    return PointedCone.from_generators(gens)


def max_tilt_degrees(c: PointedCone) -> float:
    g = np.array([[float(x) for x in v] for v in c.generators])
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    # angle from each generator to its nearest coordinate axis
    return float(np.degrees(np.arccos(np.abs(g).max(axis=1).min())))


def random_cone(rng: np.random.Generator, d: int, box: int = 3) -> PointedCone:
    while True:
        gens = [tuple(int(x) for x in rng.integers(-box, box + 1, d)) for _ in range(d)]
        if det([list(g) for g in gens]) != 0:
            return PointedCone.from_generators(gens)


def all_subsets(xs):
    return itertools.chain.from_iterable(itertools.combinations(xs, r) for r in range(len(xs) + 1))
