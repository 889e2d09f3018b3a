"""Lattice mixed volumes, the curve degree bound and its split over pretropisms.

Normalization: the mixed volume of the ``n`` unit coordinate segments is 1,
so for generic coefficients it counts the isolated solutions in the torus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull

from . import _linalg
from .geometry import LatticePolytope, face_for, newton_polytope, project_face, unimodular_extend
from .polycore import PolynomialSystem
from .tropical import prevariety

__all__ = [
    "DegreeDecomposition",
    "mixed_volume",
    "mixed_volume_oracle",
    "degree_bound",
    "degree_decomposition",
    "first_axis_segment",
]


def _check_tuple(polytopes):
    polytopes = list(polytopes)
    n = len(polytopes)
    if n == 0:
        raise ValueError("need at least one polytope")
    for p in polytopes:
        if p.nvars != n:
            raise ValueError(f"{n} polytopes must live in {n}-space, got one in {p.nvars}-space")
        if p.is_empty():
            raise ValueError("empty polytope")
    return polytopes, n


def _sum_dim(polytopes, n) -> int:
    dirs = []
    for p in polytopes:
        p0 = p.vertices[0]
        dirs.extend([a - b for a, b in zip(q, p0)] for q in p.vertices[1:])
    return _linalg.rank(dirs, n) if dirs else 0


def _normalized_key(polytopes):
    key = []
    for p in polytopes:
        base = p.vertices[0]
        key.append(tuple(tuple(a - b for a, b in zip(v, base)) for v in p.vertices))
    return tuple(key)


_CACHE: dict = {}


def mixed_volume(polytopes: Sequence[LatticePolytope]) -> int:
    """Mixed volume by recursion on the last polytope.

    With ``Q`` the last polytope and ``P`` the others,
    ``MV(P, Q) = sum_v -min_Q<q, v> * MV(in_v P)`` over the rays ``v`` of
    the prevariety of ``P``; each face tuple is moved into ``Z^{n-1}``
    through a unimodular matrix with first row ``v``.
    """
    polytopes, n = _check_tuple(polytopes)
    if any(len(p.vertices) == 1 for p in polytopes):
        return 0
    if n == 1:
        xs = [v[0] for v in polytopes[0].vertices]
        return max(xs) - min(xs)
    if _sum_dim(polytopes, n) < n:
        return 0
    key = _normalized_key(polytopes)
    if key in _CACHE:
        return _CACHE[key]
    rest, last = polytopes[:-1], polytopes[-1]
    if _sum_dim(rest, n) < n - 1:
        _CACHE[key] = 0
        return 0
    fan = prevariety(rest)
    total = 0
    for ray in fan.rays:
        weight = -last.support_value(ray, "min")
        if weight == 0:
            continue
        faces = [face_for(p, ray, "min") for p in rest]
        u = unimodular_extend(ray)
        sub = [project_face(f, u) for f in faces]
        total += weight * mixed_volume(sub)
    _CACHE[key] = total
    return total


# ---------------------------------------------------------------- oracle

def _minkowski(polytopes, n):
    pts = {(0,) * n}
    for p in polytopes:
        pts = {tuple(a + b for a, b in zip(x, v)) for x in pts for v in p.vertices}
        pts = _hull_vertices(pts, n)
    return pts


def _affine_rank(pts, n):
    pts = list(pts)
    p0 = pts[0]
    return _linalg.rank([[a - b for a, b in zip(q, p0)] for q in pts[1:]], n) if len(pts) > 1 else 0


def _hull_vertices(pts, n):
    pts = sorted(pts)
    if n < 2 or len(pts) <= n + 1 or _affine_rank(pts, n) < n:
        return set(pts)
    hull = ConvexHull(np.array(pts, dtype=float))
    return {pts[i] for i in hull.vertices}


def _volume_times_factorial(pts, n) -> Fraction:
    """``n! * vol(conv(pts))`` computed from an exact boundary triangulation."""
    pts = sorted(pts)
    if len(pts) <= n or _affine_rank(pts, n) < n:
        return Fraction(0)
    if n == 1:
        return Fraction(max(p[0] for p in pts) - min(p[0] for p in pts))
    hull = ConvexHull(np.array(pts, dtype=float), qhull_options="Qt")
    verts = [pts[i] for i in hull.vertices]
    m = len(verts)
    centre = [sum(v[i] for v in verts) for i in range(n)]
    total = 0
    for simplex in hull.simplices:
        rows = [[m * pts[j][i] - centre[i] for i in range(n)] for j in simplex]
        total += abs(_linalg.det_int(rows))
    return Fraction(total, m ** n)


def mixed_volume_oracle(polytopes: Sequence[LatticePolytope], max_n: int = 5) -> int:
    """Mixed volume by inclusion-exclusion over Minkowski sums.

    ``MV = sum_S (-1)^(n-|S|) vol(sum_{i in S} P_i)``; volumes come from a
    Qhull boundary triangulation coned to the vertex centroid, with the
    determinants evaluated in integer arithmetic.
    """
    polytopes, n = _check_tuple(polytopes)
    if n > max_n:
        raise ValueError(f"oracle limited to n <= {max_n}")
    total = Fraction(0)
    for size in range(1, n + 1):
        sign = -1 if (n - size) % 2 else 1
        for subset in combinations(polytopes, size):
            total += sign * _volume_times_factorial(_minkowski(subset, n), n)
    total /= factorial(n)
    if total.denominator != 1:
        raise ArithmeticError(f"non-integral mixed volume {total}")
    return int(total)


# ---------------------------------------------------------------- degree

def first_axis_segment(n: int) -> LatticePolytope:
    """Segment from the origin to the first unit vector."""
    e1 = tuple(int(i == 0) for i in range(n))
    return LatticePolytope.from_points([(0,) * n, e1])


def _curve_polytopes(s: PolynomialSystem):
    if len(s) != s.nvars - 1:
        raise ValueError(
            f"curve systems need n-1 polynomials in n variables; got {len(s)} in {s.nvars}"
        )
    return [newton_polytope(p) for p in s.polys]


def degree_bound(s: PolynomialSystem) -> int:
    """Mixed volume of the Newton polytopes together with the first-axis segment."""
    polys = _curve_polytopes(s)
    return mixed_volume(polys + [first_axis_segment(s.nvars)])


@dataclass(frozen=True)
class DegreeDecomposition:
    entries: tuple  # (ray, weight) pairs, weight > 0
    total: int

    def weight(self, ray) -> int:
        for r, w in self.entries:
            if r == tuple(ray):
                return w
        return 0

    def to_dict(self) -> dict:
        return {"total": self.total, "terms": [{"ray": list(r), "weight": w} for r, w in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def initial_mixed_volume(polytopes, v) -> int:
    """Mixed volume of the minimal faces along ``v`` after moving them into ``Z^{n-1}``."""
    u = unimodular_extend(v)
    return mixed_volume([project_face(face_for(p, v, "min"), u) for p in polytopes])


def degree_decomposition(s: PolynomialSystem, rays) -> DegreeDecomposition:
    """Weight ``v1 * MV(in_v P)`` for each pretropism ``v``; zero weights dropped."""
    polys = _curve_polytopes(s)
    entries = []
    for ray in rays:
        ray = tuple(int(x) for x in ray)
        if ray[0] <= 0:
            raise ValueError(f"ray {ray} has non-positive first coordinate")
        w = ray[0] * initial_mixed_volume(polys, ray)
        if w > 0:
            entries.append((ray, w))
    return DegreeDecomposition(tuple(entries), sum(w for _, w in entries))
