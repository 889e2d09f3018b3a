"""Lattice polytopes, faces, primitive vectors and unimodular monomial maps."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

from . import _linalg
from .polycore import Polynomial, PolynomialSystem

__all__ = [
    "LatticePolytope",
    "newton_polytope",
    "face_for",
    "primitive",
    "unimodular_extend",
    "is_unimodular",
    "transform_system",
    "transform_polynomial",
    "project_face",
]


@dataclass(frozen=True)
class LatticePolytope:
    """Convex hull of a finite set of integer points.

    ``points`` keeps every input point (sorted); ``vertices`` are the extreme
    ones.  ``dim`` is the affine dimension, -1 for the empty polytope.
    """

    points: tuple
    vertices: tuple
    dim: int
    nvars: int

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]], nvars: int | None = None) -> "LatticePolytope":
        pts = sorted({tuple(int(x) for x in p) for p in points})
        if not pts:
            if nvars is None:
                raise ValueError("empty point set needs nvars")
            return cls((), (), -1, nvars)
        n = len(pts[0])
        if nvars is not None and nvars != n:
            raise ValueError(f"points have {n} coordinates, expected {nvars}")
        if any(len(p) != n for p in pts):
            raise ValueError("points of unequal length")
        dim = _affine_dim(pts)
        verts = tuple(p for p in pts if _is_vertex(p, pts, n))
        return cls(tuple(pts), verts, dim, n)

    def __len__(self):
        return len(self.points)

    def is_empty(self) -> bool:
        return not self.points

    def support_value(self, v: Sequence[int], sense: str = "min"):
        vals = [_linalg.dot(p, v) for p in self.vertices]
        return min(vals) if sense == "min" else max(vals)

    def translate(self, shift: Sequence[int]) -> "LatticePolytope":
        return LatticePolytope.from_points([tuple(a + b for a, b in zip(p, shift)) for p in self.points])


def _affine_dim(pts) -> int:
    if not pts:
        return -1
    p0 = pts[0]
    return _linalg.rank([[a - b for a, b in zip(p, p0)] for p in pts[1:]], len(p0)) if len(pts) > 1 else 0


def _is_vertex(p, pts, n) -> bool:
    """``p`` is extreme iff its inner normal cone is full-dimensional."""
    if len(pts) == 1:
        return True
    if n == 0:
        return True
    ineqs = [[a - b for a, b in zip(q, p)] for q in pts if q != p]
    rays, lin = _linalg.cone_generators(n, (), ineqs)
    return _linalg.rank(list(rays) + list(lin), n) == n


def newton_polytope(p: Polynomial) -> LatticePolytope:
    """Convex hull of the support of ``p``, vertices found in exact arithmetic."""
    return LatticePolytope.from_points(p.support(), p.nvars)


def face_for(poly: LatticePolytope, v: Sequence[int], sense: str = "min") -> LatticePolytope:
    """Points of ``poly`` where ``<a, v>`` is minimal (``sense='min'``) or maximal."""
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    if poly.is_empty():
        return poly
    vals = [_linalg.dot(p, v) for p in poly.points]
    best = min(vals) if sense == "min" else max(vals)
    pts = tuple(p for p, x in zip(poly.points, vals) if x == best)
    verts = tuple(p for p in poly.vertices if _linalg.dot(p, v) == best)
    return LatticePolytope(pts, verts, _affine_dim(list(pts)), poly.nvars)


def primitive(v: Sequence[int]) -> tuple:
    """Divide an integer vector by the gcd of its entries (sign unchanged)."""
    v = tuple(int(x) for x in v)
    g = reduce(gcd, (abs(x) for x in v), 0)
    if g == 0:
        raise ValueError("the zero vector has no primitive form")
    return tuple(x // g for x in v)


def is_unimodular(u) -> bool:
    n = len(u)
    return all(len(row) == n for row in u) and abs(_linalg.det_int(u)) == 1


def unimodular_extend(v: Sequence[int]) -> tuple:
    """Integer matrix with first row ``v`` and determinant +-1.

    Column operations (extended Euclid) bring ``v`` to ``e1``: ``v M = e1``.
    The inverse of ``M`` is then unimodular with first row ``v``.
    """
    v = [int(x) for x in v]
    n = len(v)
    if n == 0 or not any(v):
        raise ValueError("zero vector")
    if reduce(gcd, (abs(x) for x in v), 0) != 1:
        raise ValueError(f"{tuple(v)} is not primitive")
    w = list(v)
    m = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_axpy(dst, src, q):
        w[dst] -= q * w[src]
        for row in m:
            row[dst] -= q * row[src]

    while sum(1 for x in w if x) > 1:
        piv = min((j for j in range(n) if w[j]), key=lambda j: (abs(w[j]), j))
        for j in range(n):
            if j != piv and w[j]:
                col_axpy(j, piv, w[j] // w[piv])
    piv = next(j for j in range(n) if w[j])
    if piv != 0:
        w[0], w[piv] = w[piv], w[0]
        for row in m:
            row[0], row[piv] = row[piv], row[0]
    if w[0] == -1:
        w[0] = 1
        for row in m:
            row[0] = -row[0]
    inv = _linalg.inverse(m)
    u = tuple(tuple(int(x) for x in row) for row in inv)
    assert list(u[0]) == v
    return u


def _apply(u, a):
    return tuple(sum(u[i][j] * a[j] for j in range(len(a))) for i in range(len(u)))


def transform_polynomial(p: Polynomial, u) -> tuple:
    """Substitute ``x_j = prod_i y_i^{u[i][j]}`` and strip the common monomial factor.

    Returns ``(reduced polynomial, factor exponent)``.  Exponents transform as
    ``a -> U a``; the factor is the coordinatewise minimum over the support.
    """
    if p.is_zero():
        return p, (0,) * p.nvars
    mapped = {_apply(u, exp): c for exp, c in p.terms.items()}
    if len(mapped) != len(p.terms):
        raise ValueError("transform is not injective on the support; matrix is singular")
    factor = tuple(min(e[i] for e in mapped) for i in range(p.nvars))
    out = {tuple(a - f for a, f in zip(e, factor)): c for e, c in mapped.items()}
    return Polynomial(out, p.nvars), factor


def transform_system(s: PolynomialSystem, u) -> tuple:
    """Monomial change of coordinates ``x = y^U`` applied to every polynomial.

    Returns ``(system in y, list of removed factor exponents)``.
    """
    if len(u) != s.nvars or not is_unimodular(u):
        raise ValueError("transform matrix must be a unimodular n x n integer matrix")
    polys, factors = [], []
    for p in s.polys:
        q, f = transform_polynomial(p, u)
        polys.append(q)
        factors.append(f)
    return PolynomialSystem(polys, s.nvars), factors


def project_face(face: LatticePolytope, u) -> LatticePolytope:
    """Map a face orthogonal to the first row of ``u`` into Z^{n-1}.

    The first transformed coordinate is constant on the face and is dropped.
    """
    pts = [_apply(u, p) for p in face.points]
    if len({q[0] for q in pts}) > 1:
        raise ValueError("points do not lie in a common hyperplane <v, a> = const")
    return LatticePolytope.from_points([q[1:] for q in pts], face.nvars - 1)
