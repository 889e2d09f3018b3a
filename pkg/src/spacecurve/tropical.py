"""Initial forms and the tropical prevariety of a tuple of Newton polytopes.

The prevariety is the set of directions ``v`` for which every polytope's
minimal face ``face_for(P, v, 'min')`` contains at least two points.  It is
the union, over choices of one edge per polytope, of the intersections of
the closed inner normal cones of those edges.  Cones are intersected in
H-form and converted back to generators exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from . import _linalg
from .geometry import LatticePolytope, face_for, newton_polytope, primitive
from .polycore import Polynomial, PolynomialSystem

__all__ = [
    "Cone",
    "PrevarietyFan",
    "Membership",
    "initial_form",
    "initial_system",
    "edge_cones",
    "prevariety",
    "system_prevariety",
    "pretropism_rays",
    "interior_membership",
]


@dataclass(frozen=True)
class Cone:
    """Polyhedral cone with both descriptions.

    ``generators`` are the extreme rays of the pointed part and ``lineality``
    a basis of the lineality space.  ``eqs``/``ineqs`` describe the cone as
    ``{v : eqs v = 0, ineqs v >= 0}``.
    """

    generators: tuple
    lineality: tuple
    eqs: tuple = field(repr=False, compare=False, default=())
    ineqs: tuple = field(repr=False, compare=False, default=())

    @classmethod
    def from_h(cls, n: int, eqs=(), ineqs=()) -> "Cone":
        eqs = _dedupe_rows(eqs)
        ineqs = _dedupe_rows(ineqs)
        gens, lin = _linalg.cone_generators(n, eqs, ineqs)
        eqs, ineqs = _irredundant(n, gens, lin, ineqs)
        return cls(tuple(gens), tuple(lin), tuple(eqs), tuple(ineqs))

    @property
    def nvars(self) -> int:
        vecs = self.generators or self.lineality or self.eqs or self.ineqs
        return len(vecs[0]) if vecs else 0

    @property
    def lineality_dim(self) -> int:
        return len(self.lineality)

    @property
    def dim(self) -> int:
        vecs = list(self.generators) + list(self.lineality)
        return _linalg.rank(vecs, len(vecs[0])) if vecs else 0

    @property
    def rays(self) -> tuple:
        """Generators, with each lineality basis vector listed in both signs."""
        out = set(self.generators)
        for v in self.lineality:
            out.add(tuple(v))
            out.add(tuple(-x for x in v))
        return tuple(sorted(out))

    def contains(self, v: Sequence) -> bool:
        return all(_linalg.dot(e, v) == 0 for e in self.eqs) and all(
            _linalg.dot(h, v) >= 0 for h in self.ineqs
        )

    def contains_cone(self, other: "Cone") -> bool:
        rays = [list(r) for r in other.rays]
        if not rays:
            return True
        eq = _linalg.dot_table([list(e) for e in self.eqs], rays)
        iq = _linalg.dot_table([list(h) for h in self.ineqs], rays)
        return all(x == 0 for row in eq for x in row) and all(x >= 0 for row in iq for x in row)

    def intersect(self, other: "Cone") -> "Cone":
        n = self.nvars or other.nvars
        gens = self._refined_generators(other)
        if gens is None:
            return Cone.from_h(n, self.eqs + other.eqs, self.ineqs + other.ineqs)
        return self._from_generators(other, gens)

    def _refined_generators(self, other: "Cone"):
        """Extreme rays of the intersection by refining this cone's rays; ``None`` if not pointed."""
        if self.lineality or other.lineality or not self.generators:
            return None
        old, zeros = self._incidence
        new = [list(e) for e in other.eqs] + [[-x for x in e] for e in other.eqs] + [list(h) for h in other.ineqs]
        return tuple(_linalg.refine_pointed(len(self.generators[0]), self.generators, old, new, zeros))

    @cached_property
    def _incidence(self):
        rows = [list(e) for e in self.eqs] + [[-x for x in e] for e in self.eqs] + [list(h) for h in self.ineqs]
        return rows, _linalg.incidence(rows, self.generators)

    def _from_generators(self, other: "Cone", gens) -> "Cone":
        if gens == self.generators:
            return self
        if gens == other.generators and not other.lineality:
            return other
        n = self.nvars or other.nvars
        eqs, ineqs = _irredundant(n, gens, (), _dedupe_rows(list(self.ineqs) + list(other.ineqs)))
        return Cone(gens, (), tuple(eqs), tuple(ineqs))

    def relative_interior_point(self) -> tuple:
        """A point in the relative interior (sum of generators); zero for a linear space."""
        n = self.nvars
        return tuple(sum(r[i] for r in self.generators) for i in range(n))

    def minimal_face(self, v: Sequence) -> "Cone":
        """The face of this cone holding ``v`` in its relative interior."""
        tight = [h for h in self.ineqs if _linalg.dot(h, v) == 0]
        gens = tuple(r for r in self.generators if all(_linalg.dot(h, r) == 0 for h in tight))
        return Cone(gens, self.lineality, self.eqs + tuple(tight), self.ineqs)

    def key(self):
        return (self.generators, self.lineality)


def _dedupe_rows(rows):
    seen = []
    keys = set()
    for r in rows:
        if not any(r):
            continue
        k = _linalg.primitive_int(r)
        if k in keys:
            continue
        keys.add(k)
        seen.append(k)
    return seen


def _irredundant(n, gens, lin, ineqs):
    """Equations of the span plus one inequality per facet.

    Faces are determined by their tight generator sets, so the facets are
    the inequalities whose tight sets are maximal among the proper ones.
    """
    span = [list(g) for g in gens] + [list(v) for v in lin]
    if not span:
        return _linalg.nullspace([], n), []
    eqs = _linalg.nullspace(span, n)
    eqs = _linalg.canonical_basis(eqs, n) if eqs else []
    full = (1 << len(gens)) - 1
    tight = {}
    table = _linalg.dot_table([list(h) for h in ineqs], [list(g) for g in gens])
    for h, vals in zip(ineqs, table):
        mask = 0
        for i, val in enumerate(vals):
            if val == 0:
                mask |= 1 << i
        if mask != full and mask not in tight:
            tight[mask] = h
    facets = [h for m, h in tight.items() if not any(o != m and (o & m) == m for o in tight)]
    return eqs, facets


@dataclass(frozen=True)
class PrevarietyFan:
    """Maximal cones of the prevariety plus the deduplicated ray list."""

    cones: tuple
    rays: tuple
    nvars: int

    def to_dict(self) -> dict:
        index = {r: i for i, r in enumerate(self.rays)}
        return {
            "nvars": self.nvars,
            "rays": [list(r) for r in self.rays],
            "cones": [
                {
                    "rays": [index[r] for r in c.rays],
                    "dim": c.dim,
                    "lineality_dim": c.lineality_dim,
                }
                for c in self.cones
            ],
            "pretropisms": [list(r) for r in pretropism_rays(self)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Membership:
    """Where a direction sits in a fan.

    ``kind`` is ``'ray_generator'``, ``'interior_of_cone'`` or ``'outside'``;
    ``rays`` spans the smallest cone holding the direction in its relative interior.
    """

    kind: str
    rays: tuple = ()

    RAY = "ray_generator"
    INTERIOR = "interior_of_cone"
    OUTSIDE = "outside"


def initial_form(p: Polynomial, v: Sequence[int]) -> Polynomial:
    """Sum of the terms of ``p`` whose exponents minimise ``<a, v>``."""
    if p.is_zero():
        raise ValueError("initial form of the zero polynomial")
    if len(v) != p.nvars:
        raise ValueError(f"direction has {len(v)} entries, polynomial has {p.nvars} variables")
    vals = {e: _linalg.dot(e, v) for e in p.terms}
    m = min(vals.values())
    return Polynomial({e: c for e, c in p.terms.items() if vals[e] == m}, p.nvars)


def initial_system(s: PolynomialSystem, v: Sequence[int]) -> PolynomialSystem:
    return PolynomialSystem([initial_form(p, v) for p in s.polys], s.nvars)


def edge_cones(poly: LatticePolytope) -> list:
    """Closed inner normal cones of the edges of ``poly``."""
    n = poly.nvars
    verts = poly.vertices
    out = []
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            a, b = verts[i], verts[j]
            eq = [x - y for x, y in zip(a, b)]
            ineqs = [[x - y for x, y in zip(c, a)] for c in verts if c != a and c != b]
            cone = Cone.from_h(n, [eq], ineqs)
            if cone.dim == n - 1:
                out.append(cone)
    return out


def _maximal(cones):
    cones = sorted(cones, key=lambda c: (-c.dim, c.key()))
    kept = []
    for c in cones:
        probe = c.relative_interior_point()
        if not any(k.contains(probe) and k.contains_cone(c) for k in kept):
            kept.append(c)
    return kept


def prevariety(polytopes: Sequence[LatticePolytope]) -> PrevarietyFan:
    """Fan of directions at which no polytope has a single-point minimal face."""
    polytopes = list(polytopes)
    if not polytopes:
        raise ValueError("need at least one polytope")
    n = polytopes[0].nvars
    if any(p.nvars != n for p in polytopes):
        raise ValueError("polytopes live in different dimensions")
    # fewest edges first keeps the intermediate cone count small; the result is order independent
    order = sorted(range(len(polytopes)), key=lambda i: (len(polytopes[i].vertices), i))
    cones = None
    for idx in order:
        ec = edge_cones(polytopes[idx])
        if cones is None:
            cones = _maximal({c.key(): c for c in ec}.values())
            continue
        found = {}
        for c in cones:
            for e in ec:
                gens = c._refined_generators(e)
                if gens is None:
                    d = c.intersect(e)
                elif not gens or (gens, ()) in found:
                    continue
                else:
                    d = c._from_generators(e, gens)
                if not d.generators and not d.lineality:
                    continue
                found.setdefault(d.key(), d)
        cones = _maximal(found.values())
        if not cones:
            break
    cones = sorted(cones or [], key=lambda c: (c.dim, c.rays))
    rays = sorted({r for c in cones for r in c.rays})
    return PrevarietyFan(tuple(cones), tuple(rays), n)


def system_prevariety(s: PolynomialSystem) -> PrevarietyFan:
    return prevariety([newton_polytope(p) for p in s.polys])


def pretropism_rays(fan: PrevarietyFan) -> list:
    """Fan rays with positive first coordinate, lexicographically sorted."""
    return sorted(primitive(r) for r in fan.rays if r[0] > 0)


def interior_membership(fan: PrevarietyFan, v: Sequence[int]) -> Membership:
    """Classify ``v`` as a ray generator, a relative-interior point of a cone, or outside."""
    v = tuple(int(x) for x in v)
    if not any(v):
        raise ValueError("zero direction")
    if len(v) != fan.nvars:
        raise ValueError("dimension mismatch")
    for c in fan.cones:
        if not c.contains(v):
            continue
        face = c.minimal_face(v)
        if not face.lineality and len(face.generators) == 1:
            return Membership(Membership.RAY, face.generators)
        return Membership(Membership.INTERIOR, face.rays)
    return Membership(Membership.OUTSIDE, ())


def faces_have_two_points(polytopes, v) -> bool:
    return all(len(face_for(p, v, "min").points) >= 2 for p in polytopes)
