"""Exact rational linear algebra and polyhedral-cone conversion.

Everything here works on Python ``int`` / ``Fraction`` lists.  The cone
routine converts an H-description ``{v : E v = 0, A v >= 0}`` into extreme
rays plus a lineality basis with the double description method.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from operator import mul



def dot(a, b):
    return sum(map(mul, a, b))


def dot_table(rows, vecs):
    """Matrix of ``dot(row, vec)``."""
    return [[sum(map(mul, r, v)) for v in vecs] for r in rows]


def primitive_int(vec):
    """Scale a rational vector to the primitive integer vector with the same direction."""
    if all(type(x) is int for x in vec):
        g = reduce(gcd, vec, 0)
        return tuple(x // g for x in vec) if g > 1 else tuple(vec)
    fr = [Fraction(x) for x in vec]
    den = reduce(lcm, (x.denominator for x in fr), 1)
    ints = [int(x * den) for x in fr]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def _int_row(r):
    if all(type(x) is int for x in r):
        return list(r)
    fr = [x if isinstance(x, int) else Fraction(x) for x in r]
    den = reduce(lcm, (x.denominator for x in fr if isinstance(x, Fraction)), 1)
    return [int(x * den) for x in fr]


def _reduce_row(r):
    g = reduce(gcd, r, 0)
    return [x // g for x in r] if g > 1 else r


def _echelon(rows, ncols, full=True):
    """Fraction-free elimination on integer rows; returns (rows, pivots)."""
    m = [_int_row(r) for r in rows if any(r)]
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        p = m[r][c]
        for i in range(r + 1 if not full else 0, len(m)):
            a = m[i][c]
            if i != r and a != 0:
                m[i] = _reduce_row([p * x - a * y for x, y in zip(m[i], m[r])])
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rref(rows, ncols):
    """Reduced row echelon form over Q.  Returns (rows, pivot columns)."""
    m, pivots = _echelon(rows, ncols)
    out = []
    for row, c in zip(m, pivots):
        p = row[c]
        out.append([Fraction(x, p) for x in row])
    return out, pivots


def rank(rows, ncols=None):
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    if ncols is None:
        ncols = len(rows[0])
    return len(_echelon(rows, ncols, full=False)[1])


def nullspace(rows, n):
    """Integer basis (primitive vectors) of ``{v : rows v = 0}``, canonical for fixed input."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    red, piv = _echelon(rows, n)
    pset = set(piv)
    basis = []
    for f in (c for c in range(n) if c not in pset):
        den = reduce(lcm, (abs(row[pc]) for row, pc in zip(red, piv) if row[f]), 1)
        v = [0] * n
        v[f] = den
        for row, pc in zip(red, piv):
            if row[f]:
                v[pc] = -row[f] * den // row[pc]
        basis.append(primitive_int(v))
    return basis


def canonical_basis(vectors, n):
    """Primitive integer rows of the RREF of a spanning set (canonical per subspace)."""
    red, piv = _echelon([list(v) for v in vectors], n)
    out = []
    for row, c in zip(red, piv):
        row = primitive_int(row)
        out.append(row if row[c] > 0 else tuple(-x for x in row))
    return out


def solve(a, b):
    """Solve a square nonsingular system exactly."""
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(a, b)]
    red, piv = rref(aug, n + 1)
    if piv != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [red[i][n] for i in range(n)]


def inverse(a):
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    red, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red[:n]]


def det_int(m):
    """Determinant of an integer matrix by fraction-free (Bareiss) elimination."""
    a = [list(map(int, row)) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if sw is None:
                return 0
            a[k], a[sw] = a[sw], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _independent_rows(rows, k):
    chosen = []
    basis = []
    for i, r in enumerate(rows):
        if rank(basis + [r], k) > len(basis):
            basis.append(r)
            chosen.append(i)
            if len(chosen) == k:
                break
    return chosen


def _dd_pointed(rows, k):
    """Extreme rays of the pointed cone ``{y in Q^k : rows y >= 0}`` (rows has rank k)."""
    first = _independent_rows(rows, k)
    if len(first) < k:
        raise ValueError("cone is not pointed")
    inv = inverse([rows[i] for i in first])
    rays = [primitive_int([inv[r][c] for r in range(k)]) for c in range(k)]
    # zero set of each ray as a bitmask over processed row indices
    zeros = []
    for ray in rays:
        mask = 0
        for i in first:
            if dot(rows[i], ray) == 0:
                mask |= 1 << i
        zeros.append(mask)
    chosen = set(first)
    for i, row in enumerate(rows):
        if i in chosen:
            continue
        vals = [dot(row, ray) for ray in rays]
        pos = [j for j, v in enumerate(vals) if v > 0]
        neg = [j for j, v in enumerate(vals) if v < 0]
        zer = [j for j, v in enumerate(vals) if v == 0]
        new_rays = [rays[j] for j in pos] + [rays[j] for j in zer]
        new_zeros = [zeros[j] for j in pos] + [zeros[j] | (1 << i) for j in zer]
        for p in pos:
            for q in neg:
                common = zeros[p] & zeros[q]
                if bin(common).count("1") < k - 2:
                    continue
                adjacent = True
                for j in range(len(rays)):
                    if j != p and j != q and (zeros[j] & common) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vp, vq = vals[p], vals[q]
                combo = [vp * b - vq * a for a, b in zip(rays[p], rays[q])]
                new_rays.append(primitive_int(combo))
                new_zeros.append(common | (1 << i))
        rays, zeros = new_rays, new_zeros
        if not rays:
            break
    return rays


def incidence(rows, rays):
    """Bitmask per ray of the rows vanishing on it."""
    table = dot_table(rows, rays)
    zeros = []
    for j in range(len(rays)):
        mask = 0
        for i in range(len(rows)):
            if table[i][j] == 0:
                mask |= 1 << i
        zeros.append(mask)
    return zeros


def refine_pointed(n, rays, old_rows, new_rows, zeros=None):
    """Extreme rays after adding ``new_rows v >= 0`` to a pointed cone.

    ``rays`` are the extreme rays of ``{v : old_rows v >= 0}``; equations
    enter as a pair of opposite rows.  ``zeros`` may pass a cached
    :func:`incidence` of ``old_rows`` and ``rays``.
    """
    rows = [list(r) for r in old_rows]
    rays = [tuple(r) for r in rays]
    zeros = list(zeros) if zeros is not None else incidence(rows, rays)
    for row in new_rows:
        i = len(rows)
        rows.append(list(row))
        vals = dot_table([row], rays)[0]
        pos = [j for j, v in enumerate(vals) if v > 0]
        neg = [j for j, v in enumerate(vals) if v < 0]
        if not neg:
            zeros = [z | (1 << i) if v == 0 else z for z, v in zip(zeros, vals)]
            continue
        zer = [j for j, v in enumerate(vals) if v == 0]
        new_rays = [rays[j] for j in pos] + [rays[j] for j in zer]
        new_zeros = [zeros[j] for j in pos] + [zeros[j] | (1 << i) for j in zer]
        for p in pos:
            for q in neg:
                common = zeros[p] & zeros[q]
                if bin(common).count("1") < n - 2:
                    continue
                if any(j != p and j != q and (zeros[j] & common) == common for j in range(len(rays))):
                    continue
                vp, vq = vals[p], vals[q]
                new_rays.append(primitive_int([vp * b - vq * a for a, b in zip(rays[p], rays[q])]))
                new_zeros.append(common | (1 << i))
        rays, zeros = new_rays, new_zeros
        if not rays:
            break
    return sorted(set(rays))


def cone_generators(n, eqs=(), ineqs=()):
    """Extreme rays and lineality basis of ``{v in Q^n : eqs v = 0, ineqs v >= 0}``.

    Rays are primitive integer vectors, sorted; the lineality basis is in
    canonical (RREF) form.  The zero cone gives ``([], [])``.
    """
    eqs = [list(e) for e in eqs if any(e)]
    ineqs = [list(h) for h in ineqs if any(h)]
    lineality = nullspace(eqs + ineqs, n) if (eqs or ineqs) else nullspace([], n)
    if lineality:
        lineality = canonical_basis(lineality, n)
    sub = nullspace(eqs + [list(v) for v in lineality], n)
    k = len(sub)
    if k == 0:
        return [], lineality
    g = [[dot(h, s) for s in sub] for h in ineqs]
    g = [row for row in g if any(row)]
    if not g:
        # only possible for k == 0, guarded above
        raise ValueError("inconsistent cone description")
    rays_y = _dd_pointed(g, k)
    rays = set()
    for y in rays_y:
        v = [sum(y[j] * sub[j][i] for j in range(k)) for i in range(n)]
        rays.add(primitive_int(v))
    return sorted(rays), lineality
