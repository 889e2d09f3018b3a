"""Puiseux series of a space curve along a tropism.

A branch with tropism ``v`` is written in an integer parameter ``t`` as

    x1 = c1 * t^v1,    x_i = t^v_i * (c_i + a_i1 t + a_i2 t^2 + ...)

so any ramification is carried by ``v1``.  Leading coefficients solve the
initial system; the tail is found order by order from linear systems.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import mpmath
import numpy as np

from . import _linalg
from .geometry import transform_system, unimodular_extend
from .homotopy import Config, finite_solutions, solve_square
from .polycore import GaussianRational, Polynomial, PolynomialSystem
from .tropical import initial_form, initial_system

__all__ = [
    "Tropism",
    "PuiseuxExpansion",
    "CurveSample",
    "Certificate",
    "SeriesError",
    "NoTorusSolution",
    "DegenerateInitialSystem",
    "leading_terms",
    "extend_series",
    "certify",
    "sample_curve",
    "write_samples_csv",
    "reduced_initial_system",
]

SINGULAR_MESSAGE = "singular leading root; ramification beyond one level unsupported"


class SeriesError(ValueError):
    pass


class NoTorusSolution(SeriesError):
    pass


class DegenerateInitialSystem(SeriesError):
    pass


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class Tropism:
    direction: tuple
    winding: int = 1

    def __post_init__(self):
        d = tuple(int(x) for x in self.direction)
        object.__setattr__(self, "direction", d)
        if not d or d[0] <= 0:
            raise ValueError("tropism needs a positive first entry")
        if reduce(math.gcd, (abs(x) for x in d), 0) != 1:
            raise ValueError(f"{d} is not primitive")
        if self.winding < 1:
            raise ValueError("winding number must be positive")


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction, GaussianRational))


def _plain(c):
    """Exact coefficients as Fraction when real; numeric ones untouched."""
    if isinstance(c, GaussianRational):
        return c.re if c.im == 0 else c
    if isinstance(c, int):
        return Fraction(c)
    return c


def _coef_json(c):
    c = _plain(c)
    if isinstance(c, Fraction):
        return [c.numerator, c.denominator]
    z = complex(c)
    return [z.real, z.imag]


def _coef_from_json(c):
    a, b = c
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return complex(a, b)


@dataclass(frozen=True)
class PuiseuxExpansion:
    """Truncated series; ``coords[i]`` lists ``(exponent, coefficient)`` with nonzero coefficients."""

    tropism: Tropism
    normalization: tuple  # (coordinate index, value)
    coords: tuple
    order: int

    def __post_init__(self):
        v = self.tropism.direction
        if len(self.coords) != len(v):
            raise ValueError("one coordinate list per direction entry")
        for i, terms in enumerate(self.coords):
            exps = [e for e, _ in terms]
            if not terms or exps[0] != v[i]:
                raise ValueError(f"coordinate {i + 1} must start at exponent {v[i]}")
            if any(b <= a for a, b in zip(exps, exps[1:])):
                raise ValueError("exponents must increase")
        if len(self.coords[0]) != 1:
            raise ValueError("first coordinate must be a single term")

    @property
    def nvars(self) -> int:
        return len(self.coords)

    @property
    def exact(self) -> bool:
        return all(_is_exact(c) for terms in self.coords for _, c in terms)

    def coefficient(self, i: int, exp: int):
        """Coefficient of ``t^exp`` in coordinate ``i`` (0-based); zero when absent."""
        for e, c in self.coords[i]:
            if e == exp:
                return c
        return Fraction(0) if self.exact else 0j

    def leading(self) -> tuple:
        return tuple(terms[0][1] for terms in self.coords)

    def evaluate(self, t) -> tuple:
        return tuple(sum(complex(c) * t ** e for e, c in terms) for terms in self.coords)

    def rescale(self, lam) -> "PuiseuxExpansion":
        """Reparametrise ``t -> lam * t``: the coefficient of ``t^e`` picks up ``lam^e``."""
        coords = tuple(tuple((e, _plain(c * lam ** e)) for e, c in terms) for terms in self.coords)
        j, val = self.normalization
        return PuiseuxExpansion(self.tropism, (j, _plain(coords[j][0][1])), coords, self.order)

    def renormalize(self, coord: int, value) -> list:
        """All rescalings whose leading coefficient in ``coord`` equals ``value``.

        Real rational rescalings come first; the list has ``v[coord]`` entries
        when roots of unity are allowed.
        """
        k = self.tropism.direction[coord]
        if k == 0:
            raise ValueError("coordinate with zero exponent cannot fix the normalization")
        ratio = value / self.coords[coord][0][1]
        out = []
        r = _exact_root(ratio, k)
        if r is not None:
            out.append(self.rescale(r))
        z = complex(ratio)
        for m in range(k):
            lam = abs(z) ** (1.0 / k) * np.exp(1j * (np.angle(z) + 2 * np.pi * m) / k)
            if r is not None and abs(lam - complex(r)) < 1e-9 * (1 + abs(lam)):
                continue
            out.append(self.rescale(complex(lam)))
        return out

    def to_dict(self) -> dict:
        j, val = self.normalization
        return {
            "tropism": list(self.tropism.direction),
            "winding": self.tropism.winding,
            "normalization": {"coordinate": j + 1, "value": _coef_json(val)},
            "coords": [[[e, _coef_json(c)] for e, c in terms] for terms in self.coords],
            "order": self.order,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PuiseuxExpansion":
        coords = tuple(tuple((int(e), _coef_from_json(c)) for e, c in terms) for terms in d["coords"])
        norm = d.get("normalization") or {"coordinate": 1, "value": [1, 1]}
        trop = Tropism(tuple(d["tropism"]), int(d.get("winding", d["tropism"][0])))
        return cls(trop, (norm["coordinate"] - 1, _coef_from_json(norm["value"])), coords, int(d["order"]))

    def __str__(self):
        lines = []
        for i, terms in enumerate(self.coords):
            parts = []
            for e, c in terms:
                coef = _plain(c)
                if isinstance(coef, Fraction):
                    cs = str(coef)
                elif isinstance(coef, GaussianRational):
                    cs = f"({coef})"
                else:
                    z = complex(coef)
                    cs = f"({z.real:.12g}{z.imag:+.12g}i)"
                parts.append(cs if e == 0 else f"{cs}*t^{e}")
            lines.append(f"x{i + 1} = " + " + ".join(parts))
        return "\n".join(lines)


def _exact_root(q, k):
    """Rational ``k``-th root of an exact real ``q`` if one exists."""
    q = _plain(q)
    if not isinstance(q, Fraction):
        return None
    if q < 0 and k % 2 == 0:
        return None
    sign = -1 if q < 0 else 1
    a = abs(q)

    def iroot(x):
        r = round(x ** (1.0 / k)) if x else 0
        for c in (r - 1, r, r + 1):
            if c >= 0 and c ** k == x:
                return c
        return None

    num, den = iroot(a.numerator), iroot(a.denominator)
    if num is None or den is None:
        return None
    return sign * Fraction(num, den)


@dataclass(frozen=True)
class CurveSample:
    t: float
    point: tuple


# ---------------------------------------------------------------- helpers

def _validate_direction(v, n):
    v = tuple(int(x) for x in v)
    if len(v) != n:
        raise ValueError(f"direction has {len(v)} entries, system has {n} variables")
    if v[0] <= 0:
        raise ValueError("direction must have a positive first entry")
    return v


def _zero(c) -> bool:
    if isinstance(c, (GaussianRational, Fraction, int)):
        return not c
    return c == 0


def _gauss_solve(a, b, numeric: bool):
    """Solve a square system by elimination; returns None when singular."""
    n = len(a)
    m = [list(row) + [bi] for row, bi in zip(a, b)]
    scale = max((abs(complex(x)) for row in a for x in row), default=1.0) or 1.0
    for c in range(n):
        if numeric:
            piv = max(range(c, n), key=lambda r: abs(m[r][c]))
            if abs(m[piv][c]) <= 1e-12 * scale:
                return None
        else:
            piv = next((r for r in range(c, n) if not _zero(m[r][c])), None)
            if piv is None:
                return None
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        for r in range(n):
            if r != c and not _zero(m[r][c]):
                f = m[r][c] / p
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def _series_mul(a, b, top):
    out = [0] * (top + 1)
    for i in range(min(len(a), top + 1)):
        x = a[i]
        if _zero_any(x):
            continue
        for j in range(min(len(b), top + 1 - i)):
            y = b[j]
            if not _zero_any(y):
                out[i + j] = out[i + j] + x * y
    return out


def _zero_any(x) -> bool:
    if isinstance(x, Polynomial):
        return x.is_zero()
    return _zero(x)


def _substituted_levels(poly: Polynomial, v, series, top):
    """Coefficients of ``t^(m + k)``, k = 0..top, of ``poly`` at the given series.

    ``series[i][k]`` is the coefficient of ``t^(v_i + k)`` in coordinate ``i``;
    ``m`` is the minimum of ``<v, a>`` over the support.
    """
    shifts = {e: _linalg.dot(e, v) for e in poly.terms}
    m = min(shifts.values())
    out = [0] * (top + 1)
    powers = {}

    def power(i, p):
        if (i, p) not in powers:
            if p == 1:
                powers[(i, p)] = series[i][: top + 1]
            else:
                powers[(i, p)] = _series_mul(power(i, p - 1), series[i], top)
        return powers[(i, p)]

    for e, c in poly.terms.items():
        sh = shifts[e] - m
        if sh > top:
            continue
        prod = [1] + [0] * (top - sh)
        for i, p in enumerate(e):
            if p:
                prod = _series_mul(prod, power(i, p), top - sh)
        for k, val in enumerate(prod):
            if not _zero_any(val):
                out[sh + k] = out[sh + k] + c * val
    return m, out


# ---------------------------------------------------------------- leading terms

def reduced_initial_system(s: PolynomialSystem, v) -> tuple:
    """Initial system after ``x = y^U`` (first row of ``U`` is ``v``) with ``y1`` removed.

    Returns ``(system in y2..yn, U, removed factor exponents)``.
    """
    v = _validate_direction(v, s.nvars)
    u = unimodular_extend(v)
    ini = initial_system(s, v)
    ys, factors = transform_system(ini, u)
    polys = []
    for p in ys.polys:
        if p.degree_in(0) > 0:
            raise SeriesError("y1 survives the transform; direction is not normal to the initial forms")
        polys.append(p.map_exponents(lambda e: e[1:], s.nvars - 1))
    return PolynomialSystem(polys, s.nvars - 1), u, factors


def _random_gaussian(rng):
    a, b = (int(x) for x in rng.integers(-97, 98, size=2))
    if a == 0 and b == 0:
        a = 1
    return GaussianRational(Fraction(a, 97), Fraction(b, 97))


def _monic(p: Polynomial) -> Polynomial:
    lead = p.ordered_terms()[0][1]
    return p * (1 / lead) if p.exact else p * (1.0 / complex(lead))


def _reconstruct(z: complex, max_den=10 ** 6):
    re = Fraction(z.real).limit_denominator(max_den)
    im = Fraction(z.imag).limit_denominator(max_den)
    return GaussianRational(re, im)


def _refine_mp(eqs, point, prec):
    """Newton polish of a numeric root at ``prec`` bits."""
    n = len(point)
    with mpmath.workprec(prec):
        x = mpmath.matrix([mpmath.mpc(complex(c)) for c in point])
        jac = [[p.derivative(j) for j in range(n)] for p in eqs]
        for _ in range(20):
            pt = [x[i] for i in range(n)]
            f = mpmath.matrix([p.evaluate(pt, prec) for p in eqs])
            jm = mpmath.matrix([[d.evaluate(pt, prec) for d in row] for row in jac])
            try:
                dx = mpmath.lu_solve(jm, -f)
            except ZeroDivisionError:
                break
            x += dx
            if mpmath.norm(dx) <= mpmath.mpf(2) ** (-prec + 8) * (1 + mpmath.norm(x)):
                break
        return [x[i] for i in range(n)]


def _solve_reduced(eqs, u, cfg: Config, precision: int):
    """Torus roots of ``eqs`` in ``u`` unknowns (square or overdetermined)."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.master_seed, 11]))
    square = eqs
    if len(eqs) > u:
        square = []
        for _ in range(u):
            acc = Polynomial.zero(u)
            for p in eqs:
                acc = acc + p * (_random_gaussian(rng) if p.exact else complex(_random_gaussian(rng)))
            square.append(acc)
    if u == 1:
        p = square[0]
        d = p.degree()
        coeffs = [p.coefficient((d - k,)) for k in range(d + 1)]
        with mpmath.workprec(max(precision, 53) + 20):
            mc = [c.to_mpc() if isinstance(c, GaussianRational) else mpmath.mpc(c) for c in coeffs]
            while mc and mc[0] == 0:
                mc.pop(0)
            roots = mpmath.polyroots(mc, maxsteps=200, extraprec=precision + 40) if len(mc) > 1 else []
        pts = [[_chop(complex(r))] if precision <= 53 else [r] for r in roots]
    else:
        results = solve_square(square, u, cfg, stream=(12,))
        pts = [[_chop(complex(c)) for c in p] for p in finite_solutions(results, include_singular=True)]
        if precision > 53:
            pts = [_refine_mp(square, p, precision) for p in pts]
    out = []
    for p in pts:
        mag = max(abs(complex(c)) for c in p)
        if any(abs(complex(c)) <= 1e-9 * (1 + mag) for c in p):
            continue
        resid = max(abs(complex(q.evaluate([complex(c) for c in p]))) for q in eqs)
        scale = max(sum(abs(complex(c)) for c in q.terms.values()) for q in eqs)
        if resid > 1e-6 * scale * (1 + mag) ** max(q.degree() for q in eqs):
            continue
        out.append(p)
    return out


def _chop(z: complex, rel=1e-14) -> complex:
    mag = abs(z)
    re = 0.0 if abs(z.real) <= rel * mag else z.real
    im = 0.0 if abs(z.imag) <= rel * mag else z.imag
    return complex(re, im)


def _exactify(eqs, p):
    """Exact Gaussian rationals when they solve ``eqs`` exactly; else the numeric point."""
    if not all(q.exact for q in eqs):
        return p
    cand = [_reconstruct(complex(c)) for c in p]
    if all(not q.evaluate(cand) for q in eqs):
        return [_plain(c) for c in cand]
    return p


def leading_terms(s: PolynomialSystem, v, pin=(0, 1), precision: int = 53, cfg: Config = Config()) -> list:
    """Leading coefficient vectors of the branches with direction ``v``.

    ``pin = (j, value)`` fixes the leading coefficient of coordinate ``j``
    (0-based), which removes the scaling freedom ``t -> lam t``.  Entries
    for coordinates that do not occur in the initial system are ``None``.
    Raises :class:`NoTorusSolution` when the initial system has no root with
    all coordinates nonzero.
    """
    n = s.nvars
    v = _validate_direction(v, n)
    j, value = pin
    if not 0 <= j < n:
        raise ValueError("pinned coordinate out of range")
    if v[j] == 0:
        raise ValueError("a coordinate with zero exponent cannot carry the normalization")
    if _zero(value):
        raise ValueError("pinned coefficient must be nonzero")
    ini = initial_system(s, v)
    exact = ini.exact and GaussianRational.coerce(value) is not None
    polys = list(ini.polys) if exact else [p.to_numeric() for p in ini.polys]
    const = Polynomial.constant(GaussianRational.coerce(value) if exact else complex(value), n)
    polys = [p.substitute({j: const}) for p in polys]
    appear = sorted(set().union(*(p.variables() for p in polys)))
    unknowns = [i for i in appear if i != j]
    pos = {i: k for k, i in enumerate(unknowns)}
    u = len(unknowns)
    eqs = []
    for p in polys:
        if p.is_zero():
            continue
        if p.degree() == 0:
            raise NoTorusSolution(f"initial system at {v} is inconsistent: no torus solution")
        q = _monic(p.map_exponents(lambda e: tuple(e[i] for i in unknowns), u))
        if q not in eqs:
            eqs.append(q)
    base = [None] * n
    base[j] = _plain(GaussianRational.coerce(value)) if exact else complex(value)
    if u == 0:
        return [base]
    if len(eqs) < u:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.master_seed, 13]))
        slices = []
        for _ in range(u - len(eqs)):
            terms = {tuple(int(k == m) for k in range(u)): _random_gaussian(rng) for m in range(u)}
            terms[(0,) * u] = _random_gaussian(rng)
            lin = Polynomial(terms, u)
            slices.append(lin if eqs[0].exact else lin.to_numeric())
        witness = _solve_reduced(eqs + slices, u, cfg, 53) if eqs else [[1.0] * u]
        if not witness:
            raise NoTorusSolution(f"initial system at {v} has no torus solution")
        raise DegenerateInitialSystem(
            f"initial system at {v} has a positive-dimensional torus solution set; "
            "pin a coordinate that occurs in it"
        )
    roots = _solve_reduced(eqs, u, cfg, precision)
    if not roots:
        raise NoTorusSolution(f"initial system at {v} has no torus solution")
    out = []
    keys = set()
    for r in roots:
        r = _exactify(eqs, r)
        vec = list(base)
        for i in unknowns:
            vec[i] = r[pos[i]]
        key = tuple(np.round([complex(c).real for c in r] + [complex(c).imag for c in r], 7))
        if key in keys:
            continue
        keys.add(key)
        out.append(tuple(vec))
    # positive real parts first, so the all-positive branch leads when there is one
    out.sort(key=lambda vec: tuple((0, 0) if c is None else (-round(complex(c).real, 9), -round(complex(c).imag, 9))
                                   for c in vec))
    return out


# ---------------------------------------------------------------- extension

def _initial_jacobian(s, v, lead, exact):
    rows = []
    for p in s.polys:
        ini = initial_form(p, v)
        if not exact:
            ini = ini.to_numeric()
        rows.append([ini.derivative(i).evaluate(lead) for i in range(1, s.nvars)])
    return rows


def extend_series(s: PolynomialSystem, v, leading, order: int, pin=None,
                  lookahead: int = 3, precision: int = 53) -> PuiseuxExpansion:
    """Series along ``v`` truncated at ``t^order`` in every coordinate.

    ``leading`` may contain ``None`` for coefficients not fixed at leading
    order; those are then determined together with the tail (exact
    arithmetic only).  ``pin`` only records the normalization.
    """
    n = s.nvars
    v = _validate_direction(v, n)
    if len(s) < n - 1:
        raise ValueError("series extension needs at least n-1 equations in n unknowns")
    leading = list(leading)
    if len(leading) != n:
        raise ValueError("one leading coefficient per coordinate")
    if order < max(v):
        raise ValueError(f"order {order} is below the leading exponents {v}")
    known = [c for c in leading if c is not None]
    exact = s.exact and all(_is_exact(c) for c in known)
    if pin is None:
        j = next(i for i, c in enumerate(leading) if c is not None)
        pin = (j, leading[j])
    if exact:
        lead = [None if c is None else GaussianRational.coerce(c) for c in leading]
        system = s
    else:
        if None in leading:
            raise SeriesError("undetermined leading coefficients need exact arithmetic")
        lead = [complex(c) if precision <= 53 else mpmath.mpc(c) for c in leading]
        system = s.to_numeric()
    if any(c is not None and _zero(c) for c in lead):
        raise SeriesError("leading coefficients must be nonzero")
    top = order - min(v[1:])
    if None not in lead and len(s) == n - 1:
        jac = _initial_jacobian(system, v, lead, exact)
        if _gauss_solve(jac, [0] * (n - 1), not exact) is not None:
            coeffs = _extend_regular(system, v, lead, top, jac, exact, precision)
        elif exact:
            coeffs = _extend_general(system, v, lead, top, lookahead)
        else:
            raise SeriesError(SINGULAR_MESSAGE)
    elif exact:
        coeffs = _extend_general(system, v, lead, top, lookahead)
    else:
        raise SeriesError("overdetermined numeric extension is not supported; use exact input")
    coords = []
    for i in range(n):
        terms = []
        for k, c in enumerate(coeffs[i]):
            e = v[i] + k
            if e > order or _zero(c):
                continue
            terms.append((e, _plain(c)))
        coords.append(tuple(terms))
    pj, pval = pin
    pval = coords[pj][0][1] if coords[pj] else pval
    return PuiseuxExpansion(Tropism(v, v[0]), (pj, pval), tuple(coords), order)


def _extend_regular(system, v, lead, top, jac, exact, precision):
    n = system.nvars
    series = [[lead[0]] + [0] * top] + [[lead[i]] + [0] * top for i in range(1, n)]
    ctx = mpmath.workprec(precision) if precision > 53 and not exact else None
    if ctx:
        ctx.__enter__()
    try:
        for p in system.polys:
            _, lv = _substituted_levels(p, v, series, 0)
            if not _close_to_zero(lv[0], p, exact):
                raise SeriesError("leading coefficients do not solve the initial system")
        for k in range(1, top + 1):
            resid = [_substituted_levels(p, v, series, k)[1][k] for p in system.polys]
            step = _gauss_solve(jac, [-r for r in resid], not exact)
            if step is None:
                raise SeriesError(SINGULAR_MESSAGE)
            for i in range(1, n):
                series[i][k] = step[i - 1]
    finally:
        if ctx:
            ctx.__exit__(None, None, None)
    return series


def _close_to_zero(val, p, exact):
    if exact:
        return _zero(val)
    scale = sum(abs(complex(c)) for c in p.terms.values())
    return abs(complex(val)) <= 1e-8 * max(scale, 1.0)


def _subst(p: Polynomial, values: dict) -> Polynomial:
    if not values:
        return p
    out = {}
    for e, c in p.terms.items():
        coef = c
        ne = list(e)
        for idx, val in values.items():
            if e[idx]:
                coef = coef * val ** e[idx]
                ne[idx] = 0
        ne = tuple(ne)
        out[ne] = out[ne] + coef if ne in out else coef
    return Polynomial(out, p.nvars)


def _rref_exact(rows, ncols):
    """Row reduction over Gaussian rationals; each row has ``ncols`` coefficients plus a constant."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def _extend_general(system, v, lead, top, lookahead):
    """Undetermined coefficients with deferred determination (exact arithmetic).

    Every unknown coefficient becomes a ring variable; the level equations
    are fed to a propagation loop that repeatedly solves whatever is linear.
    """
    n = system.nvars
    deep = top + lookahead
    index = {}
    for i in range(n):
        if lead[i] is None:
            index[(i, 0)] = len(index)
    for k in range(1, deep + 1):
        for i in range(1, n):
            index[(i, k)] = len(index)
    nu = len(index)

    def entry(i, k):
        if (i, k) in index:
            return Polynomial.variable(index[(i, k)], nu)
        if k == 0:
            return Polynomial.constant(lead[i], nu)
        return Polynomial.zero(nu)

    series = [[entry(0, 0)] + [Polynomial.zero(nu)] * deep]
    series += [[entry(i, k) for k in range(deep + 1)] for i in range(1, n)]
    pending = []
    for p in system.polys:
        lifted = Polynomial({e: c for e, c in p.terms.items()}, n)
        _, levels = _substituted_levels(lifted, v, series, deep)
        pending.extend(q if isinstance(q, Polynomial) else Polynomial.constant(q, nu) for q in levels)
    values = {}
    while True:
        pending = [_subst(q, values) for q in pending]
        pending = [q for q in pending if not q.is_zero()]
        for q in pending:
            if q.degree() == 0:
                raise SeriesError("inconsistent linear system: direction is not a tropism for these leading terms")
        # nonlinear monomials become extra columns, eliminated first
        monos = set()
        for q in pending:
            monos.update(e for e in q.terms if any(e))
        nonlin = sorted((e for e in monos if sum(e) > 1), reverse=True)
        lin = sorted((e for e in monos if sum(e) == 1), reverse=True)
        cols = nonlin + lin
        pos = {e: k for k, e in enumerate(cols)}
        rows = []
        for q in pending:
            row = [GaussianRational(0)] * (len(cols) + 1)
            for e, c in q.terms.items():
                if any(e):
                    row[pos[e]] = c
                else:
                    row[-1] = -c
            rows.append(row)
        red, pivots = _rref_exact(rows, len(cols))
        for row in red[len(pivots):]:
            if row[-1]:
                raise SeriesError("inconsistent linear system: direction is not a tropism for these leading terms")
        found = {}
        first_lin = len(nonlin)
        for row, pc in zip(red, pivots):
            if pc < first_lin:
                continue
            if all(not row[c] for c in range(first_lin, len(cols)) if c != pc):
                found[cols[pc].index(1)] = row[-1]
        if not found:
            break
        for var, val in found.items():
            if (var - 0) in values:
                continue
            if any(index.get((i, 0)) == var for i in range(n)) and not val:
                raise SeriesError("a leading coefficient is forced to zero: not a torus branch")
            values[var] = val
    out = [[None] * (top + 1) for _ in range(n)]
    for i in range(n):
        for k in range(top + 1):
            if i == 0 and k > 0:
                out[i][k] = GaussianRational(0)
                continue
            if (i, k) in index:
                var = index[(i, k)]
                if var not in values:
                    raise SeriesError(SINGULAR_MESSAGE)
                out[i][k] = values[var]
            else:
                out[i][k] = lead[i] if k == 0 else GaussianRational(0)
    return out


# ---------------------------------------------------------------- certification

@dataclass
class Certificate:
    orders: tuple  # vanishing order per polynomial (None: zero through ``checked_to``)
    required: tuple
    exact: bool
    checked_to: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return all(o is None or o >= r for o, r in zip(self.orders, self.required))

    def to_dict(self) -> dict:
        return {
            "orders": list(self.orders),
            "required": list(self.required),
            "checked_to": list(self.checked_to),
            "exact": self.exact,
            "passed": self.passed,
        }


def _laurent_mul(a: dict, b: dict) -> dict:
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            out[e] = out[e] + c1 * c2 if e in out else c1 * c2
    return out


def certify(e: PuiseuxExpansion, s: PolynomialSystem, tol: float = 1e-8) -> Certificate:
    """Substitute the truncated series into every polynomial of ``s``.

    The vanishing order is the lowest power of ``t`` with a nonzero
    coefficient (relative magnitude above ``tol`` in numeric mode).  Each
    polynomial must reach ``m_j + order + 1 - max(v_2..v_n)``, where ``m_j``
    is the minimal ``<v, a>`` over its support.
    """
    n = s.nvars
    if e.nvars != n:
        raise ValueError("expansion and system disagree on the number of variables")
    v = e.tropism.direction
    exact = e.exact and s.exact
    coords = []
    for terms in e.coords:
        if exact:
            coords.append({x: GaussianRational.coerce(c) for x, c in terms})
        else:
            coords.append({x: complex(c) for x, c in terms})
    absc = [{x: abs(complex(c)) for x, c in terms} for terms in e.coords]
    orders, required, checked = [], [], []
    vmax = max(v[1:]) if n > 1 else 0
    for p in s.polys:
        m = min(_linalg.dot(a, v) for a in p.terms)
        total, scale = {}, {}
        for a, c in p.terms.items():
            prod, aprod = {0: 1}, {0: 1.0}
            for i, k in enumerate(a):
                for _ in range(k):
                    prod = _laurent_mul(prod, coords[i])
                    if not exact:
                        aprod = _laurent_mul(aprod, absc[i])
            cc = GaussianRational.coerce(c) if exact else complex(c)
            for x, val in prod.items():
                total[x] = total[x] + cc * val if x in total else cc * val
            if not exact:
                for x, val in aprod.items():
                    scale[x] = scale.get(x, 0.0) + abs(cc) * val
        if exact:
            nz = [x for x, val in total.items() if val]
        else:
            nz = [x for x, val in total.items() if abs(val) > tol * max(scale.get(x, 0.0), 1e-300)]
        orders.append(min(nz) if nz else None)
        required.append(m + e.order + 1 - vmax)
        checked.append(max(total) if total else m)
    return Certificate(tuple(orders), tuple(required), exact, tuple(checked))


# ---------------------------------------------------------------- sampling

def sample_curve(e: PuiseuxExpansion, t_min: float, t_max: float, count: int) -> list:
    """Evaluate the truncated series on ``count`` evenly spaced parameter values."""
    if count < 2:
        raise ValueError("count must be at least 2")
    return [CurveSample(float(t), e.evaluate(float(t))) for t in np.linspace(t_min, t_max, count)]


def write_samples_csv(samples: Sequence[CurveSample], fh) -> None:
    """CSV rows ``t, x1_re, x1_im, ..., xn_re, xn_im``."""
    w = csv.writer(fh, lineterminator="\n")
    if not samples:
        return
    n = len(samples[0].point)
    w.writerow(["t"] + [f"x{i + 1}_{part}" for i in range(n) for part in ("re", "im")])
    for smp in samples:
        row = [repr(smp.t)]
        for z in smp.point:
            row += [repr(complex(z).real), repr(complex(z).imag)]
        w.writerow(row)
