"""Path tracking for the moving-slice homotopy and the polyhedral end game.

The curve ``f(x) = 0`` (n-1 equations, n unknowns) is cut by the plane
``x1 = (1 - t) * gamma``.  Writing ``s = 1 - t`` the slice is ``x1 = s * gamma``
and the end game samples the paths at ``s_k = s0 * r**k``.  Per-coordinate
slopes of ``log|x_i|`` against ``log s`` converge to the leading exponents;
their denominators give the winding number.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Sequence

import mpmath
import numpy as np

from .geometry import primitive
from .polycore import GaussianRational, Polynomial, PolynomialSystem

log = logging.getLogger(__name__)

__all__ = [
    "Config",
    "SliceHomotopy",
    "PathSample",
    "EndgameResult",
    "TropismGroup",
    "CurveReport",
    "TrackingError",
    "solve_square",
    "solve_slice",
    "track_path",
    "endgame",
    "endgame_trajectory",
    "estimate_winding",
    "run_curve",
]

CONVERGED = "converged"
DIVERGED = "diverged"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Config:
    master_seed: int = 0
    r: float = 0.4
    s0: float = 0.1
    newton_tolerance: float = 1e-8
    max_winding: int = 8
    condition_128: float = 1e8
    condition_256: float = 1e16
    max_steps: int = 60
    max_track_steps: int = 4000
    agreement_tolerance: float = 1e-3
    direction_tolerance: float = 1e-8
    divergence_threshold: float = 1e8
    min_s: float = 1e-40
    jobs: int = 1

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise ValueError("r must lie in (0, 1)")
        if not 0 < self.s0 < 1:
            raise ValueError("s0 must lie in (0, 1)")
        if not self.condition_128 < self.condition_256:
            raise ValueError("precision thresholds must increase")
        if self.max_winding < 1:
            raise ValueError("max_winding must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


class TrackingError(RuntimeError):
    pass


# ---------------------------------------------------------------- evaluation

def _exact_or_complex(c):
    return c if isinstance(c, GaussianRational) else complex(c)


class _System:
    """Fast evaluation of a square polynomial map and its Jacobian.

    Double precision goes through numpy with one shared monomial table;
    higher precision loops over the terms in mpmath.
    """

    def __init__(self, polys: Sequence[Polynomial], nvars: int):
        self.polys = list(polys)
        self.n = nvars
        self.m = len(self.polys)
        derivs = [[p.derivative(j) for j in range(nvars)] for p in self.polys]
        monos = {}
        for p in self.polys + [d for row in derivs for d in row]:
            for e in p.terms:
                monos.setdefault(e, len(monos))
        exps = list(monos) or [(0,) * nvars]
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), nvars)
        self.maxdeg = int(self.exps.max()) if self.exps.size else 0
        self.F = np.zeros((self.m, len(exps)), dtype=complex)
        self.J = np.zeros((self.m * nvars, len(exps)), dtype=complex)
        for i, p in enumerate(self.polys):
            for e, c in p.terms.items():
                self.F[i, monos[e]] = complex(c)
            for j in range(nvars):
                for e, c in derivs[i][j].terms.items():
                    self.J[i * nvars + j, monos[e]] = complex(c)
        self._terms = [[(e, _exact_or_complex(c)) for e, c in p.terms.items()] for p in self.polys]
        self._dterms = [[[(e, _exact_or_complex(c)) for e, c in d.terms.items()] for d in row] for row in derivs]
        self._mp_cache = {}
        self._cols = np.arange(nvars)

    def _monomials(self, x):
        pw = np.empty((self.maxdeg + 1, self.n), dtype=complex)
        pw[0] = 1.0
        for k in range(1, self.maxdeg + 1):
            pw[k] = pw[k - 1] * x
        return np.prod(pw[self.exps, self._cols], axis=1)

    def eval(self, x):
        mono = self._monomials(x)
        return self.F @ mono, (self.J @ mono).reshape(self.m, self.n)

    def _mp_terms(self, prec):
        if prec not in self._mp_cache:
            with mpmath.workprec(prec):
                def conv(c):
                    return c.to_mpc() if isinstance(c, GaussianRational) else mpmath.mpc(c)
                terms = [[(e, conv(c)) for e, c in t] for t in self._terms]
                dterms = [[[(e, conv(c)) for e, c in d] for d in row] for row in self._dterms]
            self._mp_cache[prec] = (terms, dterms)
        return self._mp_cache[prec]

    def eval_mp(self, x, prec):
        terms, dterms = self._mp_terms(prec)
        with mpmath.workprec(prec):
            powers = {}

            def mono(e):
                val = mpmath.mpc(1)
                for j, k in enumerate(e):
                    if k:
                        key = (j, k)
                        if key not in powers:
                            powers[key] = x[j] ** k
                        val *= powers[key]
                return val

            f = mpmath.matrix(self.m, 1)
            jac = mpmath.matrix(self.m, self.n)
            for i in range(self.m):
                f[i] = mpmath.fsum(c * mono(e) for e, c in terms[i])
                for j in range(self.n):
                    if dterms[i][j]:
                        jac[i, j] = mpmath.fsum(c * mono(e) for e, c in dterms[i][j])
            return f, jac


def _restrict_first(polys: Sequence[Polynomial], value) -> list:
    """Substitute ``x1 = value`` and drop the first variable."""
    out = []
    for p in polys:
        terms = {}
        for e, c in p.terms.items():
            coef = c * (value ** e[0]) if e[0] else c
            terms[e[1:]] = terms[e[1:]] + coef if e[1:] in terms else coef
        out.append(Polynomial(terms, p.nvars - 1))
    return out


# ---------------------------------------------------------------- homotopies

class _TotalDegree:
    """``(1 - tau) * kappa * (y_i^d_i - rho_i) + tau * F(y)``."""

    def __init__(self, target: _System, degrees, rho, kappa):
        self.target = target
        self.deg = np.array(degrees)
        self.rho = np.array(rho, dtype=complex)
        self.kappa = kappa
        self.n = target.n

    def __call__(self, y, tau):
        f, jf = self.target.eval(y)
        g = y ** self.deg - self.rho
        jg = np.diag(self.deg * y ** (self.deg - 1))
        h = (1 - tau) * self.kappa * g + tau * f
        hx = (1 - tau) * self.kappa * jg + tau * jf
        hp = f - self.kappa * g
        return h, hx, hp

    def mp(self, y, tau, prec):
        f, jf = self.target.eval_mp(y, prec)
        with mpmath.workprec(prec):
            kappa = mpmath.mpc(self.kappa)
            n = self.n
            h = mpmath.matrix(n, 1)
            hx = mpmath.matrix(n, n)
            hp = mpmath.matrix(n, 1)
            for i in range(n):
                d = int(self.deg[i])
                g = y[i] ** d - mpmath.mpc(self.rho[i])
                h[i] = (1 - tau) * kappa * g + tau * f[i]
                hp[i] = f[i] - kappa * g
                for j in range(n):
                    hx[i, j] = tau * jf[i, j]
                hx[i, i] += (1 - tau) * kappa * d * y[i] ** (d - 1)
            return h, hx, hp


class SliceHomotopy:
    """``f(x) = 0`` together with ``x1 = s * gamma``, parametrised by ``s = 1 - t``."""

    def __init__(self, system: PolynomialSystem, gamma: complex):
        if gamma == 0:
            raise ValueError("gamma must be nonzero")
        if len(system) != system.nvars - 1:
            raise ValueError("slice homotopy needs n-1 polynomials in n variables")
        self.system = system
        self.gamma = complex(gamma)
        self.n = system.nvars
        self._f = _System(system.polys, system.nvars)

    def __call__(self, x, s):
        f, jf = self._f.eval(x)
        h = np.empty(self.n, dtype=complex)
        h[:-1] = f
        h[-1] = x[0] - s * self.gamma
        hx = np.zeros((self.n, self.n), dtype=complex)
        hx[:-1] = jf
        hx[-1, 0] = 1.0
        hp = np.zeros(self.n, dtype=complex)
        hp[-1] = -self.gamma
        return h, hx, hp

    def mp(self, x, s, prec):
        f, jf = self._f.eval_mp(x, prec)
        with mpmath.workprec(prec):
            n = self.n
            h = mpmath.matrix(n, 1)
            hx = mpmath.matrix(n, n)
            hp = mpmath.matrix(n, 1)
            for i in range(n - 1):
                h[i] = f[i]
                for j in range(n):
                    hx[i, j] = jf[i, j]
            h[n - 1] = x[0] - s * mpmath.mpc(self.gamma)
            hx[n - 1, 0] = 1
            hp[n - 1] = -mpmath.mpc(self.gamma)
            return h, hx, hp

    def start_residual(self, x) -> float:
        h, _, _ = self(np.asarray(x, dtype=complex), 1.0)
        return float(np.max(np.abs(h)))


# ---------------------------------------------------------------- tracking

def _scaled_condition(hx, x) -> float:
    scale = np.maximum(np.abs(x), 1e-300)
    a = hx * scale[None, :]
    rows = np.maximum(np.abs(a).max(axis=1), 1e-300)
    a = a / rows[:, None]
    try:
        c = float(np.linalg.cond(a))
    except np.linalg.LinAlgError:
        return math.inf
    return c if math.isfinite(c) else math.inf


def _newton(H, x, p, tol, maxit=6):
    """Newton on ``H(., p)``; success when the componentwise relative step drops below ``tol``."""
    prev = math.inf
    for _ in range(maxit):
        h, hx, _ = H(x, p)
        try:
            dx = np.linalg.solve(hx, -h)
        except np.linalg.LinAlgError:
            return x, False
        x = x + dx
        rel = float(np.max(np.abs(dx) / np.maximum(np.abs(x), 1e-300)))
        if not math.isfinite(rel):
            return x, False
        if rel < tol:
            return x, True
        if rel > 0.5 * prev and prev < 1e-2:
            # stalled at the noise floor
            return x, rel < 1e-6
        prev = rel
    return x, False


def _track(H, x, p0, p1, cfg: Config, first_step=None, corrector_tol=1e-6):
    """Euler predictor, Newton corrector, adaptive step from ``p0`` to ``p1``."""
    x = np.array(x, dtype=complex)
    span = p1 - p0
    if span == 0:
        return x, 0
    direction = 1.0 if span > 0 else -1.0
    h = abs(first_step) if first_step else abs(span) / 20
    h_max = abs(span) / 4
    p = p0
    steps = 0
    good = 0
    while (p1 - p) * direction > 0:
        if steps >= cfg.max_track_steps:
            raise TrackingError("exceeded max_track_steps")
        steps += 1
        h = min(h, abs(p1 - p))
        pn = p + direction * h
        if abs(p1 - pn) < 1e-14 * max(1.0, abs(p1)):
            pn = p1
        _, hx, hp = H(x, p)
        try:
            dxdp = np.linalg.solve(hx, -hp)
        except np.linalg.LinAlgError:
            dxdp = np.zeros_like(x)
        pred = x + (pn - p) * dxdp
        xc, ok = _newton(H, pred, pn, corrector_tol, maxit=4)
        if ok:
            rel_jump = float(np.max(np.abs(xc - pred) / np.maximum(np.abs(xc), 1e-300)))
            ok = rel_jump < 0.1
        if ok and np.all(np.isfinite(xc)):
            x, p = xc, pn
            good += 1
            if good >= 3:
                h = min(h * 1.6, h_max)
                good = 0
            if np.max(np.abs(x)) > cfg.divergence_threshold:
                raise TrackingError("path diverged")
        else:
            good = 0
            h *= 0.5
            if h < 1e-14 * max(1.0, abs(p0), abs(p1)):
                raise TrackingError("step size underflow")
    x, _ = _newton(H, x, p1, 1e-13, maxit=4)
    return x, steps


def _mp_vector(x, prec):
    with mpmath.workprec(prec):
        return mpmath.matrix([mpmath.mpc(complex(v)) if not isinstance(v, mpmath.mpc) else v for v in x])


def _newton_mp(H, x, p, prec, maxit=30):
    with mpmath.workprec(prec):
        x = _mp_vector(x, prec)
        p = mpmath.mpf(p)
        tol = mpmath.mpf(2) ** (-(prec - 10))
        for _ in range(maxit):
            h, hx, _ = H.mp(x, p, prec)
            try:
                dx = mpmath.lu_solve(hx, -h)
            except ZeroDivisionError:
                return x, False
            x = x + dx
            rel = max(abs(dx[i]) / max(abs(x[i]), mpmath.mpf(10) ** -300) for i in range(len(x)))
            if rel < tol:
                return x, True
        return x, False


def _track_mp(H, x, p0, p1, prec, cfg: Config):
    """Multiprecision version of :func:`_track` for badly conditioned stretches."""
    with mpmath.workprec(prec):
        x = _mp_vector(x, prec)
        p0 = mpmath.mpf(p0)
        p1 = mpmath.mpf(p1)
        span = p1 - p0
        direction = 1 if span > 0 else -1
        h = abs(span) / 8
        p = p0
        steps = 0
        good = 0
        while (p1 - p) * direction > 0:
            if steps >= cfg.max_track_steps:
                raise TrackingError("exceeded max_track_steps")
            steps += 1
            h = min(h, abs(p1 - p))
            pn = p + direction * h
            _, hx, hp = H.mp(x, p, prec)
            try:
                dxdp = mpmath.lu_solve(hx, -hp)
            except ZeroDivisionError:
                dxdp = mpmath.matrix(len(x), 1)
            pred = x + (pn - p) * dxdp
            ok = False
            xc = pred
            for _ in range(5):
                hh, hxx, _ = H.mp(xc, pn, prec)
                try:
                    dx = mpmath.lu_solve(hxx, -hh)
                except ZeroDivisionError:
                    break
                xc = xc + dx
                rel = max(abs(dx[i]) / max(abs(xc[i]), mpmath.mpf(10) ** -300) for i in range(len(x)))
                if rel < mpmath.mpf(10) ** -12:
                    ok = True
                    break
            if ok:
                jump = max(abs(xc[i] - pred[i]) / max(abs(xc[i]), mpmath.mpf(10) ** -300) for i in range(len(x)))
                ok = jump < mpmath.mpf("0.1")
            if ok:
                x, p = xc, pn
                good += 1
                if good >= 3:
                    h = min(h * mpmath.mpf("1.6"), abs(span) / 4)
                    good = 0
            else:
                good = 0
                h /= 2
                if h < abs(span) * mpmath.mpf(10) ** -20:
                    raise TrackingError("step size underflow")
        x, _ = _newton_mp(H, x, p1, prec)
        return x


# ---------------------------------------------------------------- square solving

def _rng(cfg: Config, *stream):
    return np.random.default_rng(np.random.SeedSequence([cfg.master_seed, *stream]))


def _unit_complex(rng) -> complex:
    return complex(np.exp(2j * np.pi * rng.random()))


def _dedupe(points, tol=1e-6):
    out = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= tol * (1 + np.max(np.abs(q))) for q in out):
            out.append(p)
    return out


@dataclass
class SquareSolution:
    point: np.ndarray
    status: str
    path: int


def solve_square(polys: Sequence[Polynomial], nvars: int, cfg: Config = Config(), stream=(0,)):
    """All isolated solutions of a square system by a total-degree homotopy.

    Returns one :class:`SquareSolution` per start path, status one of
    ``'regular'``, ``'singular'``, ``'diverged'`` or ``'failed'``.
    """
    polys = list(polys)
    if len(polys) != nvars:
        raise ValueError(f"square system expected, got {len(polys)} equations in {nvars} unknowns")
    if nvars == 0:
        return []
    target = _System(polys, nvars)
    degrees = [max(p.degree(), 0) for p in polys]
    if any(d == 0 for d in degrees):
        # a nonzero constant equation has no solutions; a zero one is not square
        if any(p.is_zero() for p in polys):
            raise ValueError("zero polynomial in a square system")
        return []
    rng = _rng(cfg, *stream)
    rho = [_unit_complex(rng) for _ in range(nvars)]
    kappa = _unit_complex(rng)
    H = _TotalDegree(target, degrees, rho, kappa)
    roots = [np.array([rho[i] ** (1.0 / d) * np.exp(2j * np.pi * k / d) for k in range(d)])
             for i, d in enumerate(degrees)]
    results = []
    grids = np.meshgrid(*roots, indexing="ij")
    starts = np.stack([g.ravel() for g in grids], axis=1)
    for idx, y0 in enumerate(starts):
        try:
            y, _ = _track(H, y0, 0.0, 1.0, cfg)
        except TrackingError:
            results.append(SquareSolution(np.full(nvars, np.nan, dtype=complex), "diverged", idx))
            continue
        f, jf = target.eval(y)
        resid = float(np.max(np.abs(f)))
        scale = 1 + float(np.max(np.abs(y)))
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > cfg.divergence_threshold:
            results.append(SquareSolution(y, "diverged", idx))
        elif resid > 1e-6 * scale ** max(degrees):
            results.append(SquareSolution(y, "failed", idx))
        else:
            cond = _scaled_condition(jf, y)
            status = "singular" if cond > 1e10 else "regular"
            results.append(SquareSolution(y, status, idx))
    return results


def finite_solutions(results, include_singular=True, tol=1e-6):
    keep = [r.point for r in results if r.status == "regular" or (include_singular and r.status == "singular")]
    return _dedupe(keep, tol)


def _square_up(system: PolynomialSystem, cfg: Config) -> PolynomialSystem:
    """Random exact combinations bringing an overdetermined curve system to n-1 equations."""
    n = system.nvars
    if len(system) == n - 1:
        return system
    if len(system) < n - 1:
        raise ValueError("fewer than n-1 equations: the solution set is not a curve")
    rng = _rng(cfg, 7)
    polys = list(system.polys)
    combos = []
    for i in range(n - 1):
        acc = Polynomial.zero(n)
        for p in polys:
            re_, im_ = (int(v) for v in rng.integers(-999, 1000, size=2))
            acc = acc + p * GaussianRational(Fraction(re_, 1000), Fraction(im_, 1000))
        combos.append(acc)
    return PolynomialSystem(combos, n)


def solve_slice(s: PolynomialSystem, gamma: complex, cfg: Config = Config()) -> list:
    """Isolated points of the curve on the plane ``x1 = gamma``, as full coordinate vectors."""
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    square = _square_up(s, cfg)
    n = s.nvars
    g = GaussianRational.coerce(gamma)
    if g is None:
        square_num = [p.to_numeric() for p in square.polys]
        restricted = _restrict_first(square_num, complex(gamma))
    else:
        restricted = _restrict_first(list(square.polys), g)
    results = solve_square(restricted, n - 1, cfg, stream=(1, hash(complex(gamma)) & 0xFFFF))
    pts = finite_solutions(results, include_singular=False)
    out = []
    check = _System(s.polys, n)
    for y in pts:
        x = np.concatenate([[complex(gamma)], y])
        f, _ = check.eval(x)
        if float(np.max(np.abs(f))) <= 1e-6 * (1 + float(np.max(np.abs(x)))) ** 4:
            out.append(x)
    failed = sum(1 for r in results if r.status == "failed")
    if failed:
        log.warning("%d of %d slice paths failed to converge", failed, len(results))
    out.sort(key=lambda v: tuple(np.round(np.concatenate([v.real, v.imag]), 8)))
    return out


# ---------------------------------------------------------------- end game

@dataclass
class PathSample:
    s: float
    t: float
    x: list
    condition_estimate: float
    precision_bits: int

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "t": self.t,
            "x": [[complex(v).real, complex(v).imag] for v in self.x],
            "condition_estimate": self.condition_estimate,
            "precision_bits": self.precision_bits,
        }


@dataclass
class EndgameResult:
    direction: tuple | None
    winding: int | None
    tropism: tuple | None
    leading_coefficients: list
    status: str
    samples: list = field(default_factory=list)
    estimate: list = field(default_factory=list)
    accuracy: float = math.inf
    message: str = ""

    def to_dict(self, with_samples: bool = False) -> dict:
        d = {
            "status": self.status,
            "direction": None if self.direction is None else [str(q) for q in self.direction],
            "winding": self.winding,
            "tropism": None if self.tropism is None else list(self.tropism),
            "leading_coefficients": [[complex(c).real, complex(c).imag] for c in self.leading_coefficients],
            "estimate": list(self.estimate),
            "accuracy": self.accuracy,
            "message": self.message,
        }
        if with_samples:
            d["samples"] = [smp.to_dict() for smp in self.samples]
        return d


def _slopes(samples, r):
    logs = [np.log(np.maximum(np.abs(np.array([complex(v) for v in smp.x])), 1e-300)) for smp in samples]
    lr = math.log(r)
    return [(logs[k + 1] - logs[k]) / lr for k in range(len(logs) - 1)]


def _aitken(seq):
    out = []
    for k in range(len(seq) - 2):
        a0, a1, a2 = seq[k], seq[k + 1], seq[k + 2]
        d1, d2 = a1 - a0, a2 - a1
        den = d2 - d1
        if abs(d2) < 1e-13 or abs(den) < 1e-13 * max(1.0, abs(a2)):
            out.append(a2)
        else:
            out.append(a2 - d2 * d2 / den)
    return out


def _rationalize(values, max_den):
    return [Fraction(float(v)).limit_denominator(max_den) for v in values]


def estimate_winding(slopes, cfg: Config = Config()):
    """Winding number from per-coordinate slope sequences, or ``None`` if not yet stable.

    Each sequence is accelerated with Aitken's process; once the last three
    accelerated values of every coordinate agree within
    ``cfg.agreement_tolerance`` they are rounded to fractions with
    denominator at most ``cfg.max_winding`` and the winding number is the
    least common multiple of those denominators.
    """
    seqs = [list(map(float, s)) for s in slopes]
    if not seqs or any(len(s) < 3 for s in seqs):
        return None
    tol = cfg.agreement_tolerance
    finals = []
    for s in seqs:
        acc = _aitken(s)
        tail = acc[-3:] if len(acc) >= 3 else None
        if tail is None:
            # too short to accelerate: fall back to the raw tail
            tail = s[-3:]
        if max(tail) - min(tail) > tol:
            return None
        finals.append(tail[-1])
    fracs = _rationalize(finals, cfg.max_winding)
    if any(abs(float(q) - v) > tol for q, v in zip(fracs, finals)):
        return None
    return reduce(math.lcm, (q.denominator for q in fracs), 1)


def _richardson(seq, omega, r, levels):
    """Top entries of the Richardson table removing error ratios ``r**(j/omega)``."""
    rows = [list(seq)]
    for j in range(1, levels + 1):
        q = r ** (j / omega)
        prev = rows[-1]
        if len(prev) < 2:
            break
        rows.append([(prev[k + 1] - q * prev[k]) / (1 - q) for k in range(len(prev) - 1)])
    return rows[-1]


class _Analysis:
    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.omega = None
        self.direction = None
        self.estimate = None
        self.accuracy = math.inf
        self.done = False

    def update(self, samples):
        cfg = self.cfg
        slopes = _slopes(samples, cfg.r)
        if len(slopes) < 3:
            return
        per_coord = [[w[i] for w in slopes] for i in range(len(slopes[0]))]
        omega = estimate_winding(per_coord, cfg)
        if omega is None and self.omega is None:
            return
        if omega is not None:
            self.omega = omega
        omega = self.omega
        levels = min(4, len(slopes) - 1)
        tops = [_richardson(seq, omega, cfg.r, levels) for seq in per_coord]
        est = [t[-1] for t in tops]
        if self.direction is None or omega is not None:
            fr = _rationalize(est, cfg.max_winding)
            if all(abs(float(q) - v) <= cfg.agreement_tolerance for q, v in zip(fr, est)):
                if reduce(math.lcm, (q.denominator for q in fr), 1) == omega:
                    self.direction = tuple(fr)
        self.estimate = est
        if self.direction is not None:
            err = max(abs(v - float(q)) for v, q in zip(est, self.direction))
            spread = max((abs(t[-1] - t[-2]) for t in tops if len(t) >= 2), default=math.inf)
            self.accuracy = max(err, spread) if math.isfinite(spread) else err
            if self.accuracy < cfg.direction_tolerance:
                self.done = True


def _condition_bits(cond, cfg: Config) -> int:
    if cond > cfg.condition_256:
        return 256
    if cond > cfg.condition_128:
        return 128
    return 53


def _finish(analysis: _Analysis, samples, cfg: Config, message="") -> EndgameResult:
    if analysis.direction is None:
        return EndgameResult(None, None, None, [], INCONCLUSIVE, samples,
                             list(analysis.estimate or []), math.inf, message or "no stable direction")
    omega = analysis.omega
    direction = analysis.direction
    tropism = primitive([int(q * omega) for q in direction]) if any(direction) else None
    last = samples[-1]
    lead = []
    for xi, q in zip(last.x, direction):
        with mpmath.workprec(max(last.precision_bits, 53)):
            val = mpmath.mpc(xi) / mpmath.mpf(last.s) ** mpmath.mpf(float(q))
        lead.append(complex(val))
    status = DIVERGED if any(q < 0 for q in direction) else CONVERGED
    return EndgameResult(direction, omega, tropism, lead, status, samples,
                         [float(v) for v in analysis.estimate], float(analysis.accuracy), message)


def track_path(h: SliceHomotopy, start, cfg: Config = Config(), s_targets=None) -> list:
    """Track one path of ``h`` from ``s = 1`` through the given ``s`` targets.

    Returns one :class:`PathSample` per target (the start point first).
    Precision switches to 128 or 256 bits once the scaled condition number
    passes the configured thresholds and never drops back.
    """
    x = np.asarray(start, dtype=complex)
    if h.start_residual(x) > max(cfg.newton_tolerance, 1e-8) * (1 + float(np.max(np.abs(x)))):
        raise ValueError("start point does not satisfy the homotopy at t = 0")
    if s_targets is None:
        s_targets = [cfg.s0 * cfg.r ** k for k in range(cfg.max_steps + 1)]
    samples = []
    _, hx, _ = h(x, 1.0)
    cond = _scaled_condition(hx, x)
    samples.append(PathSample(1.0, 0.0, list(x), max(cond, 1.0), 53))
    for smp in _walk(h, x, 1.0, s_targets, cfg, cond):
        samples.append(smp)
    return samples


def _walk(h, x, s, targets, cfg: Config, cond):
    """Generator of samples along ``targets``; stops quietly on tracking failure."""
    prec = _condition_bits(cond, cfg)
    xm = None
    for s_next in targets:
        try:
            if prec == 53:
                x, _ = _track(h, x, s, s_next, cfg)
                _, hx, _ = h(x, s_next)
                cond = _scaled_condition(hx, x)
                want = _condition_bits(cond, cfg)
                if want > 53:
                    prec = want
                    xm, ok = _newton_mp(h, x, s_next, prec)
                    x_out = [xm[i] for i in range(len(x))]
                else:
                    x_out = list(x)
            else:
                xm = _track_mp(h, xm if xm is not None else x, s, s_next, prec, cfg)
                xd = np.array([complex(v) for v in xm])
                _, hx, _ = h(xd, s_next)
                cond = _scaled_condition(hx, xd)
                want = _condition_bits(cond, cfg)
                if want > prec:
                    prec = want
                    xm, _ = _newton_mp(h, xm, s_next, prec)
                x = xd
                x_out = [xm[i] for i in range(len(x))]
        except TrackingError as exc:
            log.debug("tracking stopped at s=%g: %s", s, exc)
            return
        s = s_next
        yield PathSample(float(s), 1.0 - float(s), x_out, max(cond, 1.0), prec)


def endgame(h: SliceHomotopy, start, cfg: Config = Config()) -> EndgameResult:
    """Track a slice path into ``x1 = 0`` and extrapolate its direction and winding number."""
    x = np.asarray(start, dtype=complex)
    if h.start_residual(x) > 1e-6 * (1 + float(np.max(np.abs(x)))):
        raise ValueError("start point does not satisfy the homotopy at t = 0")
    targets = []
    s = cfg.s0
    for _ in range(cfg.max_steps + 1):
        if s < cfg.min_s:
            break
        targets.append(s)
        s *= cfg.r
    analysis = _Analysis(cfg)
    samples = []
    _, hx, _ = h(x, 1.0)
    cond = _scaled_condition(hx, x)
    for smp in _walk(h, x, 1.0, targets, cfg, cond):
        samples.append(smp)
        analysis.update(samples)
        if analysis.done:
            break
    message = "" if analysis.done else "sampling budget exhausted before reaching direction_tolerance"
    if len(samples) < len(targets) and not analysis.done:
        message = "path tracking stopped early"
    return _finish(analysis, samples, cfg, message if analysis.direction is not None else "")


def endgame_trajectory(path: Callable[[float], Sequence[complex]], cfg: Config = Config()) -> EndgameResult:
    """Run the end-game extrapolation on samples ``path(s_k)`` of a known trajectory."""
    analysis = _Analysis(cfg)
    samples = []
    s = cfg.s0
    for _ in range(cfg.max_steps + 1):
        samples.append(PathSample(s, 1.0 - s, list(path(s)), 1.0, 53))
        analysis.update(samples)
        if analysis.done:
            break
        s *= cfg.r
    return _finish(analysis, samples, cfg)


# ---------------------------------------------------------------- whole curve

@dataclass
class TropismGroup:
    tropism: tuple
    winding: int
    paths: list
    leading_coefficients: list

    @property
    def multiplicity(self) -> int:
        return len(self.paths)

    def to_dict(self) -> dict:
        return {
            "tropism": list(self.tropism),
            "winding": self.winding,
            "paths": list(self.paths),
            "multiplicity": self.multiplicity,
            "leading_coefficients": [
                [[complex(c).real, complex(c).imag] for c in lc] for lc in self.leading_coefficients
            ],
        }


@dataclass
class CurveReport:
    gamma: complex
    path_count: int
    results: list
    groups: list
    warnings: list = field(default_factory=list)
    degree_check: dict | None = None

    def group(self, tropism):
        tropism = tuple(tropism)
        return next((g for g in self.groups if g.tropism == tropism), None)

    def to_dict(self, cfg: Config | None = None, with_samples: bool = False) -> dict:
        d = {
            "gamma": [self.gamma.real, self.gamma.imag],
            "path_count": self.path_count,
            "groups": [g.to_dict() for g in self.groups],
            "paths": [r.to_dict(with_samples) for r in self.results],
            "warnings": list(self.warnings),
        }
        if cfg is not None:
            d["config"] = cfg.to_dict()
        if self.degree_check is not None:
            d["degree_check"] = self.degree_check
        return d

    def to_json(self, cfg: Config | None = None, with_samples: bool = False) -> str:
        return json.dumps(self.to_dict(cfg, with_samples), sort_keys=True)


def _endgame_task(args):
    system, gamma, start, cfg = args
    return endgame(SliceHomotopy(system, gamma), start, cfg)


def group_results(results) -> list:
    groups = {}
    for idx, res in enumerate(results):
        if res.status != CONVERGED or res.tropism is None:
            continue
        key = (res.tropism, res.winding)
        if key not in groups:
            groups[key] = TropismGroup(res.tropism, res.winding, [], [])
        groups[key].paths.append(idx)
        groups[key].leading_coefficients.append(res.leading_coefficients)
    return sorted(groups.values(), key=lambda g: (g.tropism, g.winding))


def run_curve(s: PolynomialSystem, cfg: Config = Config(), check_noether: bool = False,
              decomposition=None) -> CurveReport:
    """Slice the curve at a random ``x1 = gamma`` and run the end game on every point.

    Results are grouped by tropism.  ``decomposition`` (a degree
    decomposition) adds a cross-check of the path count against its total.
    """
    n = s.nvars
    if len(s) < n - 1:
        raise ValueError("fewer than n-1 equations")
    rng = _rng(cfg, 3)
    gamma = _unit_complex(rng)
    gamma_q = GaussianRational(Fraction(gamma.real).limit_denominator(10 ** 6),
                               Fraction(gamma.imag).limit_denominator(10 ** 6))
    gamma = complex(gamma_q)
    warnings = []
    points = solve_slice(s, gamma_q, cfg)
    if check_noether:
        other = _unit_complex(rng)
        other_q = GaussianRational(Fraction(other.real).limit_denominator(10 ** 6),
                                   Fraction(other.imag).limit_denominator(10 ** 6))
        if len(solve_slice(s, other_q, cfg)) != len(points):
            warnings.append("Noether position suspect: slice counts differ between two gammas")
            log.warning(warnings[-1])
    square = _square_up(s, cfg)
    tasks = [(square, gamma, p, cfg) for p in points]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_endgame_task, tasks))
    else:
        results = [_endgame_task(t) for t in tasks]
    groups = group_results(results)
    check = None
    if decomposition is not None:
        check = {"degree_total": decomposition.total, "paths": len(points),
                 "consistent": decomposition.total == len(points)}
        if not check["consistent"]:
            warnings.append(f"path count {len(points)} differs from degree total {decomposition.total}")
    return CurveReport(gamma, len(points), results, groups, warnings, check)
