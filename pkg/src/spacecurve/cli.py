"""Command-line interface.

Exit codes: 0 success, 1 other failure, 2 parse error, 3 dimension
mismatch, 4 no torus solution at the requested ray, 5 every end-game path
inconclusive.  Data goes to stdout (or ``--out``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .homotopy import CONVERGED, INCONCLUSIVE, Config, run_curve
from .mixedvol import degree_bound, degree_decomposition, mixed_volume
from .geometry import newton_polytope
from .polycore import GaussianRational, ParseError, parse_system
from .puiseux import (
    DegenerateInitialSystem,
    NoTorusSolution,
    PuiseuxExpansion,
    SeriesError,
    certify,
    extend_series,
    leading_terms,
    sample_curve,
    write_samples_csv,
)
from .tropical import interior_membership, pretropism_rays, system_prevariety

log = logging.getLogger("spacecurve")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_NO_TORUS = 4
EXIT_INCONCLUSIVE = 5

VOLATILE_KEYS = ("timestamp", "wall_time")


class DimensionError(ValueError):
    pass


class CommandFailed(RuntimeError):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    command: str
    input_sha256: str
    config: dict
    version: str = __version__
    timestamp: str = ""
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "command": self.command,
            "input_sha256": self.input_sha256,
            "config": self.config,
            "version": self.version,
            "timestamp": self.timestamp,
            "wall_time": self.wall_time,
        }
        d.update(self.extra)
        return d


def strip_volatile(doc: dict) -> dict:
    """Copy of an output document without the manifest fields that vary run to run."""
    doc = json.loads(json.dumps(doc))
    man = doc.get("manifest", {})
    for k in VOLATILE_KEYS:
        man.pop(k, None)
    return doc


# ---------------------------------------------------------------- helpers

def _int_vector(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _number(text: str):
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        pass
    try:
        return complex(text.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _pin(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError("pin must look like xJ=VALUE")
    name, value = text.split("=", 1)
    name = name.strip()
    if not name.startswith("x") or not name[1:].isdigit() or int(name[1:]) < 1:
        raise argparse.ArgumentTypeError(f"bad variable in pin: {name!r}")
    return int(name[1:]) - 1, _number(value)


def _coef_str(c) -> str:
    if isinstance(c, GaussianRational):
        return str(c.re) if c.im == 0 else str(c)
    if isinstance(c, Fraction):
        return str(c)
    if c is None:
        return "free"
    z = complex(c)
    return f"{z.real:.12g}{z.imag:+.12g}i"


def _read_system(path: str):
    raw = Path(path).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    return parse_system(raw.decode("utf-8")), digest


def _config(args) -> Config:
    kw = {"master_seed": args.seed}
    for name in ("r", "s0", "max_winding", "max_steps", "jobs"):
        if getattr(args, name, None) is not None:
            kw[name] = getattr(args, name)
    return Config(**kw)


# ---------------------------------------------------------------- commands

def cmd_prevariety(args, s):
    fan = system_prevariety(s)
    result = fan.to_dict()
    if args.classify:
        result["classification"] = {
            ",".join(map(str, v)): {
                "kind": (m := interior_membership(fan, v)).kind,
                "rays": [list(r) for r in m.rays],
            }
            for v in args.classify
        }
    lines = [f"pretropisms: {' '.join('(' + ','.join(map(str, r)) + ')' for r in pretropism_rays(fan))}",
             f"cones: {len(fan.cones)}, rays: {len(fan.rays)}"]
    for key, val in result.get("classification", {}).items():
        lines.append(f"({key}): {val['kind']} " + " ".join("(" + ",".join(map(str, r)) + ")" for r in val["rays"]))
    return result, "\n".join(lines) + "\n", {}


def _default_pin(s, ray, pin):
    if pin is not None:
        return pin
    return 0, Fraction(1)


def cmd_series(args, s):
    ray = args.ray
    if len(ray) != s.nvars:
        raise DimensionError(f"ray has {len(ray)} entries, system has {s.nvars} variables")
    if ray[0] <= 0:
        raise DimensionError("ray must have a positive first coordinate")
    pin = _default_pin(s, ray, args.pin)
    cfg = _config(args)
    try:
        leads = leading_terms(s, ray, pin=pin, precision=args.precision, cfg=cfg)
    except NoTorusSolution as exc:
        raise CommandFailed(
            f"{exc}; the ray is not a tropism, try `spacecurve endgame` to locate hidden tropisms",
            EXIT_NO_TORUS,
        )
    branches = []
    text = []
    for lead in leads:
        try:
            e = extend_series(s, ray, lead, args.order, pin=pin, precision=args.precision)
        except SeriesError as exc:
            branches.append({"leading": [_coef_str(c) for c in lead], "error": str(exc)})
            text.append(f"leading {tuple(_coef_str(c) for c in lead)}: {exc}")
            continue
        if args.normalize is not None:
            e = e.renormalize(args.normalize[0], args.normalize[1])[0]
        cert = certify(e, s)
        branches.append({"expansion": e.to_dict(), "certificate": cert.to_dict()})
        text.append(str(e))
        text.append(f"vanishing orders {list(cert.orders)} (required {list(cert.required)}): "
                    + ("certified" if cert.passed else "NOT certified"))
        text.append("")
    if branches and all("error" in b for b in branches):
        raise CommandFailed("; ".join(b["error"] for b in branches), EXIT_FAILURE)
    result = {"ray": list(ray), "pin": {"coordinate": pin[0] + 1, "value": _coef_str(pin[1])},
              "branches": branches}
    return result, "\n".join(text) + "\n", {}


def cmd_endgame(args, s):
    if len(s) < s.nvars - 1:
        raise DimensionError(f"{len(s)} equations in {s.nvars} unknowns do not define a curve")
    cfg = _config(args)
    rays = None
    dec = None
    if len(s) == s.nvars - 1:
        rays = pretropism_rays(system_prevariety(s))
        dec = degree_decomposition(s, rays)
    rep = run_curve(s, cfg, check_noether=args.noether, decomposition=dec)
    for w in rep.warnings:
        log.warning(w)
    statuses = [r.status for r in rep.results]
    if statuses and all(st == INCONCLUSIVE for st in statuses):
        raise CommandFailed("every path was inconclusive", EXIT_INCONCLUSIVE)
    result = rep.to_dict(with_samples=args.samples)
    result["status_counts"] = {st: statuses.count(st) for st in sorted(set(statuses))}
    lines = [f"paths: {rep.path_count}"]
    for g in rep.groups:
        lines.append(f"tropism ({','.join(map(str, g.tropism))}) winding {g.winding}: {g.multiplicity} paths")
    other = [st for st in statuses if st != CONVERGED]
    if other:
        lines.append(f"not converged: {len(other)} ({', '.join(sorted(set(other)))})")
    return result, "\n".join(lines) + "\n", {"config": cfg.to_dict()}


def cmd_degree(args, s):
    if len(s) != s.nvars - 1:
        raise DimensionError(f"degree needs n-1 polynomials in n variables; got {len(s)} in {s.nvars}")
    bound = degree_bound(s)
    dec = degree_decomposition(s, pretropism_rays(system_prevariety(s)))
    result = {"degree_bound": bound, "decomposition": dec.to_dict()}
    lines = [f"degree bound: {bound}"]
    lines += [f"  ({','.join(map(str, r))}): {w}" for r, w in dec.entries]
    lines.append(f"  total: {dec.total}")
    return result, "\n".join(lines) + "\n", {}


def cmd_mixedvol(args, s):
    if len(s) != s.nvars:
        raise DimensionError(f"mixed volume needs n polynomials in n variables; got {len(s)} in {s.nvars}")
    mv = mixed_volume([newton_polytope(p) for p in s.polys])
    return {"mixed_volume": mv}, f"mixed volume: {mv}\n", {}


def cmd_certify(args, s):
    doc = json.loads(Path(args.expansion).read_text())
    if "expansion" in doc:
        doc = doc["expansion"]
    elif "result" in doc and "branches" in doc["result"]:
        doc = doc["result"]["branches"][args.branch]["expansion"]
    e = PuiseuxExpansion.from_dict(doc)
    if e.nvars != s.nvars:
        raise DimensionError("expansion and system have different numbers of variables")
    cert = certify(e, s, tol=args.tol)
    text = (f"vanishing orders {list(cert.orders)} (required {list(cert.required)}): "
            + ("certified" if cert.passed else "NOT certified") + "\n")
    return cert.to_dict(), text, {}


def cmd_sample(args, s):
    series_result, _, _ = cmd_series(args, s)
    branch = next((b for b in series_result["branches"] if "expansion" in b), None)
    if branch is None:
        raise CommandFailed("no expansion to sample", EXIT_FAILURE)
    e = PuiseuxExpansion.from_dict(branch["expansion"])
    samples = sample_curve(e, args.t_min, args.t_max, args.count)
    buf = io.StringIO()
    write_samples_csv(samples, buf)
    result = {"expansion": branch["expansion"], "count": len(samples)}
    return result, buf.getvalue(), {"csv": True}


COMMANDS = {
    "prevariety": cmd_prevariety,
    "series": cmd_series,
    "endgame": cmd_endgame,
    "degree": cmd_degree,
    "mixedvol": cmd_mixedvol,
    "certify": cmd_certify,
    "sample": cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spacecurve", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="polynomial system (.pol)")
        p.add_argument("--json", action="store_true", help="emit JSON with a run manifest")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("-v", "--verbose", action="store_true")

    def series_opts(p):
        p.add_argument("--ray", type=_int_vector, required=True, help="direction, e.g. 2,1,0")
        p.add_argument("--order", type=int, default=6, help="truncation degree in t")
        p.add_argument("--pin", type=_pin, help="normalization, e.g. x1=2 (default x1=1)")
        p.add_argument("--precision", type=int, default=53, help="bits for numeric coefficients")
        p.add_argument("--normalize", type=_pin,
                       help="rescale t afterwards so that xJ's leading coefficient is VALUE (real root preferred)")

    p = sub.add_parser("prevariety", help="tropical prevariety and pretropisms")
    common(p)
    p.add_argument("--classify", type=_int_vector, action="append", default=[],
                   help="report where a direction lies in the fan (repeatable)")

    p = sub.add_parser("series", help="Puiseux series along a ray")
    common(p)
    series_opts(p)

    p = sub.add_parser("endgame", help="polyhedral end game on all slice paths")
    common(p)
    p.add_argument("--r", type=float, help="geometric sample ratio (default 0.4)")
    p.add_argument("--s0", type=float, help="first sample distance to the end (default 0.1)")
    p.add_argument("--max-winding", dest="max_winding", type=int, help="largest winding number tried")
    p.add_argument("--max-steps", dest="max_steps", type=int, help="geometric samples per path (default 60)")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--samples", action="store_true", help="include per-path samples in JSON")
    p.add_argument("--noether", action="store_true", help="check slice counts at a second gamma")

    p = sub.add_parser("degree", help="degree bound and its split over pretropisms")
    common(p)

    p = sub.add_parser("mixedvol", help="mixed volume of the Newton polytopes")
    common(p)

    p = sub.add_parser("certify", help="substitute a saved expansion into the system")
    common(p)
    p.add_argument("--expansion", required=True, help="JSON from `series --json` or an expansion object")
    p.add_argument("--branch", type=int, default=0, help="branch index in a series document")
    p.add_argument("--tol", type=float, default=1e-8, help="relative zero tolerance for numeric input")

    p = sub.add_parser("sample", help="CSV points of a truncated series")
    common(p)
    series_opts(p)
    p.add_argument("--t-min", dest="t_min", type=float, default=0.0)
    p.add_argument("--t-max", dest="t_max", type=float, default=1.0)
    p.add_argument("--count", type=int, default=50)
    return parser


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    start = time.perf_counter()
    try:
        s, digest = _read_system(args.file)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        result, text, extra = COMMANDS[args.command](args, s)
    except DimensionError as exc:
        print(f"dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except CommandFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DegenerateInitialSystem as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    config = extra.get("config") or {"master_seed": args.seed}
    manifest = RunManifest(
        command=args.command,
        input_sha256=digest,
        config=config,
        timestamp=datetime.now(timezone.utc).isoformat(),
        wall_time=round(time.perf_counter() - start, 6),
        extra={"argv": [a for a in (argv if argv is not None else sys.argv[1:]) if a != "--json"]},
    )
    if args.json:
        doc = {"manifest": manifest.to_dict(), "result": result}
        _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    else:
        _emit(text, args.out)
        if args.out and extra.get("csv"):
            Path(args.out + ".manifest.json").write_text(
                json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
