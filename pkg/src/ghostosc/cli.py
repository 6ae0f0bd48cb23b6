"""Command line front end.

Every command writes one JSON object (``config``, ``results``, ``errors``)
or a CSV table with a header row.  Exit status: 0 success, 2 bad
configuration, 3 domain error, 4 invariant failure or cross-check mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from decimal import Decimal, InvalidOperation
from typing import get_type_hints

import numpy as np

from .errors import DomainError, InvariantViolation
from .fock import cross_validate
from .params import ALL_BRANCHES, Branch, ModelParams, classify_domain, derive_aux, derive_aux_degenerate
from .pu_map import ModeAmplitudes, pu_constants, trajectory
from .recurrence import closed_spectrum
from .wavefunction import density_grid, eigenstate, uncertainty

COMMANDS = ("spectrum", "scan", "state", "density", "uncertainty", "classical", "validate", "crosscheck")

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_INVARIANT = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# records

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _parse(text: str, kind):
    if kind is bool:
        return text == "true"
    if kind is str:
        return text
    if text == "":
        return None
    if kind is float or kind == (float | None):
        return float(text)
    return int(text)


class Record:
    """Flat result row that round-trips through CSV and JSON."""

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def to_row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in self.columns()]

    def to_json(self) -> dict:
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                for k, v in asdict(self).items()}

    @classmethod
    def from_row(cls, row: dict):
        hints = get_type_hints(cls)
        return cls(**{c: _parse(row[c], hints[c]) for c in cls.columns()})

    @classmethod
    def from_json(cls, obj: dict):
        return cls(**{c: obj[c] for c in cls.columns()})


@dataclass(frozen=True)
class LevelRecord(Record):
    g: float
    N: int
    n: int
    sign: str
    re_E: float | None
    im_E: float | None
    error: str = ""

    @property
    def label(self):
        return f"N={self.N},n={self.n},{self.sign}"


@dataclass(frozen=True)
class CoeffRecord(Record):
    i: int
    j: int
    re_c: float
    im_c: float


@dataclass(frozen=True)
class DensityRecord(Record):
    x: float
    y: float
    density: float


@dataclass(frozen=True)
class UncertaintyRecord(Record):
    g: float
    state: str
    dx_dpx: float | None
    dy_dpy: float | None
    error: str = ""


@dataclass(frozen=True)
class PhaseRecord(Record):
    t: float
    x: float
    y: float
    px: float
    py: float


@dataclass(frozen=True)
class DomainRecord(Record):
    branch: str
    e0_real: bool
    normalisable: bool
    gamma_map_valid: bool
    degenerate: bool


@dataclass(frozen=True)
class CrossRecord(Record):
    N: int
    n: int
    sign: str
    fock_n: int
    fock_m: int
    re_E_recurrence: float
    im_E_recurrence: float
    E_fock: float
    energy_rel_err: float
    state_err: float
    ok: bool


def _reim(z):
    z = complex(z)
    return z.real, z.imag


# ---------------------------------------------------------------------------
# argument parsing

def parse_range(text: str) -> list[float]:
    """``start:end:step`` with a decimal step; start included, nothing past end."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(Decimal(parts[0]))]
        if len(parts) != 3:
            raise ConfigError(f"range must be start:end:step, got {text!r}")
        start, end, step = (Decimal(s) for s in parts)
    except InvalidOperation:
        raise ConfigError(f"cannot parse number in {text!r}") from None
    if step <= 0:
        raise ConfigError("range step must be positive")
    count = int((end - start) / step) + 1
    return [float(start + k * step) for k in range(max(count, 0))]


def _pair(text, kind, n, name):
    try:
        vals = [kind(s) for s in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse {name} {text!r}") from None
    if len(vals) != n:
        raise ConfigError(f"{name} needs {n} comma-separated values")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ghostosc", description="Exact spectra of the 2D ghost oscillator.")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--nu", type=float, required=True)
    common.add_argument("--Omega", type=float, required=True)
    common.add_argument("--g", required=True, help="value, or start:end:step for scans")
    common.add_argument("--branch", default=None, help="eps,eta, e.g. -1,+1")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")

    level = argparse.ArgumentParser(add_help=False)
    level.add_argument("--N", type=int, default=0)
    level.add_argument("--n", type=int, default=None)
    level.add_argument("--sign", choices=("+", "-", "0"), default=None)

    svg = argparse.ArgumentParser(add_help=False)
    svg.add_argument("--svg", default=None, help="also write an SVG plot here")

    p = sub.add_parser("spectrum", parents=[common], help="levels of one N")
    p.add_argument("--N", type=int, required=True)
    p = sub.add_parser("scan", parents=[common, svg], help="levels N' <= N over a g range")
    p.add_argument("--N", type=int, required=True)
    sub.add_parser("state", parents=[common, level], help="polynomial coefficients of a level")
    p = sub.add_parser("density", parents=[common, level, svg], help="|psi|^2 on a grid")
    p.add_argument("--window", default="-3,3,-3,3")
    p.add_argument("--res", default="61,61")
    p.add_argument("--normalise", action="store_true")
    sub.add_parser("uncertainty", parents=[common, level], help="uncertainty products over g")
    p = sub.add_parser("classical", parents=[common, svg], help="classical phase-space trajectory")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=201)
    p.add_argument("--a", type=complex, default=0.5)
    p.add_argument("--b", type=complex, default=0.5)
    sub.add_parser("validate", parents=[common], help="domain report per branch")
    p = sub.add_parser("crosscheck", parents=[common], help="recurrence vs Fock construction")
    p.add_argument("--N", type=int, default=6, help="largest N checked")
    return ap


# ---------------------------------------------------------------------------
# commands

def _branch(args) -> Branch:
    try:
        return Branch.parse(args.branch) if args.branch else Branch(-1, 1)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _single_g(args) -> float:
    gs = parse_range(args.g)
    if len(gs) != 1:
        raise ConfigError(f"{args.command} takes a single --g value")
    return gs[0]


def _aux(p: ModelParams, b: Branch):
    if p.is_degenerate():
        return derive_aux_degenerate(p, b)
    return derive_aux(p, b)


def _level_selector(args, N):
    if args.sign is None:
        n, sign = (N, "mid") if N % 2 == 0 else (1, "-")
    else:
        sign = "mid" if args.sign == "0" else args.sign
        n = args.n if args.n is not None else (N if sign == "mid" else 1)
    return n, sign


def cmd_spectrum(args, out):
    p = ModelParams(args.nu, args.Omega, _single_g(args))
    aux = _aux(p, _branch(args))
    for lv in closed_spectrum(args.N, aux):
        out.append(LevelRecord(p.g, lv.bigN, lv.n, lv.sign, *_reim(lv.energy)))


def cmd_scan(args, out, errors):
    b = _branch(args)
    for g in parse_range(args.g):
        p = ModelParams(args.nu, args.Omega, g)
        try:
            aux = _aux(p, b)
        except DomainError as e:
            out.append(LevelRecord(g, -1, -1, "", None, None, type(e).__name__))
            errors.append({"g": g, "type": type(e).__name__, "message": str(e)})
            continue
        for N in range(args.N + 1):
            for lv in closed_spectrum(N, aux):
                out.append(LevelRecord(g, N, lv.n, lv.sign, *_reim(lv.energy)))


def cmd_state(args, out):
    p = ModelParams(args.nu, args.Omega, _single_g(args))
    aux = _aux(p, _branch(args))
    n, sign = _level_selector(args, args.N)
    s, _ = eigenstate(args.N, n, sign, aux, p)
    for (i, j) in sorted(s.coeffs):
        out.append(CoeffRecord(i, j, *_reim(s.coeffs[(i, j)])))


def cmd_density(args, out):
    p = ModelParams(args.nu, args.Omega, _single_g(args))
    aux = _aux(p, _branch(args))
    n, sign = _level_selector(args, args.N)
    s, _ = eigenstate(args.N, n, sign, aux, p)
    window = _pair(args.window, float, 4, "window")
    res = _pair(args.res, int, 2, "res")
    if min(res) < 2:
        raise ConfigError("resolution must be at least 2 in each direction")
    xs, ys, grid = density_grid(s, window, res, normalise=args.normalise)
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            out.append(DensityRecord(float(x), float(y), float(grid[iy, ix])))
    return xs, ys, grid


def cmd_uncertainty(args, out, errors):
    b = _branch(args)
    n, sign = _level_selector(args, args.N)
    gs = parse_range(args.g)
    label = f"N={args.N},n={n},{sign}"
    for g in gs:
        p = ModelParams(args.nu, args.Omega, g)
        try:
            s, _ = eigenstate(args.N, n, sign, _aux(p, b), p)
            out.append(UncertaintyRecord(g, label, uncertainty(s, "x", p), uncertainty(s, "y", p)))
        except DomainError as e:
            if len(gs) == 1:
                raise
            out.append(UncertaintyRecord(g, label, None, None, type(e).__name__))
            errors.append({"g": g, "type": type(e).__name__, "message": str(e)})


def cmd_classical(args, out):
    p = ModelParams(args.nu, args.Omega, _single_g(args))
    pu = pu_constants(p)
    if pu.regime is None:
        pu.relabel("I")  # raises the typed frequency error
    for st in trajectory(ModeAmplitudes(args.a, args.b), pu, args.t0, args.t1, args.steps):
        out.append(PhaseRecord(float(st.t), st.x, st.y, st.px, st.py))


def cmd_validate(args, out):
    p = ModelParams(args.nu, args.Omega, _single_g(args))
    branches = [_branch(args)] if args.branch else ALL_BRANCHES
    for b in branches:
        r = classify_domain(p, b)
        out.append(DomainRecord(str(b), r.e0_real, r.normalisable, r.gamma_map_valid, r.degenerate))


def cmd_crosscheck(args, out):
    p = ModelParams(args.nu, args.Omega, _single_g(args))
    report = cross_validate(p, _branch(args), args.N)
    for e in report.entries:
        out.append(CrossRecord(e.N, e.n, e.sign, e.fock_n, e.fock_m, *_reim(e.e_recurrence),
                               float(e.e_fock), e.energy_rel_err, e.state_err, e.ok()))
    return report.passed


# ---------------------------------------------------------------------------
# output

def render(records: list, config: dict, errors: list, fmt: str) -> str:
    if fmt == "json":
        doc = {"config": config, "results": [r.to_json() for r in records], "errors": errors}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if records:
        w.writerow(type(records[0]).columns())
        w.writerows(r.to_row() for r in records)
    return buf.getvalue()


def read_records(text: str, fmt: str, cls) -> list:
    """Parse emitted output back into records of type ``cls``."""
    if fmt == "json":
        return [cls.from_json(o) for o in json.loads(text)["results"]]
    return [cls.from_row(row) for row in csv.DictReader(io.StringIO(text))]


_PALETTE = ("#440154", "#3b528b", "#21918c", "#5ec962", "#fde725")


def _colour(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(_PALETTE) - 1)
    k = min(int(t), len(_PALETTE) - 2)
    f = t - k
    c0 = [int(_PALETTE[k][i:i + 2], 16) for i in (1, 3, 5)]
    c1 = [int(_PALETTE[k + 1][i:i + 2], 16) for i in (1, 3, 5)]
    return "#" + "".join(f"{round(a + f * (b - a)):02x}" for a, b in zip(c0, c1))


def svg_heatmap(xs, ys, grid, size=400) -> str:
    nx, ny = len(xs), len(ys)
    cw, ch = size / nx, size / ny
    top = float(np.max(grid)) or 1.0
    cells = []
    for iy in range(ny):
        for ix in range(nx):
            cells.append(f'<rect x="{ix * cw:.3f}" y="{(ny - 1 - iy) * ch:.3f}" width="{cw + 0.05:.3f}" '
                         f'height="{ch + 0.05:.3f}" fill="{_colour(grid[iy, ix] / top)}"/>')
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">'
            + "".join(cells) + "</svg>\n")


def svg_lines(series: dict, size=(480, 320)) -> str:
    """Polylines for {name: (xs, ys)} on common axes."""
    w, h = size
    allx = np.concatenate([np.asarray(v[0], float) for v in series.values()])
    ally = np.concatenate([np.asarray(v[1], float) for v in series.values()])
    x0, x1 = float(np.min(allx)), float(np.max(allx))
    y0, y1 = float(np.min(ally)), float(np.max(ally))
    sx = (w - 20) / ((x1 - x0) or 1.0)
    sy = (h - 20) / ((y1 - y0) or 1.0)
    lines = []
    for k, (name, (xv, yv)) in enumerate(series.items()):
        pts = " ".join(f"{10 + (a - x0) * sx:.2f},{h - 10 - (b - y0) * sy:.2f}" for a, b in zip(xv, yv))
        colour = _PALETTE[k % len(_PALETTE)]
        lines.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{pts}">'
                     f"<title>{name}</title></polyline>")
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">'
            + "".join(lines) + "</svg>\n")


def _write(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _config(args) -> dict:
    return {k: (str(v) if isinstance(v, complex) else v) for k, v in sorted(vars(args).items())}


def run(args) -> int:
    records: list = []
    errors: list = []
    status = EXIT_OK
    extra = None
    cmd = args.command
    if cmd == "spectrum":
        cmd_spectrum(args, records)
    elif cmd == "scan":
        cmd_scan(args, records, errors)
    elif cmd == "state":
        cmd_state(args, records)
    elif cmd == "density":
        extra = cmd_density(args, records)
    elif cmd == "uncertainty":
        cmd_uncertainty(args, records, errors)
    elif cmd == "classical":
        cmd_classical(args, records)
    elif cmd == "validate":
        cmd_validate(args, records)
    elif cmd == "crosscheck":
        if not cmd_crosscheck(args, records):
            status = EXIT_INVARIANT
    _write(args.out, render(records, _config(args), errors, args.format))

    if getattr(args, "svg", None):
        if cmd == "density":
            _write(args.svg, svg_heatmap(*extra))
        elif cmd == "scan":
            series: dict = {}
            for r in records:
                if r.re_E is not None:
                    xs, ys = series.setdefault(r.label, ([], []))
                    xs.append(r.g)
                    ys.append(r.re_E)
            if series:
                _write(args.svg, svg_lines(series))
        elif cmd == "classical":
            _write(args.svg, svg_lines({"x-y": ([r.x for r in records], [r.y for r in records])}))
    return status


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except InvariantViolation as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
