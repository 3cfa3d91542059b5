"""Command-line entry point: metrics, lower bounds, roll-off search, sweeps, upper bounds.

Every command writes one table, as CSV (default) or JSON, to stdout or --out.
Exit codes: 0 ok, 2 usage or configuration error, 3 divergent pulse,
4 solver did not converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Iterable, Optional, Sequence

import numpy as np

from . import blgc, bloic, dtgc
from .errors import DivergedPulse, NotConverged, PaprcapError
from .metrics import compute_metrics
from .optimize import ALLOWED_STEPS, Channel, envelope, optimize_beta, pp_optimize_beta
from .pulses import PARAMETRIC, Family, Normalization, PulseSpec

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_NOT_CONVERGED = 0, 2, 3, 4
SIG_DIGITS = 12

METRICS_COLUMNS = ["family", "beta", "normalization", "S", "S_error", "G", "G_error", "diverged"]
BLGC_LB_COLUMNS = ["r", "family", "beta", "eta", "regime", "lambda", "snr", "rate"]
BLOIC_LB_COLUMNS = ["r", "family", "beta", "eta", "regime", "mu", "osnr", "rate"]
OPTIMIZE_COLUMNS = ["family", "channel", "objective", "r", "beta", "eta"]
SWEEP_COLUMNS = {
    Channel.BLGC: ["r", "family", "beta", "eta", "regime", "lambda", "source_family", "source_r"],
    Channel.BLOIC: ["r", "family", "beta", "eta", "regime", "mu", "source_family", "source_r"],
}
UPPER_COLUMNS = ["snr", "upper_rate", "lower_rate_opt", "gap_db", "eta_upper", "eta_lower",
                 "status"]


class UsageError(Exception):
    """Bad configuration value; reported with the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, f".{SIG_DIGITS}g")
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return _fmt(v)
        return float(format(v, f".{SIG_DIGITS}g"))
    return v


class Table:
    """Rows in a fixed column order; written once at the end or on failure."""

    def __init__(self, command: str, columns: Sequence[str]):
        self.command, self.columns = command, list(columns)
        self.rows: list[dict] = []
        self.status = "ok"

    def add(self, **row):
        unknown = set(row) - set(self.columns)
        if unknown:  # pragma: no cover - programming error
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append(row)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {
                "command": self.command,
                "status": self.status,
                "columns": self.columns,
                "rows": [{c: _json_value(r.get(c)) for c in self.columns} for r in self.rows],
            }
            return json.dumps(doc, indent=2) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r.get(c)) for c in self.columns])
        return buf.getvalue()


def _emit(table: Table, args) -> None:
    text = table.render(args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


# ----------------------------------------------------------------------------- parsing helpers

def _families(values: Optional[list[str]], field: str = "--family") -> list[Family]:
    if values is None:
        return []
    names = [n.strip() for v in values for n in v.split(",")]
    names = [n for n in names if n]
    try:
        return [Family.parse(n) for n in names]
    except PaprcapError as exc:
        raise UsageError(field, str(exc)) from None


def _one_family(args) -> Family:
    fams = _families(args.family)
    if len(fams) != 1:
        raise UsageError("--family", "exactly one pulse family is required")
    return fams[0]


def _pulse(family: Family, beta, norm: Normalization) -> PulseSpec:
    if family in PARAMETRIC and beta is None:
        raise UsageError("--beta", f"{family.value} needs a roll-off")
    try:
        return PulseSpec(family, beta if family in PARAMETRIC else None, norm)
    except PaprcapError as exc:
        raise UsageError("--beta", str(exc)) from None


def _positive(value: Optional[float], field: str, allow_inf: bool = False) -> float:
    if value is None:
        raise UsageError(field, "a value is required")
    if math.isnan(value) or value <= 0 or (math.isinf(value) and not allow_inf):
        raise UsageError(field, f"must be positive{'' if allow_inf else ' and finite'}, got {value}")
    return value


def _step(value: float) -> float:
    for s in ALLOWED_STEPS:
        if abs(value - s) < 1e-12:
            return s
    raise UsageError("--beta-step", f"must be one of {', '.join(map(str, ALLOWED_STEPS))}")


def _r_grid(args) -> np.ndarray:
    if args.r_min is None and args.r_max is None:
        if args.papr:
            rs = [_positive(r, "--papr") for r in args.papr]
            return np.array(sorted(rs))
        raise UsageError("--r-min/--r-max", "give an r range or --papr values")
    lo = _positive(args.r_min, "--r-min")
    hi = _positive(args.r_max, "--r-max")
    if hi < lo:
        raise UsageError("--r-max", f"must be >= --r-min ({lo})")
    n = args.r_points
    if n < 1:
        raise UsageError("--r-points", f"must be at least 1, got {n}")
    if n == 1:
        return np.array([lo])
    return np.geomspace(lo, hi, n) if args.r_log else np.linspace(lo, hi, n)


def _snr_values(args) -> list[float]:
    """--snr values are linear; --snr-grid is LO_DB,HI_DB,POINTS."""
    vals = [_positive(s, "--snr") for s in (args.snr or [])]
    if args.snr_grid:
        parts = args.snr_grid.split(",")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            if len(parts) != 3:
                raise ValueError
        except (ValueError, IndexError):
            raise UsageError("--snr-grid", "expected LO_DB,HI_DB,POINTS") from None
        if n < 1 or hi < lo:
            raise UsageError("--snr-grid", "need POINTS >= 1 and HI_DB >= LO_DB")
        vals += list(10.0 ** (np.linspace(lo, hi, n) / 10.0)) if n > 1 else [10.0 ** (lo / 10.0)]
    if not vals:
        raise UsageError("--snr", "give --snr values or --snr-grid")
    return sorted(vals)


# ----------------------------------------------------------------------------- commands

def cmd_metrics(args) -> int:
    family = _one_family(args)
    norm = Normalization.parse(args.norm)
    m = compute_metrics(_pulse(family, args.beta, norm))
    t = Table("metrics", METRICS_COLUMNS)
    t.add(family=family.value, beta=m.pulse.rolloff, normalization=norm.value,
          S=None if m.diverged else m.S, S_error=None if m.diverged else m.S_error,
          G=m.G, G_error=m.G_error, diverged=m.diverged)
    if m.diverged:
        t.status = "diverged"
    _emit(t, args)
    return EXIT_DIVERGED if m.diverged else EXIT_OK


def _lower_bound_rows(args, channel: Channel) -> int:
    family = _one_family(args)
    m = compute_metrics(_pulse(family, args.beta, channel.normalization))
    snrs = [_positive(s, "--snr") for s in (args.snr or [])]
    rs = [_positive(r, "--papr", allow_inf=channel is Channel.BLGC) for r in (args.papr or [])]
    if not rs:
        raise UsageError("--papr", "at least one PAPR value is required")
    cols = BLGC_LB_COLUMNS if channel is Channel.BLGC else BLOIC_LB_COLUMNS
    t = Table("blgc-lb" if channel is Channel.BLGC else "bloic-lb", cols)
    if m.diverged:
        t.status = "diverged"
        _emit(t, args)
        print(f"error: {family.value} has a divergent peak superposition", file=sys.stderr)
        return EXIT_DIVERGED
    for r in sorted(rs):
        if channel is Channel.BLGC:
            b = blgc.eta_blgc(r, m)
            base = dict(r=r, family=family.value, beta=m.pulse.rolloff, eta=b.eta,
                        regime=b.regime.value)
            base["lambda"] = b.lam
            for snr in snrs or [None]:
                rate = None if snr is None else blgc.blgc_lower_rate(args.W, snr, b)
                t.add(**base, snr=snr, rate=rate)
        else:
            b = bloic.eta_bloic(r, m)
            base = dict(r=r, family=family.value, beta=m.pulse.rolloff, eta=b.eta,
                        regime=b.regime.value, mu=b.mu)
            for snr in snrs or [None]:
                rate = None if snr is None else bloic.bloic_lower_rate(args.W, snr, b)
                t.add(**base, osnr=snr, rate=rate)
    _emit(t, args)
    return EXIT_OK


def cmd_blgc_lb(args) -> int:
    return _lower_bound_rows(args, Channel.BLGC)


def cmd_bloic_lb(args) -> int:
    return _lower_bound_rows(args, Channel.BLOIC)


def cmd_optimize(args) -> int:
    family = _one_family(args)
    channel = Channel.parse(args.channel)
    step = _step(args.beta_step)
    t = Table("optimize", OPTIMIZE_COLUMNS)
    if not args.papr:
        if channel is not Channel.BLGC:
            raise UsageError("--papr", "the optical channel needs a PAPR")
        best = pp_optimize_beta(family, step)
        t.add(family=family.value, channel=channel.value, objective="peak_power", r=None,
              beta=best.beta, eta=best.eta)
    else:
        for r in sorted(_positive(r, "--papr", allow_inf=channel is Channel.BLGC)
                        for r in args.papr):
            best = optimize_beta(family, channel, r, step)
            t.add(family=family.value, channel=channel.value, objective="papr", r=r,
                  beta=best.beta, eta=best.eta)
    _emit(t, args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    channel = Channel.parse(args.channel)
    step = _step(args.beta_step)
    if args.family is None:
        families = list(channel.default_families)
    else:
        families = _families(args.family)
        if not families:
            raise UsageError("--family", "the families list is empty")
    order = {f: i for i, f in enumerate(Family)}
    families = sorted(set(families), key=order.get)
    rs = _r_grid(args)
    if channel is Channel.BLOIC and np.any(np.isinf(rs)):
        raise UsageError("--papr", "the optical channel needs a finite PAPR")
    t = Table("sweep", SWEEP_COLUMNS[channel])
    shape_col = "lambda" if channel is Channel.BLGC else "mu"
    eta_fn = blgc.eta_blgc if channel is Channel.BLGC else bloic.eta_bloic

    def shape(b):
        return b.lam if channel is Channel.BLGC else b.mu

    for fam in families:
        if fam in PARAMETRIC and args.beta is None and not args.all_betas:
            for r in rs:
                best = optimize_beta(fam, channel, float(r), step)
                if not math.isfinite(best.eta):
                    continue
                b = eta_fn(float(r), compute_metrics(PulseSpec(fam, best.beta, channel.normalization)))
                t.add(r=float(r), family=fam.value, beta=best.beta, eta=b.eta,
                      regime=b.regime.value, **{shape_col: shape(b)})
            continue
        if fam in PARAMETRIC:
            betas = [args.beta] if args.beta is not None else \
                [float(x) for x in np.round(np.arange(1, round(1 / step) + 1) * step, 12)]
        else:
            betas = [None]
        for beta in betas:
            m = compute_metrics(_pulse(fam, beta, channel.normalization))
            if m.diverged:
                if len(families) == 1:
                    t.status = "diverged"
                    _emit(t, args)
                    print(f"error: {fam.value} has a divergent peak superposition", file=sys.stderr)
                    return EXIT_DIVERGED
                continue
            for r in rs:
                b = eta_fn(float(r), m)
                t.add(r=float(r), family=fam.value, beta=m.pulse.rolloff, eta=b.eta,
                      regime=b.regime.value, **{shape_col: shape(b)})

    usable = [f for f in families if f is not Family.SINC]
    if usable:
        for pt in envelope(channel, usable, rs, step):
            if pt.family is None:
                continue
            m = compute_metrics(PulseSpec(pt.family, pt.beta, channel.normalization))
            b = eta_fn(pt.achieved_at_r, m)
            t.add(r=pt.r, family="envelope", beta=pt.beta, eta=pt.eta_opt, regime=b.regime.value,
                  source_family=pt.family.value, source_r=pt.achieved_at_r,
                  **{shape_col: shape(b)})
    _emit(t, args)
    return EXIT_OK


def _lower_eta(families: Iterable[Family], r: float, step: float) -> float:
    best = -math.inf
    for fam in families:
        if fam in PARAMETRIC:
            best = max(best, optimize_beta(fam, Channel.BLGC, r, step).eta)
        elif fam is not Family.SINC:
            best = max(best, blgc.eta_blgc(r, compute_metrics(PulseSpec(fam))).eta)
    return best


def cmd_upper(args) -> int:
    r = _positive(args.papr[0] if args.papr else 14.0, "--papr")
    if args.papr and len(args.papr) > 1:
        raise UsageError("--papr", "upper takes a single PAPR")
    snrs = _snr_values(args)
    W = _positive(args.W, "--W")
    if not 0 < args.tol <= dtgc.MAX_TOL:
        raise UsageError("--tol", f"must lie in (0, {dtgc.MAX_TOL}]")
    if args.grid_points is not None and args.grid_points < dtgc.MIN_GRID_POINTS:
        raise UsageError("--grid-points", f"must be at least {dtgc.MIN_GRID_POINTS}")
    families = _families(args.family) if args.family is not None else [Family.BTN]
    if not families:
        raise UsageError("--family", "the families list is empty")
    eta_lower = _lower_eta(families, r, _step(args.beta_step))

    t = Table("upper", UPPER_COLUMNS)
    for snr in snrs:
        lower = blgc.blgc_lower_rate(W, snr, eta_lower)
        try:
            cap, _ = dtgc.blgc_upper_solution(snr, r, args.grid_points, args.tol)
        except NotConverged as exc:
            t.add(snr=snr, lower_rate_opt=lower, eta_lower=eta_lower, status=f"not_converged: {exc}")
            t.status = "not_converged"
            _emit(t, args)
            print(f"error: DTGC solver did not converge at SNR {snr:g}: {exc}", file=sys.stderr)
            return EXIT_NOT_CONVERGED
        upper = 2.0 * W * cap
        t.add(snr=snr, upper_rate=upper, lower_rate_opt=lower,
              gap_db=dtgc.gap_db(upper, W, snr, eta_lower),
              eta_upper=dtgc.upper_eta(upper, W, snr), eta_lower=eta_lower, status="ok")
    _emit(t, args)
    return EXIT_OK


# ----------------------------------------------------------------------------- argparse

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", metavar="PATH", help="write the table here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paprcap",
        description="Capacity bounds for bandlimited channels under a PAPR constraint.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="peak superposition S and spectral factor G of a pulse")
    p.add_argument("--family", action="append", required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--norm", default="energy", choices=("energy", "area", "ENERGY", "AREA"))
    _common(p)
    p.set_defaults(func=cmd_metrics)

    for name, func, snr_help in (("blgc-lb", cmd_blgc_lb, "SNR (linear) for a rate column"),
                                 ("bloic-lb", cmd_bloic_lb, "OSNR (linear) for a rate column")):
        p = sub.add_parser(name, help=f"PAM lower bound, {name.split('-')[0].upper()} channel")
        p.add_argument("--family", action="append", required=True)
        p.add_argument("--beta", type=float)
        p.add_argument("--papr", type=float, action="append", help="PAPR r (repeatable)")
        p.add_argument("--snr", type=float, action="append", help=snr_help)
        p.add_argument("--W", type=float, default=1.0, help="bandwidth in Hz (default 1)")
        _common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("optimize", help="best roll-off on the beta grid")
    p.add_argument("--family", action="append", required=True)
    p.add_argument("--channel", default="BLGC", type=str.upper, choices=("BLGC", "BLOIC"))
    p.add_argument("--papr", type=float, action="append",
                   help="PAPR r (repeatable); omit for the peak-power factor")
    p.add_argument("--beta-step", type=float, default=0.01)
    _common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="eta over an r grid, with the optimized envelope")
    p.add_argument("--channel", default="BLGC", type=str.upper, choices=("BLGC", "BLOIC"))
    p.add_argument("--family", action="append",
                   help="family or comma list (repeatable); default: every family for the channel")
    p.add_argument("--beta", type=float, help="fixed roll-off; default optimizes per r")
    p.add_argument("--all-betas", action="store_true", help="one row per roll-off on the grid")
    p.add_argument("--beta-step", type=float, default=0.01)
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--r-points", type=int, default=50)
    p.add_argument("--r-log", action="store_true", help="log-spaced r grid")
    p.add_argument("--papr", type=float, action="append", help="explicit r values instead of a range")
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("upper", help="DTGC upper bound against the optimized lower bound")
    p.add_argument("--papr", type=float, action="append", help="PAPR r (default 14)")
    p.add_argument("--snr", type=float, action="append", help="SNR, linear (repeatable)")
    p.add_argument("--snr-grid", help="LO_DB,HI_DB,POINTS")
    p.add_argument("--family", action="append",
                   help="families for the lower bound (default BTN)")
    p.add_argument("--beta-step", type=float, default=0.01)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--tol", type=float, default=1e-7, help="bracket tolerance in bits")
    p.add_argument("--W", type=float, default=1.0, help="bandwidth in Hz (default 1)")
    _common(p)
    p.set_defaults(func=cmd_upper)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")
    except DivergedPulse as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except PaprcapError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")
    return EXIT_OK  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
