"""Roll-off optimization and the monotone optimized envelope.

A transmitter allowed PAPR r may always use a signal set designed for any
r' <= r, so the best lower bound is max over pulses and r' <= r of
eta_g(r'). The inner max is taken over the evaluated grid points plus the
interior peak of eta_g found by a bounded scalar search.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy import optimize as sopt

from .blgc import eta_blgc, pp_blgc_eta
from .bloic import eta_bloic
from .errors import NonParametricFamily
from .metrics import PulseMetrics, compute_metrics
from .pulses import PARAMETRIC, Family, Normalization, PulseSpec

ALLOWED_STEPS = (0.01, 0.005, 0.001)
BLGC_FAMILIES = (Family.S2, Family.SC, Family.RC, Family.PL, Family.BTN)
BLOIC_FAMILIES = (Family.S2, Family.SC, Family.BTN, Family.ICIT)
# lower end of the interior-peak search; eta is O(r) or O(r^2) below it
PEAK_R_MIN = 1e-2
PEAK_SCAN_POINTS = 97

MetricsFn = Callable[[PulseSpec], PulseMetrics]


class Channel(str, enum.Enum):
    BLGC = "BLGC"
    BLOIC = "BLOIC"

    @classmethod
    def parse(cls, value) -> "Channel":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown channel {value!r}; expected BLGC or BLOIC") from None

    @property
    def normalization(self) -> Normalization:
        return Normalization.ENERGY if self is Channel.BLGC else Normalization.AREA

    @property
    def default_families(self):
        return BLGC_FAMILIES if self is Channel.BLGC else BLOIC_FAMILIES


class BetaChoice(NamedTuple):
    beta: float
    eta: float


@dataclass(frozen=True)
class EnvelopePoint:
    r: float
    eta_opt: float
    family: Family
    beta: float | None
    achieved_at_r: float


def beta_grid(step: float = 0.01) -> np.ndarray:
    """{step, 2 step, ..., 1}; the step must divide 1 exactly."""
    if not step > 0:
        raise ValueError(f"beta step must be positive, got {step}")
    n = round(1.0 / step)
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"beta step {step} does not divide (0, 1] into whole steps")
    return np.round(np.arange(1, n + 1) / n, 12)


def eta_for(channel, metrics: PulseMetrics, r: float) -> float:
    channel = Channel.parse(channel)
    if channel is Channel.BLGC:
        return eta_blgc(r, metrics).eta
    return eta_bloic(r, metrics).eta


def _pulse(family: Family, beta, channel: Channel) -> PulseSpec:
    return PulseSpec(family, beta if family in PARAMETRIC else None, channel.normalization)


def _usable(m: PulseMetrics) -> bool:
    return not m.diverged and math.isfinite(m.S)


def optimize_beta(family, channel, r: float, step: float = 0.01,
                  metrics_fn: MetricsFn = compute_metrics) -> BetaChoice:
    """Exhaustive roll-off search; ties go to the smaller roll-off."""
    family = Family.parse(family)
    channel = Channel.parse(channel)
    if family not in PARAMETRIC:
        raise NonParametricFamily(f"{family.value} has no roll-off to optimize")
    best = BetaChoice(math.nan, -math.inf)
    for beta in beta_grid(step):
        m = metrics_fn(_pulse(family, float(beta), channel))
        if not _usable(m):
            continue
        eta = eta_for(channel, m, r)
        if eta > best.eta:
            best = BetaChoice(float(beta), eta)
    return best


def pp_optimize_beta(family, step: float = 0.01,
                     metrics_fn: MetricsFn = compute_metrics) -> BetaChoice:
    """Roll-off maximizing the peak-power factor 2G/(pi e S^2)."""
    family = Family.parse(family)
    if family not in PARAMETRIC:
        raise NonParametricFamily(f"{family.value} has no roll-off to optimize")
    best = BetaChoice(math.nan, -math.inf)
    for beta in beta_grid(step):
        m = metrics_fn(PulseSpec(family, float(beta), Normalization.ENERGY))
        if _usable(m):
            eta = pp_blgc_eta(m)
            if eta > best.eta:
                best = BetaChoice(float(beta), eta)
    return best


def peak_eta(channel, metrics: PulseMetrics, r_max: float,
             r_min: float = PEAK_R_MIN) -> tuple[float, float]:
    """(r*, eta*) maximizing eta_g over [r_min, r_max]: log scan then bounded refinement."""
    channel = Channel.parse(channel)
    if r_max <= r_min:
        return r_max, eta_for(channel, metrics, r_max)
    rs = np.geomspace(r_min, r_max, PEAK_SCAN_POINTS)
    etas = np.array([eta_for(channel, metrics, float(r)) for r in rs])
    j = int(np.argmax(etas))
    r_best, eta_best = float(rs[j]), float(etas[j])
    if 0 < j < rs.size - 1:
        lo, hi = math.log(rs[j - 1]), math.log(rs[j + 1])
        res = sopt.minimize_scalar(lambda u: -eta_for(channel, metrics, math.exp(u)),
                                   bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        if -res.fun > eta_best:
            r_best, eta_best = math.exp(float(res.x)), float(-res.fun)
    return r_best, eta_best


def _candidates(channel: Channel, families: Iterable, step: float):
    order = {f: i for i, f in enumerate(Family)}
    fams = sorted({Family.parse(f) for f in families}, key=order.get)
    for fam in fams:
        if fam in PARAMETRIC:
            for beta in beta_grid(step):
                yield fam, float(beta)
        else:
            yield fam, None


def envelope(channel, families: Iterable | None, r_grid: Sequence[float], step: float = 0.01,
             metrics_fn: MetricsFn = compute_metrics) -> list[EnvelopePoint]:
    """Monotone best lower bound over families, roll-offs and r' <= r."""
    channel = Channel.parse(channel)
    rs = np.asarray(r_grid, dtype=float)
    if rs.size == 0:
        raise ValueError("r grid is empty")
    if np.any(np.diff(rs) < 0):
        raise ValueError("r grid must be sorted ascending")
    families = channel.default_families if families is None else tuple(families)
    if not families:
        raise ValueError("no pulse families given")

    best_eta = np.full(rs.size, -math.inf)
    best_fam: list = [None] * rs.size
    best_beta: list = [None] * rs.size
    best_at = np.full(rs.size, math.nan)

    for fam, beta in _candidates(channel, families, step):
        m = metrics_fn(_pulse(fam, beta, channel))
        if not _usable(m):
            continue
        etas = np.array([eta_for(channel, m, float(r)) for r in rs])
        r_pk, eta_pk = peak_eta(channel, m, float(rs[-1]), min(PEAK_R_MIN, float(rs[0])))
        run_eta, run_at = -math.inf, math.nan
        for i, r in enumerate(rs):
            if etas[i] > run_eta:
                run_eta, run_at = etas[i], r
            if r_pk <= r and eta_pk > run_eta:
                run_eta, run_at = eta_pk, r_pk
            if run_eta > best_eta[i]:
                best_eta[i], best_fam[i], best_beta[i], best_at[i] = run_eta, fam, beta, run_at

    # a max of per-candidate running maxima is itself non-decreasing
    return [EnvelopePoint(float(r), float(best_eta[i]), best_fam[i], best_beta[i], float(best_at[i]))
            for i, r in enumerate(rs)]
