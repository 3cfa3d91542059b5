"""Peak-superposition S and spectral log-integral G of a normalized pulse.

S is the largest value, over one symbol interval, of the sum of |g| shifted by
every integer number of symbol periods. It turns an amplitude cap on the PAM
symbols into an amplitude cap on the waveform. G is exp of the band-average
of log|2W ghat(f)|^2; it is 1 for the sinc pulse and smaller otherwise.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize, special

from .errors import Diverged, SpectralZeroInterior
from .pulses import (CANONICAL_W, Family, Normalization, PulseSpec, eval_freq,
                     eval_freq_from_edge,
                     normalize, shifted_abs_sums, shifted_values, spectral_breakpoints)

GRID_POINTS = 4096
GRID_TERMS = 512
START_TERMS = 1 << 10
MAX_TERMS = {Family.ICIT: 1 << 16}
DEFAULT_MAX_TERMS = 1 << 20
TAIL_RTOL = 1e-6
# increment ratio per doubling: 1/2 for 1/t^2 tails, 1 for harmonic tails
_DIVERGENT_RATIO = 0.95
_DIVERGENT_RUN = 4


class SResult(NamedTuple):
    S: float
    error: float
    t_peak: float
    n_terms: int


class GResult(NamedTuple):
    G: float
    error: float


@dataclass(frozen=True)
class PulseMetrics:
    S: float
    G: float
    S_error: float
    G_error: float
    diverged: bool
    normalization: Normalization
    pulse: PulseSpec
    t_peak: float = math.nan
    n_terms: int = 0

    @property
    def g_over_s2(self) -> float:
        return self.G / self.S ** 2


def _fit_tail(vals: np.ndarray, n: int):
    """Fit mean |g(tau -+ i)| ~ c * i**-p over the last decade of shifts."""
    mags = 0.5 * (np.abs(vals[:n][::-1]) + np.abs(vals[n + 1:]))  # index k -> shift k+1
    edges = np.unique(np.round(np.logspace(math.log10(max(n // 10, 1)), math.log10(n), 9)).astype(int))
    xs, ys = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        seg = mags[lo - 1:hi - 1]
        if seg.size and seg.mean() > 0:
            xs.append(math.sqrt(lo * (hi - 1)) if hi - 1 > lo else lo)
            ys.append(seg.mean())
    if len(xs) < 3:
        return math.nan, math.nan
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    return math.exp(intercept), -slope


def _tail_sum(c: float, p: float, n: int) -> float:
    if not (p > 1.0) or not math.isfinite(c):
        return math.inf
    return 2.0 * c * float(special.zeta(p, n + 1))


def compute_S(pulse: PulseSpec, grid: int = GRID_POINTS, grid_terms: int = GRID_TERMS,
              grid_offset: float = 0.0, max_terms: int | None = None) -> SResult:
    """Peak superposition with a fitted power-law tail.

    The maximizing phase is located on a ``grid``-point mesh of one symbol
    interval (partial sums over ``2*grid_terms+1`` shifts) and refined to
    1e-10. The series is then summed at that phase with the number of terms
    doubled until the fitted tail is below 1e-6 of the partial sum.
    """
    taus = grid_offset + np.arange(grid) / grid
    sums = shifted_abs_sums(pulse, taus, grid_terms)
    j = int(np.argmax(sums))
    h = 1.0 / grid
    res = optimize.minimize_scalar(
        lambda tau: -float(shifted_abs_sums(pulse, [tau], grid_terms)[0]),
        bounds=(taus[j] - h, taus[j] + h), method="bounded", options={"xatol": 1e-10})
    tau = float(res.x) if -res.fun >= sums[j] else float(taus[j])

    cap = max_terms or MAX_TERMS.get(pulse.family, DEFAULT_MAX_TERMS)
    n = START_TERMS
    partials, estimates, tails, ratios = [], [], [], []
    while True:
        vals = shifted_values(pulse, tau, n)
        partial = float(np.abs(vals).sum())
        c, p = _fit_tail(vals, n)
        tail = _tail_sum(c, p, n)
        partials.append(partial)
        estimates.append(partial + tail)
        tails.append(tail)
        if len(partials) >= 3:
            prev = partials[-2] - partials[-3]
            ratios.append((partials[-1] - partials[-2]) / prev if prev > 0 else 0.0)
            if len(ratios) >= _DIVERGENT_RUN and all(
                    r > _DIVERGENT_RATIO for r in ratios[-_DIVERGENT_RUN:]):
                raise Diverged(f"{pulse.label()}: partial sums grow like a harmonic series")
        converged = tail < TAIL_RTOL * partial
        if (converged and len(estimates) >= 2) or 2 * n > cap:
            break
        n *= 2
    if not math.isfinite(estimates[-1]):
        raise Diverged(f"{pulse.label()}: no summable tail up to {n} terms")
    S = estimates[-1]
    prev = estimates[-2] if len(estimates) >= 2 and math.isfinite(estimates[-2]) else partials[-1]
    # doubling change plus a share of the tail for power-law model misfit
    err = abs(S - prev) + 0.05 * tails[-1] + 1e-12 * S
    t_peak = tau % 1.0
    return SResult(S, err, t_peak, n)


def _check_interior(pulse: PulseSpec):
    f = np.linspace(0.0, CANONICAL_W, 8193)[1:-1]
    if np.any(eval_freq(pulse, f) <= 0.0):
        raise SpectralZeroInterior(f"{pulse.label()} spectrum vanishes inside the band")


def compute_G(pulse: PulseSpec) -> GResult:
    """exp((1/W) int_0^W log|2W ghat(f)|^2 df) with quadrature error propagated.

    The last piece ends at a spectral zero (band edge); it is integrated in
    u with f = W - u^2, which tames the logarithmic singularity, using a
    spectrum form written in the edge distance so nothing cancels near zero.
    """
    _check_interior(pulse)
    W = CANONICAL_W

    def logspec(f):
        return 2.0 * math.log(abs(2.0 * W * float(eval_freq(pulse, f))))

    def logspec_edge(d):
        return 2.0 * math.log(max(2.0 * W * float(eval_freq_from_edge(pulse, d)), 1e-300))

    edges = [0.0, *spectral_breakpoints(pulse), W]
    total, err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b == W and pulse.family is not Family.SINC:
            val, e = integrate.quad(lambda u: logspec_edge(u * u) * 2.0 * u, 0.0, math.sqrt(b - a),
                                    epsabs=1e-14, epsrel=1e-13, limit=400)
        else:
            val, e = integrate.quad(logspec, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)
        total += val
        err += e
    G = math.exp(total / W)
    return GResult(G, G * err / W + G * 1e-15)


@functools.lru_cache(maxsize=None)
def compute_metrics(pulse: PulseSpec) -> PulseMetrics:
    """S and G together; memoized per pulse (PulseSpec is hashable)."""
    g = compute_G(pulse)
    try:
        s = compute_S(pulse)
    except Diverged:
        return PulseMetrics(S=math.inf, G=g.G, S_error=math.inf, G_error=g.error, diverged=True,
                            normalization=pulse.normalization, pulse=pulse)
    return PulseMetrics(S=s.S, G=g.G, S_error=s.error, G_error=g.error, diverged=False,
                        normalization=pulse.normalization, pulse=pulse,
                        t_peak=s.t_peak, n_terms=s.n_terms)


def metrics_for(family, beta=None, normalization=Normalization.ENERGY) -> PulseMetrics:
    return compute_metrics(PulseSpec(family, beta, normalization))
