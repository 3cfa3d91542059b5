"""Shaping pulses in time and frequency.

All pulses live in canonical units: bandwidth W = 1/2, so the symbol period
T_s = 1/(2W) = 1 and 2W = 1. Physical bandwidths only enter through the rate
helpers (``W * log2(...)``), never through pulse shapes.

Pulses are even, real and bandlimited to [-W, W]. Each raw closed form is
multiplied by a normalization scale computed by :func:`normalize`, so that
either the energy (``ENERGY``) or the area (``AREA``) equals 1/(2W).
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import InvalidPulse, ResolutionTooCoarse, UnsupportedFamily, ZeroArea

CANONICAL_W = 0.5
MIN_ROLLOFF = 1e-3


class Family(str, enum.Enum):
    S2 = "S2"
    SC = "SC"
    RC = "RC"
    PL = "PL"
    BTN = "BTN"
    ICIT = "ICIT"
    SINC = "SINC"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            raise InvalidPulse(f"unknown pulse family {name!r}") from None


class Normalization(str, enum.Enum):
    ENERGY = "ENERGY"
    AREA = "AREA"

    @classmethod
    def parse(cls, name) -> "Normalization":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            raise InvalidPulse(f"unknown normalization {name!r}") from None


PARAMETRIC = frozenset({Family.RC, Family.PL, Family.BTN, Family.ICIT})

_CODES = {
    Family.SINC: _kernels.SINC,
    Family.S2: _kernels.S2,
    Family.SC: _kernels.SC,
    Family.RC: _kernels.RC,
    Family.PL: _kernels.PL,
    Family.BTN: _kernels.BTN,
}


@dataclass(frozen=True)
class PulseSpec:
    family: Family
    rolloff: Optional[float] = None
    normalization: Normalization = Normalization.ENERGY

    def __post_init__(self):
        family = Family.parse(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "normalization", Normalization.parse(self.normalization))
        if family in PARAMETRIC:
            if self.rolloff is None:
                raise InvalidPulse(f"{family.value} needs a roll-off in (0, 1]")
            beta = round(float(self.rolloff), 12)
            if not (MIN_ROLLOFF <= beta <= 1.0):
                raise InvalidPulse(
                    f"roll-off {self.rolloff} outside [{MIN_ROLLOFF}, 1] for {family.value}")
            object.__setattr__(self, "rolloff", beta)
        elif self.rolloff is not None:
            raise InvalidPulse(f"{family.value} takes no roll-off")

    @property
    def beta(self) -> float:
        return 0.0 if self.rolloff is None else self.rolloff

    def with_normalization(self, normalization) -> "PulseSpec":
        return PulseSpec(self.family, self.rolloff, normalization)

    def label(self) -> str:
        if self.rolloff is None:
            return self.family.value
        return f"{self.family.value}(beta={self.rolloff:g})"


@dataclass(frozen=True)
class ChannelParams:
    """Physical bandwidth W (Hz) and one-sided noise density N0."""

    W: float = 1.0
    N0: float = 1.0

    def __post_init__(self):
        if not (self.W > 0 and math.isfinite(self.W)):
            raise ValueError(f"bandwidth must be positive, got {self.W}")
        if not (self.N0 > 0 and math.isfinite(self.N0)):
            raise ValueError(f"noise density must be positive, got {self.N0}")

    @property
    def symbol_period(self) -> float:
        return 1.0 / (2.0 * self.W)


# ---------------------------------------------------------------------------
# ICIT spectral shape

_TAN1 = math.tan(1.0)


def _icit_phi(d):
    """arccos(arctan(tan(1) * (1 - d))) for d in [0, 1/2], exact near d = 0."""
    d = np.asarray(d, dtype=float)
    # 1 - arctan(tan1 (1 - d)) via the arctan subtraction identity
    gap = np.arctan(_TAN1 * d / (1.0 + _TAN1 * _TAN1 * (1.0 - d)))
    return 2.0 * np.arcsin(np.sqrt(np.clip(gap, 0.0, None) / 2.0))


_ICIT_GAMMA = float(_icit_phi(0.5))


def _icit_raw_freq(f, beta):
    x = np.abs(np.asarray(f, dtype=float))
    W = CANONICAL_W
    f1 = (1.0 - beta) / (1.0 + beta) * W
    f2 = W / (1.0 + beta)
    k = (1.0 + beta) / (2.0 * beta * W)
    out = np.zeros_like(x)
    out[x <= f1] = 1.0
    mid = (x > f1) & (x <= f2)
    out[mid] = 1.0 - _icit_phi(k * (x[mid] - f1)) / (2.0 * _ICIT_GAMMA)
    top = (x > f2) & (x <= W)
    out[top] = _icit_phi(k * (W - x[top])) / (2.0 * _ICIT_GAMMA)
    return out


# ---------------------------------------------------------------------------
# raw spectra (before normalization), W = 1/2

def _raw_freq(pulse: PulseSpec, f):
    f = np.asarray(f, dtype=float)
    x = np.abs(f)
    inband = x <= CANONICAL_W
    fam, beta = pulse.family, pulse.beta
    if fam is Family.SINC:
        out = np.ones_like(x)
    elif fam is Family.S2:
        out = 2.0 * math.sqrt(3.0) * (0.5 - x)
    elif fam is Family.SC:
        out = 2.0 * math.sqrt(2.0) * np.cos(np.pi * x)
    elif fam is Family.ICIT:
        return _icit_raw_freq(x, beta)
    else:
        T = 1.0 + beta
        f1 = (1.0 - beta) / (2.0 * T)
        xr = np.minimum(x, 0.5)
        if fam is Family.RC:
            c = 2.0 / math.sqrt(4.0 + 3.0 * beta - beta * beta)
            roll = 0.5 * (1.0 + np.cos(np.pi * T / beta * (xr - f1)))
        elif fam is Family.PL:
            c = math.sqrt(3.0 / (3.0 + 2.0 * beta - beta * beta))
            roll = (T / beta) * (0.5 - xr)
        else:  # BTN
            c = 1.0 / math.sqrt(1.0 + 0.64 * beta - 0.36 * beta * beta)
            B = 1.0 / (2.0 * T)
            gam = math.log(2.0) / (beta * B)
            roll = np.where(xr <= B, np.exp(gam * (f1 - xr)),
                            -np.expm1(gam * (xr - 0.5)))
        out = c * T * np.where(x <= f1, 1.0, roll)
    return np.where(inband, out, 0.0)


def _raw_freq_from_edge(pulse: PulseSpec, d):
    """Raw spectrum at f = W - d on the last spectral piece, free of cancellation."""
    d = np.asarray(d, dtype=float)
    fam, beta = pulse.family, pulse.beta
    T = 1.0 + beta
    if fam is Family.SINC:
        return np.ones_like(d)
    if fam is Family.S2:
        return 2.0 * math.sqrt(3.0) * d
    if fam is Family.SC:
        return 2.0 * math.sqrt(2.0) * np.sin(np.pi * d)
    if fam is Family.RC:
        c = 2.0 / math.sqrt(4.0 + 3.0 * beta - beta * beta)
        return c * T * np.sin(np.pi * T * d / (2.0 * beta)) ** 2
    if fam is Family.PL:
        c = math.sqrt(3.0 / (3.0 + 2.0 * beta - beta * beta))
        return c * T * (T / beta) * d
    if fam is Family.BTN:
        c = 1.0 / math.sqrt(1.0 + 0.64 * beta - 0.36 * beta * beta)
        gam = math.log(2.0) * 2.0 * T / beta
        return c * T * -np.expm1(-gam * d)
    k = (1.0 + beta) / (2.0 * beta * CANONICAL_W)
    return _icit_phi(k * d) / (2.0 * _ICIT_GAMMA)


def eval_freq_from_edge(pulse: PulseSpec, d):
    """Normalized ghat(W - d), accurate for tiny d; valid on the last spectral piece."""
    out = normalize(pulse) * _raw_freq_from_edge(pulse, d)
    return out if np.ndim(out) else float(out)


def spectral_breakpoints(pulse: PulseSpec) -> list:
    """Interior points of (0, W) where the spectrum changes formula."""
    beta = pulse.beta
    W = CANONICAL_W
    if pulse.family in (Family.RC, Family.PL):
        pts = [(1.0 - beta) / (1.0 + beta) * W]
    elif pulse.family is Family.BTN:
        pts = [(1.0 - beta) / (1.0 + beta) * W, W / (1.0 + beta)]
    elif pulse.family is Family.ICIT:
        pts = [(1.0 - beta) / (1.0 + beta) * W, W / (1.0 + beta)]
    else:
        pts = []
    return sorted(p for p in pts if 0.0 < p < W)


@functools.lru_cache(maxsize=None)
def normalize(pulse: PulseSpec) -> float:
    """Scale factor that makes the raw closed-form pulse meet its normalization."""
    if pulse.normalization is Normalization.AREA:
        area = float(_raw_freq(pulse, 0.0))
        if area == 0.0:
            raise ZeroArea(f"{pulse.label()} has zero area")
        return (1.0 / (2.0 * CANONICAL_W)) / area
    edges = [0.0, *spectral_breakpoints(pulse), CANONICAL_W]
    energy = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda f: float(_raw_freq(pulse, f)) ** 2, a, b,
                                epsabs=0.0, epsrel=1e-13, limit=200)
        energy += 2.0 * val
    return math.sqrt((1.0 / (2.0 * CANONICAL_W)) / energy)


def eval_freq(pulse: PulseSpec, f):
    """Normalized spectrum ghat(f); zero outside [-W, W]."""
    out = normalize(pulse) * _raw_freq(pulse, f)
    return out if np.ndim(out) else float(out)


def eval_time(pulse: PulseSpec, t):
    """Normalized g(t) for the families with a closed time-domain form."""
    if pulse.family is Family.ICIT:
        raise UnsupportedFamily("ICIT has no closed time-domain form; use icit_time_samples")
    t_arr = np.asarray(t, dtype=float)
    vals = _kernels.raw_values(_CODES[pulse.family], pulse.beta, t_arr.ravel())
    out = normalize(pulse) * vals.reshape(t_arr.shape)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# shifted evaluation: g(tau - i) for integer shifts i

def _icit_shift_table(pulse: PulseSpec, taus, n: int, nfft: int):
    """Rows g(tau_j - i), i = -n..n, from a uniform nfft-point frequency grid.

    The frequency sum is a Riemann sum of the inverse transform at spacing
    1/nfft, which equals the time-periodized pulse with period nfft.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    half = nfft // 2
    fk = np.arange(half + 1) / nfft
    spectrum = eval_freq(pulse, fk).astype(complex)
    idx = np.mod(-np.arange(-n, n + 1), nfft)
    out = np.empty((taus.size, 2 * n + 1))
    steps = np.diff(taus)
    uniform = taus.size > 2 and np.allclose(steps, steps[0], rtol=0, atol=1e-15)
    if uniform:
        # phase rows by recurrence; drift after 4096 steps is ~1e-13
        step = np.exp(2j * np.pi * fk * steps[0])
        phase = np.exp(2j * np.pi * fk * taus[0])
    rows = max(1, (1 << 23) // nfft)
    for start in range(0, taus.size, rows):
        stop = min(start + rows, taus.size)
        if uniform:
            block = np.empty((stop - start, half + 1), dtype=complex)
            for r in range(stop - start):
                block[r] = phase
                phase = phase * step
            block *= spectrum
        else:
            block = spectrum[None, :] * np.exp(2j * np.pi * fk[None, :] * taus[start:stop, None])
        # irfft carries the 1/nfft weight of the Riemann sum
        out[start:stop] = np.fft.irfft(block, n=nfft, axis=1)[:, idx]
    return out


def _icit_nfft(n: int, oversample: int = 8) -> int:
    return max(1 << 12, 1 << int(math.ceil(math.log2(oversample * n + 1))))


def shifted_values(pulse: PulseSpec, tau: float, n: int) -> np.ndarray:
    """``g(tau - i)`` for ``i = -n..n``."""
    if pulse.family is Family.ICIT:
        # wide period: aliased copies would otherwise bias the far terms
        return _icit_shift_table(pulse, [tau], n, _icit_nfft(n, 64))[0]
    return eval_time(pulse, tau - np.arange(-n, n + 1, dtype=float))


def shifted_abs_sums(pulse: PulseSpec, taus, n: int) -> np.ndarray:
    """``sum_{i=-n..n} |g(tau - i)|`` for every tau."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if pulse.family is Family.ICIT:
        return np.abs(_icit_shift_table(pulse, taus, n, _icit_nfft(n))).sum(axis=1)
    return _kernels.abs_shift_sums(_CODES[pulse.family], pulse.beta, normalize(pulse), taus, n)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IcitSamples:
    t: np.ndarray
    g: np.ndarray
    error: float  # max change when the frequency grid is refined 2x


def icit_time_samples(pulse: PulseSpec, t_max: float, dt: float,
                      nfft: int = 1 << 16) -> IcitSamples:
    """Uniform samples of the ICIT pulse on [-t_max, t_max] by inverse synthesis."""
    if pulse.family is not Family.ICIT:
        raise UnsupportedFamily("icit_time_samples only applies to ICIT")
    if dt > 1.0 / (8.0 * CANONICAL_W) + 1e-15:
        raise ValueError(f"dt={dt} is coarser than 1/(8W)")
    if t_max < 64.0:
        raise ValueError(f"t_max={t_max} is shorter than 64 symbol periods")
    per = 1.0 / dt
    if abs(per - round(per)) > 1e-9:
        raise ValueError("dt must divide the symbol period")
    per = int(round(per))
    n = int(math.ceil(t_max)) + 1
    nfft = max(nfft, 1 << 16, 1 << int(math.ceil(math.log2(8 * n))))
    taus = np.arange(per) / per

    def grid(nf):
        table = _icit_shift_table(pulse, taus, n, nf)
        t = taus[:, None] - np.arange(-n, n + 1)[None, :]
        return t.ravel(), table.ravel()

    t, g = grid(nfft)
    _, g2 = grid(2 * nfft)
    order = np.argsort(t)
    t, g, g2 = t[order], g[order], g2[order]
    keep = np.abs(t) <= t_max + 1e-12
    t, g, g2 = t[keep], g[keep], g2[keep]
    err = float(np.max(np.abs(g - g2)))
    if err > 1e-6 * float(np.max(np.abs(g))):
        raise ResolutionTooCoarse(f"ICIT synthesis self-consistency {err:.3g} too large")
    return IcitSamples(t=t, g=g, error=err)
