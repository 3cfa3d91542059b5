"""PAPR-constrained bandlimited Gaussian channel: lower bound via i.i.d. PAM.

With the average power normalized to P = 1, the symbols are confined to
|x| <= sqrt(r)/S. For r/S^2 <= 3 the entropy-maximizing law is uniform; above
that it is a truncated Gaussian whose shape parameter lambda solves

    r / (2 S^2) = lambda^2 + 2 lambda^3 / (sqrt(pi) erf(lambda) exp(lambda^2) - 2 lambda).
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import DivergedPulse, RegimeError
from .metrics import PulseMetrics

_SQRT_PI = math.sqrt(math.pi)
_SERIES_CUTOFF = 0.5


class BlgcRegime(str, enum.Enum):
    TRUNC_GAUSSIAN = "TRUNC_GAUSSIAN"
    UNIFORM = "UNIFORM"


@dataclass(frozen=True)
class PaprConstraint:
    """Peak-to-average power ratio r; ``math.inf`` means average power only."""

    r: float

    def __post_init__(self):
        if math.isnan(self.r) or self.r <= 0:
            raise ValueError(f"PAPR must be positive, got {self.r}")


@dataclass(frozen=True)
class BlgcBound:
    eta: float
    regime: BlgcRegime
    r: float
    lam: Optional[float] = None
    sigma_sq_over_P: Optional[float] = None
    entropy_nats: float = math.nan


def _papr(r) -> float:
    return PaprConstraint(r.r if isinstance(r, PaprConstraint) else float(r)).r


def _cubic_over_gap(lam: float) -> float:
    """2 lam^3 / (sqrt(pi) erf(lam) e^{lam^2} - 2 lam), finite at lam = 0 (value 3/2)."""
    if lam < _SERIES_CUTOFF:
        # sqrt(pi) erf(x) e^{x^2} - 2x = 2 sum_{n>=1} 2^n x^{2n+1} / (2n+1)!!
        x2 = lam * lam
        term, total, n = 2.0 / 3.0, 0.0, 1
        while True:
            total += term
            n += 1
            term *= 2.0 * x2 / (2 * n + 1)
            if term < 1e-17 * total:
                break
        return 1.0 / total
    e = math.exp(-lam * lam)
    return 2.0 * lam ** 3 * e / (_SQRT_PI * math.erf(lam) - 2.0 * lam * e)


def lambda_rhs(lam: float) -> float:
    return lam * lam + _cubic_over_gap(lam)


@functools.lru_cache(maxsize=1)
def _rhs_is_monotone() -> bool:
    grid = np.concatenate([np.linspace(0.0, 2.0, 401), np.geomspace(2.0, 1e4, 400)[1:]])
    vals = np.array([lambda_rhs(x) for x in grid])
    return bool(np.all(np.diff(vals) > 0))


def solve_lambda(r: float, S: float) -> float:
    """Unique lambda > 0 with lambda_rhs(lambda) = r / (2 S^2); needs r/S^2 > 3."""
    ratio = r / (S * S)
    if not ratio > 3.0:
        raise RegimeError(f"r/S^2 = {ratio:g} <= 3: the uniform law is maxentropic")
    if not _rhs_is_monotone():  # pragma: no cover - numerical self-check
        raise RuntimeError("lambda equation lost monotonicity; root would not be unique")
    target = 0.5 * ratio
    hi = max(10.0, math.sqrt(target) + 5.0)
    lam = optimize.brentq(lambda x: lambda_rhs(x) - target, 0.0, hi,
                          xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return lam


def _truncated_gaussian(r: float, S: float, G: float):
    lam = solve_lambda(r, S)
    two_l2s2_over_r = 2.0 * lam * lam * S * S / r  # equals P / sigma^2
    sigma2 = 1.0 / two_l2s2_over_r
    erf_l = math.erf(lam)
    eta = G * erf_l * erf_l * math.exp(two_l2s2_over_r) / (math.e * two_l2s2_over_r)
    h = 0.5 * math.log(2 * math.pi * math.e * sigma2 * erf_l * erf_l
                       * math.exp(two_l2s2_over_r - 1.0))
    return eta, lam, sigma2, h


def uniform_entropy(r: float, S: float) -> float:
    return math.log(2.0 * math.sqrt(r) / S)


def eta_blgc(r, metrics: PulseMetrics) -> BlgcBound:
    """Pre-SNR factor of the PAM lower bound for PAPR r and pulse metrics (S, G)."""
    r = _papr(r)
    if metrics.diverged or not math.isfinite(metrics.S):
        raise DivergedPulse(f"{metrics.pulse.label()} has a divergent peak superposition")
    S, G = metrics.S, metrics.G
    if math.isinf(r):
        return BlgcBound(eta=G, regime=BlgcRegime.TRUNC_GAUSSIAN, r=r, lam=math.inf,
                         sigma_sq_over_P=1.0, entropy_nats=0.5 * math.log(2 * math.pi * math.e))
    if r / (S * S) > 3.0:
        eta, lam, sigma2, h = _truncated_gaussian(r, S, G)
        return BlgcBound(eta=eta, regime=BlgcRegime.TRUNC_GAUSSIAN, r=r, lam=lam,
                         sigma_sq_over_P=sigma2, entropy_nats=h)
    eta = 2.0 * G * r / (math.pi * math.e * S * S)
    return BlgcBound(eta=eta, regime=BlgcRegime.UNIFORM, r=r, entropy_nats=uniform_entropy(r, S))


def pp_blgc_eta(metrics: PulseMetrics) -> float:
    """Pre-PNR factor 2G/(pi e S^2) for a pure amplitude constraint."""
    if metrics.diverged:
        raise DivergedPulse(f"{metrics.pulse.label()} has a divergent peak superposition")
    return 2.0 * metrics.G / (math.pi * math.e * metrics.S ** 2)


def blgc_lower_rate(W: float, snr: float, bound) -> float:
    """W log2(1 + eta SNR) in bits per second."""
    if not snr > 0:
        raise ValueError(f"SNR must be positive, got {snr}")
    eta = bound.eta if isinstance(bound, BlgcBound) else float(bound)
    return W * math.log2(1.0 + eta * snr)


def awgn_rate(W: float, snr: float) -> float:
    return W * math.log2(1.0 + snr)


def lambda_residual(lam: float, r: float, S: float) -> float:
    """Relative residual of the lambda equation."""
    target = r / (2.0 * S * S)
    return abs(lambda_rhs(lam) - target) / target


def sigma_equation_residual(bound: BlgcBound, S: float) -> float:
    """Residual of P/sigma^2 = 1 - 2 lam / (sqrt(pi) erf(lam) e^{lam^2}) at P = 1."""
    lam = bound.lam
    rhs = 1.0 - 2.0 * lam * math.exp(-lam * lam) / (_SQRT_PI * math.erf(lam))
    return abs(1.0 / bound.sigma_sq_over_P - rhs)

