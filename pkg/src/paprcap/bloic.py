"""PAPR-constrained bandlimited optical intensity channel: PAM lower bound.

Pulses are area-normalized and the average optical power is 1, so the
nonnegative symbols live on [0, r/S]. For r <= 2 the maxentropic law is
uniform; above 2 it is exponential-family, shape mu, where mu solves

    (2S - rS + r) / (2r) = 1/mu - 1/(e^mu - 1).

The right side decreases from 1 (mu -> -inf) through 1/2 (mu = 0) to 0.
For r > 2 the left side is below 1/2, so mu > 0. When S > 1 and
r >= 2S/(S - 1) the left side is <= 0 and no mu exists; the bound is
reported as its limiting value 0 there.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .blgc import PaprConstraint
from .errors import DivergedPulse, NormalizationMismatch, RegimeError
from .metrics import PulseMetrics
from .pulses import Normalization

_SERIES_WINDOW = 1e-3
_LARGE_MU = 30.0


class BloicRegime(str, enum.Enum):
    EXP_FAMILY = "EXP_FAMILY"
    UNIFORM = "UNIFORM"


@dataclass(frozen=True)
class BloicBound:
    eta: float
    regime: BloicRegime
    r: float
    mu: Optional[float]
    S: float
    G: float


def mu_rhs(mu: float) -> float:
    """1/mu - 1/(e^mu - 1), with the removable singularity at 0 filled in."""
    if abs(mu) < _SERIES_WINDOW:
        m2 = mu * mu
        return 0.5 - mu / 12.0 + mu * m2 / 720.0 - mu * m2 * m2 / 30240.0
    if mu > _LARGE_MU:
        e = math.exp(-mu)
        return 1.0 / mu - e / (1.0 - e)
    return 1.0 / mu - 1.0 / math.expm1(mu)


def mu_lhs(r: float, S: float) -> float:
    return (2.0 * S - r * S + r) / (2.0 * r)


@functools.lru_cache(maxsize=1)
def _rhs_is_monotone() -> bool:
    grid = np.concatenate([-np.geomspace(50.0, 1e-6, 300), [0.0], np.geomspace(1e-6, 1e3, 400)])
    vals = np.array([mu_rhs(m) for m in grid])
    return bool(np.all(np.diff(vals) < 0))


def solve_mu(r: float, S: float) -> float:
    """Root of mu_rhs(mu) = mu_lhs(r, S) for r > 2; ``inf`` when the left side is <= 0."""
    if not r > 2.0:
        raise RegimeError(f"r = {r:g} <= 2: the uniform law is maxentropic")
    if not _rhs_is_monotone():  # pragma: no cover - numerical self-check
        raise RuntimeError("mu equation lost monotonicity; root would not be unique")
    target = mu_lhs(r, S)
    if target <= 0.0:
        return math.inf
    if target >= 0.5:
        # only reachable through rounding for r a hair above 2
        return 0.0
    hi = max(50.0, 2.0 / target)
    f = lambda m: mu_rhs(m) - target
    return optimize.brentq(f, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def mu_residual(mu: float, r: float, S: float) -> float:
    return abs(mu_rhs(mu) - mu_lhs(r, S))


def _check(metrics: PulseMetrics):
    if metrics.normalization is not Normalization.AREA:
        raise NormalizationMismatch(
            f"optical intensity bounds need AREA-normalized metrics, got {metrics.normalization.value}")
    if metrics.diverged or not math.isfinite(metrics.S):
        raise DivergedPulse(f"{metrics.pulse.label()} has a divergent peak superposition")


def eta_bloic(r, metrics: PulseMetrics) -> BloicBound:
    """Pre-OSNR factor for PAPR r with area-normalized pulse metrics (S, G)."""
    r = PaprConstraint(r.r if isinstance(r, PaprConstraint) else float(r)).r
    _check(metrics)
    S, G = metrics.S, metrics.G
    if math.isinf(r):
        raise ValueError("optical intensity bound needs a finite PAPR")
    base = G * r * r / (2.0 * math.pi * math.e * S * S)
    if r <= 2.0:
        return BloicBound(eta=base, regime=BloicRegime.UNIFORM, r=r, mu=None, S=S, G=G)
    mu = solve_mu(r, S)
    if math.isinf(mu):
        return BloicBound(eta=0.0, regime=BloicRegime.EXP_FAMILY, r=r, mu=mu, S=S, G=G)
    lhs = mu_lhs(r, S)
    # ((e^mu - 1)/(mu e^mu))^2 = ((1 - e^-mu)/mu)^2, equal to 1 at mu = 0
    shape = -math.expm1(-mu) / mu if mu > 0 else 1.0
    eta = base * shape * shape * math.exp(2.0 * lhs * mu)
    return BloicBound(eta=eta, regime=BloicRegime.EXP_FAMILY, r=r, mu=mu, S=S, G=G)


def bloic_lower_rate(W: float, osnr: float, bound) -> float:
    """W log2(1 + eta OSNR^2) in bits per second."""
    if not osnr > 0:
        raise ValueError(f"OSNR must be positive, got {osnr}")
    eta = bound.eta if isinstance(bound, BloicBound) else float(bound)
    return W * math.log2(1.0 + eta * osnr * osnr)
