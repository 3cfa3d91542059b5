"""Hot kernels for closed-form pulses.

Every kernel exists twice: a numba version (``*_nb``) and a numpy version
(``*_np``). The public names dispatch on ``_accel.USE_NUMBA``. Pulses are
evaluated in their raw closed form with W = 1/2 (symbol period 1); callers
multiply by the normalization scale.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

SINC, S2, SC, RC, PL, BTN = 0, 1, 2, 3, 4, 5

_SQRT2 = math.sqrt(2.0)
_SQRT3_2 = math.sqrt(3.0) / 2.0
_LN2 = math.log(2.0)
# |denominator| below this switches to the analytic limit branch
_GUARD = 1e-9


@njit(cache=True)
def _sinc(x):
    if x == 0.0:
        return 1.0
    px = math.pi * x
    return math.sin(px) / px


@njit(cache=True)
def _raw_scalar(code, beta, t):
    if code == SINC:
        return _sinc(t)
    if code == S2:
        s = _sinc(0.5 * t)
        return _SQRT3_2 * s * s
    if code == SC:
        # sqrt2 * (sinc(t - 1/2) + sinc(t + 1/2)) in cancellation-free form
        den = 0.25 - t * t
        if abs(den) < _GUARD:
            return _SQRT2
        return _SQRT2 * math.cos(math.pi * t) / (math.pi * den)
    T = 1.0 + beta
    if code == RC:
        c = 2.0 / math.sqrt(4.0 + 3.0 * beta - beta * beta)
        x = 2.0 * beta * t / T
        den = 1.0 - x * x
        if abs(den) < _GUARD:
            return c * 0.25 * math.pi * _sinc(0.5 / beta)
        return c * _sinc(t / T) * math.cos(math.pi * beta * t / T) / den
    if code == PL:
        c = math.sqrt(3.0 / (3.0 + 2.0 * beta - beta * beta))
        return c * _sinc(t / T) * _sinc(beta * t / T)
    if code == BTN:
        c = 1.0 / math.sqrt(1.0 + 0.64 * beta - 0.36 * beta * beta)
        a = math.pi * beta * t / T
        num = (2.0 * a / _LN2) * math.sin(a) + 2.0 * math.cos(a) - 1.0
        den = (a / _LN2) ** 2 + 1.0
        return c * _sinc(t / T) * num / den
    return math.nan


@njit(cache=True)
def raw_values_nb(code, beta, t):
    out = np.empty(t.size)
    flat = t.ravel()
    for k in range(flat.size):
        out[k] = _raw_scalar(code, beta, flat[k])
    return out.reshape(t.shape)


@njit(cache=True)
def abs_shift_sums_nb(code, beta, scale, taus, n):
    out = np.empty(taus.size)
    for j in range(taus.size):
        tau = taus[j]
        acc = 0.0
        for i in range(-n, n + 1):
            acc += abs(_raw_scalar(code, beta, tau - i))
        out[j] = scale * acc
    return out


def raw_values_np(code, beta, t):
    t = np.asarray(t, dtype=float)
    if code == SINC:
        return np.sinc(t)
    if code == S2:
        return _SQRT3_2 * np.sinc(0.5 * t) ** 2
    if code == SC:
        den = 0.25 - t * t
        safe = np.where(np.abs(den) < _GUARD, 1.0, den)
        return np.where(np.abs(den) < _GUARD, _SQRT2,
                        _SQRT2 * np.cos(np.pi * t) / (np.pi * safe))
    T = 1.0 + beta
    if code == RC:
        c = 2.0 / math.sqrt(4.0 + 3.0 * beta - beta * beta)
        x = 2.0 * beta * t / T
        den = 1.0 - x * x
        near = np.abs(den) < _GUARD
        safe = np.where(near, 1.0, den)
        body = np.sinc(t / T) * np.cos(np.pi * beta * t / T) / safe
        return c * np.where(near, 0.25 * np.pi * np.sinc(0.5 / beta), body)
    if code == PL:
        c = math.sqrt(3.0 / (3.0 + 2.0 * beta - beta * beta))
        return c * np.sinc(t / T) * np.sinc(beta * t / T)
    if code == BTN:
        c = 1.0 / math.sqrt(1.0 + 0.64 * beta - 0.36 * beta * beta)
        a = np.pi * beta * t / T
        num = (2.0 * a / _LN2) * np.sin(a) + 2.0 * np.cos(a) - 1.0
        den = (a / _LN2) ** 2 + 1.0
        return c * np.sinc(t / T) * num / den
    raise ValueError(f"unknown family code {code}")


def abs_shift_sums_np(code, beta, scale, taus, n, chunk=1 << 22):
    taus = np.asarray(taus, dtype=float)
    shifts = np.arange(-n, n + 1, dtype=float)
    rows = max(1, chunk // shifts.size)
    out = np.empty(taus.size)
    for start in range(0, taus.size, rows):
        block = taus[start:start + rows, None] - shifts[None, :]
        out[start:start + rows] = np.abs(raw_values_np(code, beta, block)).sum(axis=1)
    return scale * out


def raw_values(code, beta, t):
    t = np.asarray(t, dtype=float)
    if USE_NUMBA:
        return raw_values_nb(code, float(beta), np.ascontiguousarray(t))
    return raw_values_np(code, beta, t)


def abs_shift_sums(code, beta, scale, taus, n):
    """``scale * sum_{i=-n..n} |g_raw(tau - i)|`` for every tau."""
    taus = np.ascontiguousarray(taus, dtype=float)
    if USE_NUMBA:
        return abs_shift_sums_nb(code, float(beta), float(scale), taus, int(n))
    return abs_shift_sums_np(code, beta, scale, taus, n)


# Gaussian-channel transfers on a fine output grid. Input i sits at output
# index base + i*m; ``k`` is the noise kernel sampled at offsets -h..h.
# Direct sums keep the far tails of q accurate to full relative precision,
# which an FFT convolution cannot do.

@njit(cache=True)
def spread_nb(p, k, base, m, ny):
    h = (k.size - 1) // 2
    q = np.zeros(ny)
    for i in range(p.size):
        w = p[i]
        if w == 0.0:
            continue
        c = base + i * m
        lo = max(0, c - h)
        hi = min(ny - 1, c + h)
        for t in range(lo, hi + 1):
            q[t] += w * k[t - c + h]
    return q


@njit(cache=True)
def gather_nb(v, k, base, m, n):
    h = (k.size - 1) // 2
    ny = v.size
    out = np.empty(n)
    for i in range(n):
        c = base + i * m
        lo = max(0, c - h)
        hi = min(ny - 1, c + h)
        acc = 0.0
        for t in range(lo, hi + 1):
            acc += k[t - c + h] * v[t]
        out[i] = acc
    return out


def spread_np(p, k, base, m, ny):
    h = (k.size - 1) // 2
    up = np.zeros(ny + 2 * h)
    up[base + h:base + h + (p.size - 1) * m + 1:m] = p
    return np.convolve(up, k, mode="valid")


def gather_np(v, k, base, m, n):
    h = (k.size - 1) // 2
    pad = np.concatenate([np.zeros(h), v, np.zeros(h)])
    full = np.correlate(pad, k, mode="valid")
    return full[base:base + (n - 1) * m + 1:m]


def spread(p, k, base, m, ny):
    """q_t = sum_i p_i k[t - base - i m]."""
    if USE_NUMBA:
        return spread_nb(np.ascontiguousarray(p, dtype=float), k, int(base), int(m), int(ny))
    return spread_np(p, k, base, m, ny)


def gather(v, k, base, m, n):
    """out_i = sum_t k[t - base - i m] v_t."""
    if USE_NUMBA:
        return gather_nb(np.ascontiguousarray(v, dtype=float), k, int(base), int(m), int(n))
    return gather_np(v, k, base, m, n)
