"""Discrete-time Gaussian channel Y = X + Z with amplitude and power limits.

The capacity is computed by Blahut-Arimoto on a uniform input grid. The
output density is sampled on a finer grid that contains every input point,
so one sampled Gaussian serves all rows. Integrals over y use the
trapezoid rule, which is spectrally accurate for Gaussian integrands at
step sigma/40. The transfers are direct sums rather than FFTs: the far
tails of the output law decide whether the dual bound is valid, and FFT
roundoff would bury them.

Each iteration brackets the capacity:

    I(p) <= C <= max_x [ D(p(.|x) || q) - s (x^2 - P) ]

for any output law q and any multiplier s >= 0, so the gap between the two
ends is a certificate of optimality (a KKT residual).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from . import _kernels
from .errors import GridTooCoarse, NotConverged

LOG2E = 1.0 / math.log(2.0)
Y_STEP_PER_SIGMA = 40
Y_TAIL_SIGMAS = 8.0
# kernel reach; exp(-z^2/2) stays a normal double out to about 38 sigma
KERNEL_SIGMAS = 37.0
MIN_GRID_POINTS = 201
MAX_TOL = 1e-7
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200_000
PRUNE_BELOW = 1e-12
# a dip below this fraction of the smaller neighbouring peak splits a cluster
SPLIT_DEPTH = 1e-3
WARM_ITER = 300
# peaks of the warm-start law above this fraction of the largest seed the support
SUPPORT_FLOOR = 1e-6
NEW_POINT_WEIGHT = 1e-6
MAX_NEW_POINTS = 4
MAX_ROUNDS = 200
MU_START = 1e-3
MU_RESTART = 1e-7
MU_SHRINK = 0.1
# the path stops once (K + 1) mu is this share of tol
BARRIER_SHARE = 1e-2
# Newton decrement (squared) below this multiple of mu counts as centred
CENTERED = 1e-3
MAX_CENTERING_STEPS = 100
# objective changes below this relative size are lost to rounding
ROUNDING = 1e-13
FEASIBLE_MARGIN = 1e-6
RESIDUE = 1e-8  # weights this small are barrier leftovers unless the certificate needs them


@dataclass(frozen=True)
class DtgcProblem:
    amp_low: float
    amp_high: float
    power_limit: Optional[float] = None
    noise_var: float = 1.0

    def __post_init__(self):
        if not self.amp_low < self.amp_high:
            raise ValueError(f"amplitude window [{self.amp_low}, {self.amp_high}] is empty")
        if self.power_limit is not None and not self.power_limit > 0:
            raise ValueError(f"power limit must be positive, got {self.power_limit}")
        if not self.noise_var > 0:
            raise ValueError(f"noise variance must be positive, got {self.noise_var}")


@dataclass(frozen=True)
class DtgcSolution:
    capacity_bits_per_use: float
    mass_points: list
    lagrange_power: float
    kkt_residual: float
    iterations: int
    lower_bits: float
    grid: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)
    info_density: np.ndarray = field(repr=False)

    def second_moment(self) -> float:
        """E[X^2] of the grid law (cluster centroids would understate it)."""
        return float(np.dot(self.probabilities, self.grid * self.grid))


class _Grid:
    """Input grid, aligned output grid and the sampled noise density."""

    def __init__(self, problem: DtgcProblem, n: int):
        self.sigma = sigma = math.sqrt(problem.noise_var)
        self.x = np.linspace(problem.amp_low, problem.amp_high, n)
        self.n = n
        self.h_x = self.x[1] - self.x[0]
        self.m = max(1, math.ceil(Y_STEP_PER_SIGMA * self.h_x / sigma))
        self.h_y = self.h_x / self.m
        self.base = math.ceil(Y_TAIL_SIGMAS * sigma / self.h_y)
        self.ny = (n - 1) * self.m + 2 * self.base + 1
        self.y = self.x[0] + (np.arange(self.ny) - self.base) * self.h_y
        reach = math.ceil(KERNEL_SIGMAS * sigma / self.h_y)
        z = np.arange(-reach, reach + 1) * self.h_y / sigma
        # trapezoid weight times noise density
        self.k = np.exp(-0.5 * z * z) * self.h_y / (sigma * math.sqrt(2.0 * math.pi))
        self.c0 = -0.5 * math.log(2.0 * math.pi * math.e * problem.noise_var)
        # reflecting the window maps feasible laws to feasible laws
        self.mirror = problem.power_limit is None or problem.amp_low == -problem.amp_high

    def output_density(self, p: np.ndarray) -> np.ndarray:
        return _kernels.spread(p, self.k, self.base, self.m, self.ny) / self.h_y

    def divergence(self, logq: np.ndarray) -> np.ndarray:
        """D(p(.|x) || q) in nats at every grid input."""
        return self.c0 - _kernels.gather(logq, self.k, self.base, self.m, self.n)


def _solve_multiplier(logp_d: np.ndarray, x2: np.ndarray, P: float) -> float:
    """Smallest s >= 0 with E[x^2] <= P under p ~ exp(logp_d - s x^2)."""

    def excess(s):
        a = logp_d - s * x2
        w = np.exp(a - a.max())
        return float(np.dot(w, x2) / w.sum()) - P

    if excess(0.0) <= 0.0:
        return 0.0
    hi = 10.0
    while excess(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise NotConverged("power multiplier bracket exploded")
    return optimize.brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-14)


def cluster_mass_points(x: np.ndarray, p: np.ndarray, prune: float = PRUNE_BELOW):
    """Group grid mass into support points: drop tiny weights, split runs at deep dips."""
    keep = p > prune
    points = []
    i, n = 0, p.size
    while i < n:
        if not keep[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and keep[j + 1]:
            j += 1
        points.extend(_split_run(x[i:j + 1], p[i:j + 1]))
        i = j + 1
    total = sum(w for _, w in points)
    return [(loc, w / total) for loc, w in points]


def _split_run(x: np.ndarray, p: np.ndarray):
    cuts = [0]
    k = 1
    while k < p.size - 1:
        if p[k] <= p[k - 1] and p[k] <= p[k + 1]:
            left = p[cuts[-1]:k].max()
            right = p[k + 1:].max()
            if p[k] < SPLIT_DEPTH * min(left, right):
                cuts.append(k + 1)
        k += 1
    cuts.append(p.size)
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        w = float(p[a:b].sum())
        # rounding can push a centroid an ulp outside its run
        loc = float(np.dot(x[a:b], p[a:b]) / w)
        out.append((min(max(loc, float(x[a])), float(x[b - 1])), w))
    return out


def _local_maxima(v: np.ndarray) -> np.ndarray:
    left = np.r_[True, v[1:] >= v[:-1]]
    right = np.r_[v[:-1] >= v[1:], True]
    return np.flatnonzero(left & right)


class _BaState:
    def __init__(self, p, s, lower, upper, dens, iterations):
        self.p, self.s, self.lower, self.upper = p, s, lower, upper
        self.dens, self.iterations = dens, iterations


def _blahut_arimoto(grid: _Grid, P: Optional[float], stop_nats: float, max_iter: int,
                    strict: bool) -> _BaState:
    """Iterate until the bracket is below ``stop_nats``; after ``max_iter`` raise or hand back."""
    x2 = grid.x * grid.x
    p = np.full(grid.n, 1.0 / grid.n)
    s, lower, upper = 0.0, -math.inf, math.inf
    feasible = P is None or float(np.dot(p, x2)) <= P
    for it in range(1, max_iter + 1):
        logq = np.log(np.maximum(grid.output_density(p), 1e-300))
        d = grid.divergence(logq)
        logp = np.log(np.maximum(p, 1e-300))
        if P is not None:
            s = _solve_multiplier(logp + d, x2, P)
            dens = d - s * (x2 - P)
        else:
            dens = d
        upper = float(dens.max())
        if feasible:
            lower = float(np.dot(p, d))
            if upper - lower < stop_nats:
                return _BaState(p, s, lower, upper, dens, it)
        a = logp + dens
        w = np.exp(a - a.max())
        p = w / w.sum()
        feasible = True
    if strict:
        raise NotConverged(
            f"Blahut-Arimoto gap {(upper - lower) * LOG2E:.3g} bits after {max_iter} iterations")
    return _BaState(p, s, lower, upper, dens, max_iter)


def _rows(grid: _Grid, idx: np.ndarray) -> np.ndarray:
    """Noise densities p(y | x_i) on the whole output grid, one row per input."""
    z = (grid.y[None, :] - grid.x[idx][:, None]) / grid.sigma
    return np.exp(-0.5 * z * z) / (grid.sigma * math.sqrt(2.0 * math.pi))


def _interior(grid: _Grid, state: _BaState, P: Optional[float], tol_nats: float):
    """Log-barrier Newton ascent of I(p) on a growing candidate support.

    Blahut-Arimoto closes its bracket only at rate 1/k. Here the candidate
    support S starts from the peaks of the warm-start law. On S the weights
    w maximize

        I(w) + mu [ sum_i log w_i + log(P - E[X^2]) ],   sum_i w_i = 1,

    by damped Newton steps with the exact Hessian of I, following mu down
    until the barrier gap (K + 1) mu is negligible. Weights can only tend to
    zero, never leave S, so the support cannot cycle. The grid bracket then
    either certifies the result or names the inputs where the information
    density beats the lower bound; the strongest of those join S and the
    path is resumed.
    """
    x2 = grid.x * grid.x
    peaks = _local_maxima(state.p)
    peaks = peaks[state.p[peaks] > SUPPORT_FLOOR * state.p.max()]
    S = np.unique(np.clip(np.r_[peaks - 1, peaks, peaks + 1], 0, grid.n - 1))
    if P is not None:
        S = np.union1d(S, [int(np.argmin(x2))])
    w = np.maximum(state.p[S], 1e-12)
    w /= w.sum()
    sigma = None
    if P is not None:
        w = _strictly_feasible(w, x2[S], P)
        sigma = P - float(x2[S] @ w)
    rows = _rows(grid, S)
    mu, steps = MU_START, 0
    for _ in range(MAX_ROUNDS):
        while True:
            w, sigma, n = _center(grid, rows, w, x2[S], sigma, mu)
            steps += n
            if (S.size + 1) * mu < BARRIER_SHARE * tol_nats:
                break
            mu *= MU_SHRINK
        p = np.zeros(grid.n)
        p[S] = w
        s = _best_multiplier(grid, p, P)
        upper, lower, dens = _grid_bracket(grid, p, s, P)
        if upper - lower <= tol_nats:
            return _purge(grid, p, s, lower, upper, dens, P, tol_nats) + (steps,)
        peaks = _local_maxima(dens)
        new = np.setdiff1d(peaks[dens[peaks] > lower + tol_nats], S)
        if new.size == 0:
            raise NotConverged(
                f"interior refinement stalled with a gap of {(upper - lower) * LOG2E:.3g} bits")
        new = new[np.argsort(dens[new])[::-1][:MAX_NEW_POINTS]]
        S = np.r_[S, new]
        w = np.r_[w * (1.0 - NEW_POINT_WEIGHT), np.full(new.size, NEW_POINT_WEIGHT / new.size)]
        order = np.argsort(S)
        S, w = S[order], w[order]
        if P is not None:
            w = _strictly_feasible(w, x2[S], P)
            sigma = P - float(x2[S] @ w)
        rows = _rows(grid, S)
        mu = max(mu, MU_RESTART)
    raise NotConverged(f"interior refinement needed more than {MAX_ROUNDS} support rounds")


def _purge(grid: _Grid, p, s, lower, upper, dens, P, tol_nats):
    """Tidy a certified law without losing the certificate.

    On a mirror-symmetric problem the reflected law is optimal too and, I
    being concave, so is the average; it removes the drift that nearly flat
    directions leave in the weights. The barrier also leaves weight of
    order mu / deficit on support points whose density sits below the
    capacity; they carry no mass at the optimum and are dropped, as are
    weights below RESIDUE. Each change is kept only if the bracket of the
    new law still closes.
    """
    def attempt(q):
        q = q / q.sum()
        if P is not None and float(q @ (grid.x * grid.x)) > P * (1.0 + 1e-12):
            return None
        s2 = _best_multiplier(grid, q, P)
        upper2, lower2, dens2 = _grid_bracket(grid, q, s2, P)
        if upper2 - lower2 > tol_nats:
            return None
        return q, s2, lower2, upper2, dens2

    best = (p, s, lower, upper, dens)
    if grid.mirror:
        best = attempt(0.5 * (p + p[::-1])) or best
    p, dens, lower = best[0], best[4], best[2]
    drop = (p > 0.0) & (dens < lower - tol_nats)
    if drop.any():
        best = attempt(np.where(drop, 0.0, p)) or best
    p = best[0]
    drop = (p > 0.0) & (p < RESIDUE)
    if drop.any():
        best = attempt(np.where(drop, 0.0, p)) or best
    return best


def _strictly_feasible(w, x2, P):
    """Shift weight onto the lowest-power input until E[X^2] sits below P."""
    target = P * (1.0 - FEASIBLE_MARGIN)
    E = float(x2 @ w)
    if E < target:
        return w
    j = int(np.argmin(x2))
    if x2[j] >= target:
        raise ValueError(f"no input in the window meets the power limit {P}")
    theta = (E - target) / (E - x2[j])
    w = (1.0 - theta) * w
    w[j] += theta
    return w


def _barrier_value(grid: _Grid, rows, w, sigma, mu) -> float:
    q = np.maximum(w @ rows, 1e-300)
    info = float(w @ (grid.c0 - grid.h_y * (rows @ np.log(q))))
    val = info + mu * float(np.sum(np.log(w)))
    if sigma is not None:
        val += mu * math.log(sigma)
    return val


def _center(grid: _Grid, rows, w, x2, sigma, mu):
    """Newton iterations on the barrier problem at fixed mu; returns (w, sigma, steps).

    The power slack sigma = P - E[X^2] is a variable of its own, tied to w
    by an equality row. Near the optimum it is of order mu / s, far below
    the rounding error of P - E[X^2] computed by subtraction, and the
    multiplier mu / sigma would be noise.
    """
    h = grid.h_y
    K = w.size
    powered = sigma is not None
    n = K + 1 if powered else K
    m = n + 2 if powered else n + 1
    for it in range(1, MAX_CENTERING_STEPS + 1):
        q = np.maximum(w @ rows, 1e-300)
        D = grid.c0 - h * (rows @ np.log(q))
        M = np.zeros((m, m))
        B = rows * np.sqrt(h / q)
        M[:K, :K] = -(B @ B.T)  # symmetric product runs as a rank-k update
        M[np.diag_indices(K)] -= mu / (w * w)
        M[:K, n] = M[n, :K] = 1.0
        g = np.zeros(m)
        g[:K] = D + mu / w
        if powered:
            M[K, K] = -mu / (sigma * sigma)
            M[:K, n + 1] = M[n + 1, :K] = x2
            M[K, n + 1] = M[n + 1, K] = 1.0
            g[K] = mu / sigma
        # symmetric diagonal scaling keeps tiny weights (huge mu/w^2) harmless
        d = 1.0 / np.sqrt(np.maximum(np.abs(np.diag(M)), 1.0))
        Ms = M * np.outer(d, d)
        try:
            step = d * np.linalg.solve(Ms, -g * d)
        except np.linalg.LinAlgError:
            step = d * np.linalg.lstsq(Ms, -g * d, rcond=None)[0]
        dz = step[:n]
        dec = float(g[:n] @ dz)  # Newton decrement squared
        if dec < CENTERED * mu:
            return w, sigma, it
        z = np.r_[w, sigma] if powered else w
        # largest step keeping the weights and the power slack positive
        t = 1.0
        neg = dz < 0.0
        if neg.any():
            t = min(t, 0.99 * float(np.min(-z[neg] / dz[neg])))
        f0 = _barrier_value(grid, rows, w, sigma, mu)
        if t * dec < ROUNDING * max(1.0, abs(f0)):
            # gains below rounding: the line search is blind, but this close
            # to the centre the Newton step converges quadratically
            trial = z + t * dz
        else:
            while t > 1e-12:
                trial = z + t * dz
                f1 = _barrier_value(grid, rows, trial[:K], trial[K] if powered else None, mu)
                if f1 >= f0 + 0.25 * t * dec:
                    break
                t *= 0.5
            else:
                return w, sigma, it  # no ascent left at working precision
        w = trial[:K] / trial[:K].sum()
        if powered:
            sigma = float(trial[K])
    return w, sigma, MAX_CENTERING_STEPS


def _best_multiplier(grid: _Grid, p: np.ndarray, P: Optional[float]) -> float:
    """s >= 0 minimizing the dual bound max_x [d(x) - s (x^2 - P)].

    The bound is convex and piecewise linear in s; its slope at s is minus
    the excess power of the maximizing input, so bisection on that sign
    finds the minimizer to rounding.
    """
    if P is None:
        return 0.0
    logq = np.log(np.maximum(grid.output_density(p), 1e-300))
    d = grid.divergence(logq)
    excess = grid.x * grid.x - P
    rising = lambda s: excess[int(np.argmax(d - s * excess))] > 0.0
    if not rising(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while rising(hi):
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-15 * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        lo, hi = (mid, hi) if rising(mid) else (lo, mid)
    bound = lambda s: float(np.max(d - s * excess))
    return lo if bound(lo) <= bound(hi) else hi


def _grid_bracket(grid: _Grid, p: np.ndarray, s: float, P: Optional[float]):
    """(upper, lower, density) of a grid law under multiplier s, in nats."""
    logq = np.log(np.maximum(grid.output_density(p), 1e-300))
    d = grid.divergence(logq)
    dens = d - s * (grid.x * grid.x - P) if P is not None else d
    return float(dens.max()), float(np.dot(p, d)), dens


def dtgc_capacity(problem: DtgcProblem, grid_points: int = 401, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER, verify_grid: bool = False,
                  refine: bool = True) -> DtgcSolution:
    """Capacity in bits per channel use with its optimizing input law.

    Blahut-Arimoto runs on the input grid. If its bracket has not closed
    after a warm-up, the weights on the support it points to are solved by
    an interior-point Newton method; new points are added wherever the
    information density exceeds the capacity, until the dual bound
    certifies the result to ``tol`` bits. Should that stall, Blahut-Arimoto
    is run to convergence instead.
    ``capacity_bits_per_use`` is the upper end of the final bracket. With
    ``verify_grid`` the solve is repeated on a grid twice as fine and
    GridTooCoarse is raised if the capacity moves by more than 10 tol.
    """
    if grid_points < MIN_GRID_POINTS:
        raise ValueError(f"need at least {MIN_GRID_POINTS} grid points, got {grid_points}")
    if not 0 < tol <= MAX_TOL:
        raise ValueError(f"tolerance must lie in (0, {MAX_TOL}], got {tol}")
    sol = _solve(problem, int(grid_points), tol, max_iter, refine)
    if verify_grid:
        fine = _solve(problem, 2 * int(grid_points) - 1, tol, max_iter, refine)
        shift = abs(fine.capacity_bits_per_use - sol.capacity_bits_per_use)
        if shift > 10 * tol:
            raise GridTooCoarse(f"doubling the grid moved capacity by {shift:.3g} bits")
    return sol


def _solve(problem: DtgcProblem, n: int, tol: float, max_iter: int, refine: bool) -> DtgcSolution:
    grid = _Grid(problem, n)
    P = problem.power_limit
    tol_nats = tol / LOG2E
    if refine:
        state = _blahut_arimoto(grid, P, tol_nats, min(WARM_ITER, max_iter), strict=False)
    else:
        state = _blahut_arimoto(grid, P, tol_nats, max_iter, strict=True)
    if state.upper - state.lower < tol_nats:
        return _solution(grid, state.p, state.s, state.lower, state.upper, state.dens,
                         state.iterations)
    try:
        p, s, lower, upper, dens, rounds = _interior(grid, state, P, tol_nats)
    except NotConverged as err:
        # last resort; slow, but its bracket always closes
        try:
            state = _blahut_arimoto(grid, P, tol_nats, max_iter, strict=True)
        except NotConverged as err2:
            raise NotConverged(f"{err}; {err2}") from None
        return _solution(grid, state.p, state.s, state.lower, state.upper, state.dens,
                         state.iterations)
    return _solution(grid, p, s, lower, upper, dens, state.iterations + rounds)


def _solution(grid: _Grid, p, s, lower, upper, dens, iterations) -> DtgcSolution:
    return DtgcSolution(
        capacity_bits_per_use=upper * LOG2E,
        mass_points=cluster_mass_points(grid.x, p),
        lagrange_power=float(s),
        kkt_residual=max(upper - lower, 0.0) * LOG2E,
        iterations=iterations,
        lower_bits=lower * LOG2E,
        grid=grid.x,
        probabilities=p,
        info_density=dens * LOG2E)


def default_grid_points(amp: float, noise_var: float = 1.0, per_sigma: int = 10) -> int:
    """Odd point count with spacing at most sigma/per_sigma on [-amp, amp]."""
    n = math.ceil(2.0 * amp * per_sigma / math.sqrt(noise_var)) + 1
    n = max(n, MIN_GRID_POINTS)
    return n + (1 - n % 2)


def blgc_upper_bound(W: float, snr: float, r: float, grid_points: Optional[int] = None,
                     tol: float = DEFAULT_TOL) -> float:
    """2W C_DTGC in bits per second, amplitude sqrt(r SNR), power SNR, unit noise."""
    return blgc_upper_solution(snr, r, grid_points, tol)[0] * 2.0 * W


def blgc_upper_solution(snr: float, r: float, grid_points: Optional[int] = None,
                        tol: float = DEFAULT_TOL):
    if not snr > 0:
        raise ValueError(f"SNR must be positive, got {snr}")
    if not r > 0:
        raise ValueError(f"PAPR must be positive, got {r}")
    amp = math.sqrt(r * snr)
    n = grid_points or default_grid_points(amp)
    sol = dtgc_capacity(DtgcProblem(-amp, amp, power_limit=snr, noise_var=1.0), n, tol)
    return sol.capacity_bits_per_use, sol


def upper_eta(rate_bps: float, W: float, snr: float) -> float:
    """Equivalent pre-SNR factor (2^(R/W) - 1) / SNR of a rate."""
    return math.expm1(rate_bps / W * math.log(2.0)) / snr


def gap_db(upper_rate_bps: float, W: float, snr: float, eta_lower: float) -> float:
    """Horizontal gap: extra SNR the lower bound needs to reach the upper rate, in dB."""
    snr_lower = math.expm1(upper_rate_bps / W * math.log(2.0)) / eta_lower
    return 10.0 * math.log10(snr_lower / snr)
