import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from paprcap.errors import InvalidPulse, UnsupportedFamily
from paprcap.pulses import (PARAMETRIC, Family, Normalization, PulseSpec, eval_freq, eval_time,
                            icit_time_samples, normalize, spectral_breakpoints)

CLOSED = [Family.SINC, Family.S2, Family.SC, Family.RC, Family.PL, Family.BTN]
betas = st.integers(1, 100).map(lambda k: k / 100)


def cases(families, rolloffs):
    """(family, beta) pairs; fixed pulses appear once."""
    return [(f, b) for f in families for b in (rolloffs if f in PARAMETRIC else [None])]


def make_pulse(family, beta=0.5, norm=Normalization.ENERGY):
    return PulseSpec(family, beta if family in PARAMETRIC else None, norm)


def pulses(families=tuple(Family), norms=tuple(Normalization)):
    return st.builds(make_pulse, st.sampled_from(families), betas, st.sampled_from(norms))


# ---------------------------------------------------------------- construction

def test_rolloff_presence_rules():
    assert PulseSpec(Family.S2).rolloff is None
    for fam in (Family.S2, Family.SC, Family.SINC):
        with pytest.raises(InvalidPulse):
            PulseSpec(fam, 0.5)
    for fam in PARAMETRIC:
        with pytest.raises(InvalidPulse):
            PulseSpec(fam)
        with pytest.raises(InvalidPulse):
            PulseSpec(fam, 0.0)
        with pytest.raises(InvalidPulse):
            PulseSpec(fam, 1.5)


def test_family_parse_rejects_unknown():
    assert Family.parse("btn") is Family.BTN
    with pytest.raises(InvalidPulse):
        Family.parse("gauss")


# ---------------------------------------------------------------- point values

def test_sinc_peak_and_flat_spectrum():
    p = make_pulse(Family.SINC)
    assert eval_time(p, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert eval_freq(p, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert normalize(p) == pytest.approx(1.0, abs=1e-12)


def test_s2_peak_and_band_edge():
    p = make_pulse(Family.S2)
    assert eval_time(p, 0.0) == pytest.approx(math.sqrt(3) / 2, rel=1e-10)
    assert eval_freq(p, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert eval_freq(p, -0.5) == pytest.approx(0.0, abs=1e-15)


def test_rc_removable_singularity_matches_extrapolation():
    p = make_pulse(Family.RC, 0.5)
    t0 = (1 + 0.5) / (4 * 0.5 * 0.5)
    h = 1e-3
    # quadratic through t0 - 2h, t0 - h and t0 + h, t0 + 2h, evaluated at t0
    left = 3 * eval_time(p, t0 - h) - 3 * eval_time(p, t0 - 2 * h) + eval_time(p, t0 - 3 * h)
    right = 3 * eval_time(p, t0 + h) - 3 * eval_time(p, t0 + 2 * h) + eval_time(p, t0 + 3 * h)
    val = eval_time(p, t0)
    assert math.isfinite(val)
    assert val == pytest.approx(left, abs=1e-7)
    assert val == pytest.approx(right, abs=1e-7)


@pytest.mark.parametrize("beta", [0.1, 0.5, 1.0])
def test_btn_value_at_zero_is_continuous(beta):
    p = make_pulse(Family.BTN, beta)
    assert eval_time(p, 0.0) == pytest.approx(eval_time(p, 1e-6), rel=1e-9)


def test_icit_has_no_closed_time_form():
    with pytest.raises(UnsupportedFamily):
        eval_time(make_pulse(Family.ICIT), 0.0)


def _acos_atan(u):
    return math.acos(min(1.0, math.atan(math.tan(1.0) * u)))


def _icit_pieces(beta, W=0.5):
    """Independent transcription of the ICIT spectrum.

    Pieces are written in the inner argument u = k * distance, so that the
    breakpoints can be hit exactly (u = 1 and u = 1/2).
    """
    gamma = _acos_atan(0.5)
    k = (1 + beta) / (2 * beta * W)
    f1 = (1 - beta) / (1 + beta) * W
    mid = lambda u: (1 - _acos_atan(u) / (2 * gamma)) / (2 * W)   # u = k (W - |f|)
    top = lambda u: _acos_atan(u) / (4 * gamma * W)               # u = k (|f| - f1)
    return f1, W / (1 + beta), k, mid, top


def test_icit_spectrum_continuous_at_breakpoints():
    _, _, _, mid, top = _icit_pieces(0.5)
    assert mid(1.0) == pytest.approx(1.0, abs=1e-12)        # meets the flat part
    assert mid(0.5) == pytest.approx(top(0.5), abs=1e-12)   # middle meets top at W/(1+beta)
    assert top(1.0) == pytest.approx(0.0, abs=1e-12)        # reaches zero at the band edge


@pytest.mark.parametrize("beta", [0.1, 0.5, 1.0])
def test_icit_spectrum_matches_definition(beta):
    p = make_pulse(Family.ICIT, beta, Normalization.AREA)
    f1, f2, k, mid, top = _icit_pieces(beta)
    for f in np.linspace(0.0, 0.5, 301):
        want = 1.0 if f <= f1 else mid(k * (0.5 - f)) if f <= f2 else top(k * (f - f1))
        # AREA normalization makes ghat(0) = 1/(2W) = 1, the raw value; the
        # transcription loses ~sqrt(eps) next to the arccos cusps
        assert eval_freq(p, f) == pytest.approx(want, abs=1e-7)


@pytest.mark.parametrize("beta", [0.1, 0.5, 1.0])
def test_icit_spectrum_has_no_jump(beta):
    p = make_pulse(Family.ICIT, beta)
    for f0 in spectral_breakpoints(p):
        for d in (1e-6, 1e-9, 1e-12):
            # square-root cusp: the one-sided gap shrinks like sqrt(d)
            assert abs(eval_freq(p, f0 - d) - eval_freq(p, f0 + d)) < 10 * math.sqrt(d)


# ---------------------------------------------------------------- properties

@given(pulses(), st.floats(0.5, 50.0))
def test_band_limited(p, f):
    assert eval_freq(p, f) == 0.0 or abs(f) <= 0.5
    assert eval_freq(p, 0.5 + f) == 0.0


@given(pulses(), st.floats(-0.5, 0.5))
def test_spectrum_even(p, f):
    assert eval_freq(p, f) == pytest.approx(eval_freq(p, -f), rel=1e-12, abs=1e-15)


@given(pulses(CLOSED), st.floats(0.0, 200.0))
def test_time_even(p, t):
    assert eval_time(p, t) == pytest.approx(eval_time(p, -t), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("family,beta", cases([f for f in CLOSED if f is not Family.SINC],
                                               [0.01, 0.3, 1.0]))
def test_decay_at_least_inverse_square(family, beta):
    p = make_pulse(family, beta)
    # sinc-like behaviour persists out to t ~ 1/beta before the fast tail takes over
    t0 = max(10.0, 10.0 / (beta or 1.0))
    t = np.geomspace(t0, 100 * t0, 2000) + 0.37
    bound = np.abs(eval_time(p, t)) * t * t
    assert np.all(np.isfinite(bound))
    # a 1/t tail would make the last decade ~10x the first
    early, late = bound[t < 10 * t0].max(), bound[t >= 10 * t0].max()
    assert late <= 1.5 * early


@pytest.mark.parametrize("family,beta", [(Family.S2, None), (Family.SC, None), (Family.RC, 0.35),
                                         (Family.PL, 0.6), (Family.BTN, 0.2), (Family.BTN, 0.9)])
def test_fourier_consistency(family, beta):
    """Spectrum from time samples: for a band inside [-1/2, 1/2] the DTFT of g(n) is ghat(f)."""
    p = PulseSpec(family, beta)
    n = np.arange(-2_000_000, 2_000_001, dtype=float)
    g = eval_time(p, n)
    rng = np.random.default_rng(11)
    for f in rng.uniform(-0.5, 0.5, 20):
        dtft = float(np.dot(g, np.cos(2 * math.pi * f * n)))
        assert dtft == pytest.approx(eval_freq(p, f), abs=1e-6)


def test_fourier_consistency_quadrature_rc():
    """Direct cosine transform for a fast-decaying pulse."""
    p = PulseSpec(Family.RC, 0.5)
    for f in (0.05, 0.2, 0.3, 0.45):
        val, _ = integrate.quad(lambda t: eval_time(p, t), 0.0, np.inf, weight="cos",
                                wvar=2 * math.pi * f, limlst=200)
        assert 2.0 * val == pytest.approx(eval_freq(p, f), abs=1e-6)


def _shifted_sum(p, fn, n=400_000):
    """sum_n fn(g(n + 1/2)); for band [-1/2, 1/2] this is the time integral (Poisson)."""
    t = np.arange(-n, n, dtype=float) + 0.5
    return float(fn(eval_time(p, t)).sum())


@pytest.mark.parametrize("family,beta", cases(CLOSED, [0.01, 0.25, 0.5, 0.75, 1.0]))
def test_energy_normalization(family, beta):
    p = make_pulse(family, beta)
    if family is Family.SINC:
        # 1/t^2 energy tail summed analytically
        assert _shifted_sum(p, np.square) + 2 / (math.pi ** 2 * 400_000) == pytest.approx(1.0, rel=1e-8)
        return
    assert _shifted_sum(p, np.square) == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("family,beta", cases([f for f in CLOSED if f is not Family.SINC],
                                               [0.05, 0.5, 1.0]))
def test_area_normalization(family, beta):
    p = make_pulse(family, beta, Normalization.AREA)
    n = 400_000
    t = np.arange(-n, n, dtype=float) + 0.5
    g = eval_time(p, t)
    # tails beyond n decay like c/t^2; fit c on the last decade and add it
    far = np.abs(t) > n / 10
    c = np.mean(g[far] * t[far] ** 2)
    area = g.sum() + 2 * c / n
    assert area == pytest.approx(1.0, rel=1e-8)


def test_normalization_on_full_beta_grid():
    for family in (Family.RC, Family.PL, Family.BTN):
        for k in range(1, 101):
            p = make_pulse(family, k / 100)
            assert _shifted_sum(p, np.square, 20_000) == pytest.approx(1.0, rel=1e-8), p.label()


def test_normalize_is_idempotent():
    p = make_pulse(Family.BTN, 0.3)
    assert normalize(p) == normalize(PulseSpec(Family.BTN, 0.3))
    a = eval_time(p, 0.2)
    assert eval_time(p, 0.2) == a


# ---------------------------------------------------------------- ICIT synthesis

@pytest.mark.parametrize("beta", [0.25, 0.5])
def test_icit_samples_area_and_peak(beta):
    p = make_pulse(Family.ICIT, beta, Normalization.AREA)
    s = icit_time_samples(p, t_max=2048.0, dt=1 / 8)
    assert s.error < 1e-6 * s.g.max()
    # the t^-1.5 tails oscillate when no cusp sits at f = 0, so truncation is mild
    assert float(s.g.sum() * (1 / 8)) == pytest.approx(1.0, abs=1e-5)
    g0 = s.g[np.argmin(np.abs(s.t))]
    spec_int, _ = integrate.quad(lambda f: eval_freq(p, f), -0.5, 0.5,
                                 points=spectral_breakpoints(p), limit=200)
    assert g0 > 0
    assert g0 == pytest.approx(spec_int, abs=1e-6)
    # the spectrum is odd-symmetric about W/(1+beta), so g vanishes at multiples of 1+beta
    period = 1.0 + beta
    k = np.isclose(np.mod(s.t + 1e-9, period), 1e-9, atol=1e-6) & (np.abs(s.t) >= 1)
    assert k.sum() > 100
    assert np.max(np.abs(s.g[k])) < 1e-6 * g0


def test_icit_full_rolloff_tail_matches_cusp_asymptotics():
    """beta = 1 puts a square-root cusp at f = 0, so g(t) ~ c |t|^-1.5 without sign changes.

    From ghat(f) ~ 1 - a sqrt(|f|) with a = sqrt(2 sin 2) / (2 gamma), the
    transform of -a sqrt(|f|) is a / (4 pi) |t|^-1.5.
    """
    p = make_pulse(Family.ICIT, 1.0, Normalization.AREA)
    T = 2048.0
    s = icit_time_samples(p, t_max=T, dt=1 / 8)
    gamma = math.acos(math.atan(math.tan(1.0) / 2))
    c = math.sqrt(2 * math.sin(2.0)) / (2 * gamma) / (4 * math.pi)
    far = np.abs(s.t) > T / 4
    fitted = np.polyfit(np.abs(s.t[far]) ** -1.5, s.g[far], 1)[0]
    assert fitted == pytest.approx(c, rel=0.02)
    area = float(s.g.sum() / 8) + 4 * c / math.sqrt(T)
    assert area == pytest.approx(1.0, abs=2e-4)


def test_icit_samples_reject_coarse_sampling():
    p = make_pulse(Family.ICIT, 0.5, Normalization.AREA)
    with pytest.raises(ValueError):
        icit_time_samples(p, t_max=256.0, dt=0.5)
    with pytest.raises(ValueError):
        icit_time_samples(p, t_max=10.0, dt=1 / 8)
