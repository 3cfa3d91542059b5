"""Capacity bounds for bandlimited Gaussian and optical intensity channels under a PAPR limit."""
from .blgc import (BlgcBound, BlgcRegime, PaprConstraint, awgn_rate, blgc_lower_rate, eta_blgc,
                   pp_blgc_eta, solve_lambda)
from .bloic import BloicBound, BloicRegime, bloic_lower_rate, eta_bloic, solve_mu
from .dtgc import (DtgcProblem, DtgcSolution, blgc_upper_bound, blgc_upper_solution,
                   dtgc_capacity, gap_db, upper_eta)
from .errors import *  # noqa: F401,F403
from .metrics import PulseMetrics, compute_metrics, metrics_for
from .optimize import (Channel, EnvelopePoint, envelope, optimize_beta, peak_eta,
                       pp_optimize_beta)
from .pulses import Family, Normalization, PulseSpec, eval_freq, eval_time, normalize

__version__ = "0.1.0"
