"""Convergence-rate fitting and theoretical bound evaluation.

The bound evaluators assemble the multiplicative error estimates for the
greedy interpolation and Chebyshev greedy loops from a power-law model of
the dictionary's entropy numbers, the recorded Lebesgue bounds, and the
norm-geometry constants of the ambient space.  All long products run in
log space; factorial-times-ball-volume factors are computed via log-gamma.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .function_space import as_exponent


class SpaceKind(enum.Enum):
    GENERAL_BANACH = "general_banach"
    SOBOLEV_P = "sobolev_p"
    HILBERT = "hilbert"


class RateKind(enum.Enum):
    EIM_ENTROPY = "eim_entropy"
    EIM_WIDTH = "eim_width"
    CGA_ENTROPY = "cga_entropy"


@dataclass(frozen=True)
class EntropyModel:
    """Power-law entropy model eps_n = A * n^(-r).

    With ``log_correction`` the index is reinterpreted through n -> ceil(n
    log n): eps at index N is evaluated at the t >= 1 solving t log t = N,
    matching rate statements given on the reindexed sequence.
    """

    amplitude: float = 1.0
    rate: float = 1.0
    log_correction: bool = False

    def __post_init__(self):
        if self.amplitude <= 0 or self.rate <= 0:
            raise ValueError("entropy model needs positive amplitude and rate")

    def epsilon(self, n):
        if n < 1:
            raise ValueError("entropy index must be >= 1")
        t = float(n)
        if self.log_correction:
            t = _invert_nlogn(float(n))
        return self.amplitude * t ** (-self.rate)


def _invert_nlogn(y):
    """Solve t * log(t) = y for t >= 1 by bisection."""
    lo, hi = 1.0, 2.0
    while hi * math.log(hi) < y:
        hi *= 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid * math.log(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BoundInputs:
    """Space constants and per-step series feeding the bound evaluators."""

    space_kind: SpaceKind
    lebesgue_series: tuple = ()
    alpha_series: tuple = ()
    s: float = 2.0
    C_X: float = 1.0
    l1_norm: float = 1.0
    p: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "lebesgue_series", tuple(self.lebesgue_series))
        object.__setattr__(self, "alpha_series", tuple(self.alpha_series))
        if not 1.0 < self.s <= 2.0:
            raise ValueError("smoothness power s must lie in (1, 2]")
        if self.C_X <= 0 or self.l1_norm <= 0:
            raise ValueError("C_X and l1_norm must be positive")
        if any(v <= 0 for v in self.lebesgue_series):
            raise ValueError("Lebesgue series entries must be positive")
        if any(not 0 < a <= 1 for a in self.alpha_series):
            raise ValueError("alpha series entries must lie in (0, 1]")


def fit_rate(ns, errors, window=None):
    """Least-squares slope of log(error) against log(n).

    ``window`` is an inclusive (n_lo, n_hi) range on the iteration numbers;
    by default the last two thirds of the data are used, skipping the
    preasymptotic head.  Returns ``(slope, intercept, r_squared)`` with the
    intercept in natural log units.
    """
    ns = np.asarray(ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if ns.shape != errors.shape or ns.ndim != 1:
        raise ValueError("ns and errors must be 1-d of equal length")
    if window is None:
        mask = np.arange(ns.size) >= ns.size // 3
    else:
        lo, hi = window
        mask = (ns >= lo) & (ns <= hi)
    if mask.sum() < 3:
        raise ValueError("fit window must contain at least 3 points")
    if np.any(errors[mask] <= 0):
        raise ValueError("errors must be positive on the fit window")
    x = np.log(ns[mask])
    y = np.log(errors[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), r_squared


def ball_volume_factor(n):
    """(n! V_n)^(1/n) with V_n the unit-ball volume of R^n.

    Evaluated through log-gamma to stay finite for large n; grows like
    sqrt(2 pi n / e).
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    log_val = (
        math.lgamma(n + 1) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1)
    ) / n
    return math.exp(log_val)


def delta_bound(n, space_kind, p=None):
    """Worst Banach-Mazur distortion of n-dimensional subspaces.

    sqrt(n) for a general Banach space, n^|1/2 - 1/p| for L_p/Sobolev
    spaces, and 1 in a Hilbert space.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if space_kind is SpaceKind.HILBERT:
        return 1.0
    if space_kind is SpaceKind.GENERAL_BANACH:
        return math.sqrt(n)
    if space_kind is SpaceKind.SOBOLEV_P:
        if p is None:
            raise ValueError("SOBOLEV_P needs the exponent p")
        inv_p = 0.0 if as_exponent(p).is_inf else 1.0 / as_exponent(p).p
        return float(n) ** abs(0.5 - inv_p)
    raise ValueError(f"unknown space kind {space_kind!r}")


def _gamma_series(inputs, upto):
    lam = inputs.lebesgue_series
    if len(lam) < upto:
        raise ValueError(
            f"lebesgue_series must cover steps 1..{upto} (got {len(lam)})"
        )
    if inputs.space_kind is SpaceKind.HILBERT:
        return [float(v) for v in lam[:upto]]
    return [1.0 + float(v) for v in lam[:upto]]


def eim_bound(n, inputs, model):
    """Error bound of the greedy interpolation at step n.

    gamma_{n-1} * (prod_{k<n} gamma_k)^{1/n} * delta_n * (n! V_n)^{1/n}
    * eps_n, with gamma_k = 1 + Lambda_k (Lambda_k alone in the Hilbert
    case) and gamma_0 = 1.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    gammas = _gamma_series(inputs, n - 1)
    lead = gammas[-1] if gammas else 1.0
    log_mean = sum(math.log(g) for g in gammas) / n
    return (
        lead
        * math.exp(log_mean)
        * delta_bound(n, inputs.space_kind, inputs.p)
        * ball_volume_factor(n)
        * model.epsilon(n)
    )


def cga_bound(n, inputs, model):
    """Error bound of the weak Chebyshev greedy loop at step n.

    2^(1+1/s) C_X^(1/s) (alpha_1...alpha_n)^(-1/n) delta_n n^(1/s-1)
    (n! V_n)^(1/n) ||f||_L1(K) eps_n.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    alphas = inputs.alpha_series
    if len(alphas) < n:
        raise ValueError(f"alpha_series must cover steps 1..{n} (got {len(alphas)})")
    inv_s = 1.0 / inputs.s
    log_alpha_mean = sum(math.log(a) for a in alphas[:n]) / n
    return (
        2.0 ** (1.0 + inv_s)
        * inputs.C_X**inv_s
        * math.exp(-log_alpha_mean)
        * delta_bound(n, inputs.space_kind, inputs.p)
        * float(n) ** (inv_s - 1.0)
        * ball_volume_factor(n)
        * inputs.l1_norm
        * model.epsilon(n)
    )


def predicted_order(m, d, p, kind):
    """Predicted power-law exponent of the error in n for sigma_m families.

    ``p`` must be >= 2 or inf (taken as the 1/p -> 0 limit); the estimates
    behind these exponents do not cover p < 2.
    """
    if m < 0 or d < 1:
        raise ValueError("need m >= 0 and d >= 1")
    p = as_exponent(p)
    inv_p = 0.0 if p.is_inf else 1.0 / p.p
    if not p.is_inf and p.p < 2.0:
        raise ValueError("predicted orders require p >= 2 or inf")
    if kind is RateKind.EIM_ENTROPY:
        return 0.5 - inv_p - (2 * m + 1) / (2.0 * d)
    if kind is RateKind.EIM_WIDTH:
        return 1.0 - (m + inv_p) / float(d)
    if kind is RateKind.CGA_ENTROPY:
        return -inv_p - 0.5
    raise ValueError(f"unknown rate kind {kind!r}")
