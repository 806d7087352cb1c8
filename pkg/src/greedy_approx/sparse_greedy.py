"""Sparse n-term approximation of a single target from a dictionary.

``cga_run`` selects atoms by pairing them against the residual's norming
functional and re-projects by best approximation in L_p (finite p > 1).
``oga_run`` is the Hilbert-space specialization: inner-product selection
with an incrementally updated orthogonal factorization of the selected
atoms.  With p = 2 and unit weakness parameters the two coincide.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure
from .eim import GreedyTrace
from .function_space import (
    GridFunction,
    as_exponent,
    best_approximation,
    dual_pair,
    lp_norm,
    peak_functional,
)

#: Normalized selection scores below this stop a run as stagnated.
STAGNATION_TOL = 1e-14

#: Scores within this relative band of the maximum count as tied and the
#: lowest index wins.  Mirror-image atoms tie exactly in exact arithmetic
#: once the span contains the affine functions (their difference); observed
#: rounding noise on such ties stays below 1e-9 while genuinely distinct
#: maxima differ by 1e-3 or more, so the band only ever resolves true ties.
TIE_BAND = 1e-8


@dataclass(frozen=True)
class CgaConfig:
    """Settings for a weak Chebyshev greedy run.

    ``alpha`` is either a constant weakness parameter in (0, 1] or one value
    per step; ``proj_tol`` is handed to the best-approximation solver and
    ``select_tol`` stops the run once the residual norm falls below
    ``select_tol * ||f||``.
    """

    p: object
    alpha: object = 1.0
    max_steps: int = 100
    proj_tol: float = 1e-10
    select_tol: float = 1e-12

    def __post_init__(self):
        p = as_exponent(self.p)
        if p.is_inf:
            raise ValueError("the greedy selection functional needs finite p")
        object.__setattr__(self, "p", p)
        alphas = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if np.any(alphas <= 0) or np.any(alphas > 1):
            raise ValueError("weakness parameters must lie in (0, 1]")
        if alphas.size > 1 and alphas.size < self.max_steps:
            raise ValueError("per-step alpha sequence shorter than max_steps")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        object.__setattr__(self, "alpha", tuple(alphas))

    def alpha_at(self, n):
        return self.alpha[0] if len(self.alpha) == 1 else self.alpha[n - 1]


@dataclass(frozen=True)
class SparseApproximant:
    """Selected atoms, final expansion coefficients, residual-norm history."""

    atom_indices: tuple
    coefficients: np.ndarray
    residual_norms: np.ndarray


def _select(scores, alpha):
    sup = float(scores.max())
    if alpha == 1.0:
        return int(np.argmax(scores >= sup * (1.0 - TIE_BAND))), sup
    return int(np.argmax(scores >= alpha * sup)), sup


def cga_run(f, K, cfg):
    """Weak Chebyshev greedy approximation of f from the dictionary.

    Returns ``(SparseApproximant, GreedyTrace)``; residual norms are
    non-increasing because each step re-projects f onto the enlarged span.
    Stagnation (annihilated dictionary or a duplicate selection) stops the
    run with the trace flagged; a projection-solver failure propagates with
    the partial results attached to the exception.
    """
    p = cfg.p
    fnorm = lp_norm(f, p)
    if fnorm == 0.0:
        raise ValueError("target function must be nonzero")
    weights = f.grid.weights

    selected, basis = [], []
    coeffs = np.zeros(0)
    residual = f
    norms = [fnorm]
    trace = GreedyTrace()
    for n in range(1, cfg.max_steps + 1):
        t0 = time.perf_counter()
        rnorm = norms[-1]
        if rnorm <= cfg.select_tol * fnorm:
            break
        F = peak_functional(residual, p)
        scores = np.abs(K.values @ (weights * F.values))
        idx, sup = _select(scores, cfg.alpha_at(n))
        if sup <= STAGNATION_TOL:
            trace.stagnated = True
            break
        if idx in selected:
            trace.stagnated = True
            break
        basis.append(K.atom(idx))
        try:
            coeffs_new, residual_new = best_approximation(f, basis, p, cfg.proj_tol)
        except ConvergenceFailure as fail:
            fail.partial = (
                SparseApproximant(tuple(selected), coeffs, np.array(norms)),
                trace,
            )
            raise
        selected.append(idx)
        coeffs, residual = coeffs_new, residual_new
        norms.append(lp_norm(residual, p))
        trace.append(n, idx, norms[-1], None, time.perf_counter() - t0)
    return SparseApproximant(tuple(selected), coeffs, np.array(norms)), trace


class _OrthoFactor:
    """Weighted QR of the selected atoms, grown one column at a time.

    ``R`` is the Cholesky factor of the running Gram matrix; a vanishing new
    diagonal entry signals a numerically dependent atom.
    """

    def __init__(self, weights, n_points):
        self.w = weights
        self.Q = np.zeros((n_points, 0))
        self.R = np.zeros((0, 0))

    def try_add(self, v, dep_tol=1e-14):
        nrm = np.sqrt(float(self.w @ (v * v)))
        q, r_col = v.copy(), np.zeros(self.R.shape[0])
        for _ in range(2):  # modified Gram-Schmidt with one reorthogonalization
            proj = self.Q.T @ (self.w * q)
            q = q - self.Q @ proj
            r_col += proj
        d = np.sqrt(float(self.w @ (q * q)))
        if d <= dep_tol * max(nrm, 1e-300):
            return False
        m = self.R.shape[0]
        R_new = np.zeros((m + 1, m + 1))
        R_new[:m, :m] = self.R
        R_new[:m, m] = r_col
        R_new[m, m] = d
        self.R = R_new
        self.Q = np.column_stack([self.Q, q / d])
        return True

    def project(self, fvals):
        # coefficients in the raw atom basis solve R c = Q' W f
        y = self.Q.T @ (self.w * fvals)
        return scipy.linalg.solve_triangular(self.R, y, lower=False)


def oga_run(f, K, max_steps, tol=1e-12):
    """Orthogonal greedy approximation of f in the weighted L_2 inner product.

    Returns ``(SparseApproximant, GreedyTrace)``.  Selection maximizes
    |<g, r>|; the projection reuses an incrementally extended orthogonal
    factorization of the selected atoms.  Stops on residual norm below
    ``tol * ||f||``, on stagnation, or when the factorization detects a
    dependent atom.
    """
    weights = f.grid.weights
    fnorm = np.sqrt(float(weights @ (f.values * f.values)))
    if fnorm == 0.0:
        raise ValueError("target function must be nonzero")

    selected = []
    coeffs = np.zeros(0)
    factor = _OrthoFactor(weights, len(f.grid))
    norms = [fnorm]
    trace = GreedyTrace()
    for n in range(1, int(max_steps) + 1):
        t0 = time.perf_counter()
        rnorm = norms[-1]
        if rnorm <= tol * fnorm:
            break
        rvals = f.values - (K.values[selected].T @ coeffs if selected else 0.0)
        scores = np.abs(K.values @ (weights * rvals))
        if scores.max() / rnorm <= STAGNATION_TOL:
            trace.stagnated = True
            break
        idx, _ = _select(scores, 1.0)
        if idx in selected:
            trace.stagnated = True
            break
        if not factor.try_add(K.values[idx]):
            trace.stagnated = True
            break
        selected.append(idx)
        coeffs = factor.project(f.values)
        rvals = f.values - K.values[selected].T @ coeffs
        norms.append(np.sqrt(float(weights @ (rvals * rvals))))
        trace.append(n, idx, norms[-1], None, time.perf_counter() - t0)
    return SparseApproximant(tuple(selected), coeffs, np.array(norms)), trace
