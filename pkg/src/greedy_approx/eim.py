"""Greedy interpolation and reduced-basis selection.

``eim_fit`` runs the generalized empirical interpolation loop: pick the
worst-interpolated atom, pick the point functional where its residual peaks,
normalize, and extend the triangular collocation system.  ``weak_rbm_fit``
runs the weak reduced-basis greedy loop, selecting atoms by their distance
to the current span.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .function_space import (
    GridFunction,
    as_exponent,
    best_approximation,
    lp_norm,
)

#: |l_n(r_n)| below this multiple of ||r_n||_inf aborts the EIM loop: the
#: next collocation row would be numerically singular.
BREAKDOWN_TOL = 1e-14

#: Distances below this end a reduced-basis run with the span exhausted.
EXHAUSTION_TOL = 1e-14


@dataclass(frozen=True)
class TraceRecord:
    """One greedy iteration: selection, error level, optional Lebesgue bound."""

    n: int
    selected_index: int
    error: float
    lebesgue_upper: float | None
    seconds: float


@dataclass
class GreedyTrace:
    """Per-iteration history of a greedy run, plus termination flags."""

    records: list = field(default_factory=list)
    breakdown: bool = False
    exhausted: bool = False
    stagnated: bool = False

    def append(self, *args, **kwargs):
        self.records.append(TraceRecord(*args, **kwargs))

    def __len__(self):
        return len(self.records)

    @property
    def ns(self):
        return np.array([rec.n for rec in self.records], dtype=int)

    @property
    def errors(self):
        return np.array([rec.error for rec in self.records])

    @property
    def lebesgue(self):
        return np.array(
            [np.nan if rec.lebesgue_upper is None else rec.lebesgue_upper
             for rec in self.records]
        )


@dataclass(frozen=True)
class EimModel:
    """Fitted empirical interpolation operator.

    ``B`` is the lower-triangular collocation matrix l_i(g_j) with an exact
    unit diagonal; ``g_values``/``h_values`` hold the nodal and cardinal
    bases row-wise.  The cardinal basis satisfies l_i(h_j) = delta_ij, so the
    interpolant of f is sum_i l_i(f) h_i.
    """

    grid: object
    functional_set: object
    snapshot_indices: tuple
    functional_indices: tuple
    g_values: np.ndarray
    B: np.ndarray
    h_values: np.ndarray

    @property
    def size(self):
        return len(self.snapshot_indices)

    @property
    def point_indices(self):
        """Grid indices of the selected interpolation points."""
        return self.functional_set.indices[list(self.functional_indices)]

    @property
    def g_basis(self):
        return [GridFunction(self.grid, row) for row in self.g_values]

    @property
    def h_basis(self):
        return [GridFunction(self.grid, row) for row in self.h_values]


def _atom_norms(R, weights, p):
    if p.is_inf:
        return np.max(np.abs(R), axis=1)
    return (np.abs(R) ** p.p @ weights) ** (1.0 / p.p)


def _cardinal_rows(B, g_rows):
    # (h_1..h_n) = (g_1..g_n) B^{-1}, i.e. rows H = B^{-T} G
    return scipy.linalg.solve_triangular(B.T, g_rows, lower=False)


def eim_fit(K, L, norm_p, N, stop_tol=0.0):
    """Run N iterations of the generalized empirical interpolation loop.

    Returns ``(EimModel, GreedyTrace)``.  Each trace record holds the sup of
    the interpolation error over the dictionary before the step's snapshot
    was added, and the Lebesgue upper bound of the extended model.  Stops
    early when the sup error drops to ``stop_tol`` or on numerical breakdown
    of the collocation system (flagged on the trace).
    """
    norm_p = as_exponent(norm_p)
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > min(len(K), len(L)):
        raise ValueError("N cannot exceed the dictionary or functional count")
    if stop_tol < 0:
        raise ValueError("stop_tol must be >= 0")

    A = K.values
    weights = K.grid.weights
    candidate_points = L.indices

    sel_atoms, sel_funcs, sel_points = [], [], []
    g_rows = np.zeros((0, A.shape[1]))
    B = np.zeros((0, 0))
    trace = GreedyTrace()

    for n in range(1, N + 1):
        t0 = time.perf_counter()
        if sel_points:
            ell_vals = A[:, sel_points]
            coeffs = scipy.linalg.solve_triangular(B, ell_vals.T, lower=True)
            residuals = A - coeffs.T @ g_rows
        else:
            residuals = A
        errs = _atom_norms(residuals, weights, norm_p)
        sigma = float(errs.max())
        atom_idx = int(errs.argmax())
        if sigma <= stop_tol:
            break

        r = residuals[atom_idx]
        cand_vals = r[candidate_points].copy()
        cand_vals[sel_funcs] = 0.0  # guard re-selection against roundoff
        func_idx = int(np.abs(cand_vals).argmax())
        ell_r = float(cand_vals[func_idx])
        if abs(ell_r) <= BREAKDOWN_TOL * np.max(np.abs(r)):
            trace.breakdown = True
            break

        g = r / ell_r
        m = len(sel_atoms)
        B_new = np.zeros((m + 1, m + 1))
        B_new[:m, :m] = B
        B_new[m, :m] = g_rows[:, candidate_points[func_idx]]
        B_new[m, m] = 1.0  # l_n(g_n) = 1 by the normalization
        B = B_new
        g_rows = np.vstack([g_rows, g])
        sel_atoms.append(atom_idx)
        sel_funcs.append(func_idx)
        sel_points.append(int(candidate_points[func_idx]))

        h_rows = _cardinal_rows(B, g_rows)
        lebesgue = float(np.sum(np.abs(h_rows), axis=0).max())
        trace.append(n, atom_idx, sigma, lebesgue, time.perf_counter() - t0)

    h_rows = _cardinal_rows(B, g_rows) if sel_atoms else np.zeros((0, A.shape[1]))
    model = EimModel(
        grid=K.grid,
        functional_set=L,
        snapshot_indices=tuple(sel_atoms),
        functional_indices=tuple(sel_funcs),
        g_values=g_rows,
        B=B,
        h_values=h_rows,
    )
    return model, trace


def eim_sup_error(model, K, norm_p, n=None):
    """Worst interpolation error of the (size-n) model over a dictionary.

    Useful as an honesty check against a denser held-out dictionary than the
    one the model was fitted on.
    """
    norm_p = as_exponent(norm_p)
    if n is None:
        n = model.size
    if not 1 <= n <= model.size:
        raise ValueError(f"submodel size {n} out of range 1..{model.size}")
    ell_vals = K.values[:, model.point_indices[:n]]
    coeffs = scipy.linalg.solve_triangular(model.B[:n, :n], ell_vals.T, lower=True)
    residuals = K.values - coeffs.T @ model.g_values[:n]
    return float(_atom_norms(residuals, K.grid.weights, norm_p).max())


def eim_interpolate(model, f, n=None):
    """Interpolate f with the size-n submodel (defaults to the full model).

    Solves the triangular collocation system for the coefficients in the
    nodal basis; equals sum_i l_i(f) h_i by construction.
    """
    if n is None:
        n = model.size
    if not 1 <= n <= model.size:
        raise ValueError(f"submodel size {n} out of range 1..{model.size}")
    ell = f.values[model.point_indices[:n]]
    c = scipy.linalg.solve_triangular(model.B[:n, :n], ell, lower=True)
    return GridFunction(model.grid, c @ model.g_values[:n])


def lebesgue_upper(model, n=None):
    """Upper bound of the interpolation operator norm at submodel size n.

    Computed as the grid maximum of sum_i |h_i(x)| over the size-n cardinal
    basis; it is >= 1 because the cardinal functions hit 1 at their own
    interpolation points.
    """
    if n is None:
        n = model.size
    if not 1 <= n <= model.size:
        raise ValueError(f"submodel size {n} out of range 1..{model.size}")
    h_rows = _cardinal_rows(model.B[:n, :n], model.g_values[:n])
    return float(np.sum(np.abs(h_rows), axis=0).max())


def weak_rbm_fit(K, norm_p, alpha, N, proj_tol=1e-10):
    """Weak reduced-basis greedy selection over the dictionary.

    At each step every atom's distance to the current span is computed by
    best approximation; with ``alpha = 1`` the worst atom is selected, with
    ``alpha < 1`` the lowest-index atom within ``alpha`` of the worst.  The
    recorded errors are the sup distances, which are non-increasing.
    """
    norm_p = as_exponent(norm_p)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > len(K):
        raise ValueError("N cannot exceed the dictionary size")

    weights = K.grid.weights
    basis = []
    trace = GreedyTrace()
    for n in range(1, N + 1):
        t0 = time.perf_counter()
        if not basis:
            dists = _atom_norms(K.values, weights, norm_p)
        elif not norm_p.is_inf and norm_p.p == 2.0:
            # one weighted least-squares solve with all atoms as right sides
            Bmat = np.column_stack([b.values for b in basis])
            sw = np.sqrt(weights)
            C, *_ = np.linalg.lstsq(sw[:, None] * Bmat, sw[:, None] * K.values.T, rcond=None)
            R = K.values - (Bmat @ C).T
            dists = _atom_norms(R, weights, norm_p)
        else:
            dists = np.array(
                [
                    lp_norm(best_approximation(K.atom(i), basis, norm_p, proj_tol)[1], norm_p)
                    for i in range(len(K))
                ]
            )
        sigma = float(dists.max())
        if sigma < EXHAUSTION_TOL:
            trace.exhausted = True
            break
        if alpha == 1.0:
            idx = int(dists.argmax())
        else:
            idx = int(np.argmax(dists >= alpha * sigma))
        basis.append(K.atom(idx))
        trace.append(n, idx, sigma, None, time.perf_counter() - t0)
    return trace
