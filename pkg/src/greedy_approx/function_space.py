"""Discretized function-space kernel on [0, 1].

Functions live on a fixed sample grid with quadrature weights.  The module
provides L_p norms (1 < p <= inf), the dual pairing, norming (peak)
functionals for finite p, and best approximation from a finite-dimensional
subspace: weighted least squares at p = 2, damped IRLS for other finite p,
and a discrete minimax linear program at p = inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linprog

from .errors import ConvergenceFailure, DegenerateBasisError

#: Weakly-degenerate column threshold, relative to the largest column norm.
RANK_TOL = 1e-12

#: IRLS iteration cap for finite p != 2.
IRLS_MAX_ITER = 500

#: Floor applied to normalized IRLS weights.
IRLS_WEIGHT_FLOOR = 1e-12


class LpExponent:
    """Integrability exponent p in (1, inf), or inf for the sup norm.

    ``dual`` is the conjugate exponent p/(p-1) (finite p only);
    ``smoothness_power`` is min(p, 2), the power-type smoothness of L_p.
    """

    __slots__ = ("p",)

    def __init__(self, p):
        p = float(p)
        if not math.isinf(p) and not p > 1.0:
            raise ValueError(f"exponent must be > 1 or inf, got {p}")
        if math.isnan(p):
            raise ValueError("exponent must not be NaN")
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("LpExponent is immutable")

    @property
    def is_inf(self):
        return math.isinf(self.p)

    @property
    def dual(self):
        if self.is_inf:
            raise ValueError("dual exponent is undefined for p = inf")
        return self.p / (self.p - 1.0)

    @property
    def smoothness_power(self):
        if self.is_inf:
            raise ValueError("smoothness power is undefined for p = inf")
        return min(self.p, 2.0)

    def __repr__(self):
        return "LpExponent(inf)" if self.is_inf else f"LpExponent({self.p:g})"

    def __eq__(self, other):
        return isinstance(other, LpExponent) and self.p == other.p

    def __hash__(self):
        return hash(self.p)


#: The sup-norm exponent.
INF = LpExponent(math.inf)


def as_exponent(p):
    """Coerce a number, 'inf', or LpExponent into an LpExponent."""
    if isinstance(p, LpExponent):
        return p
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity"):
            return INF
        return LpExponent(float(p))
    return LpExponent(p)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Sample points on [0, 1] with quadrature weights.

    Points must be strictly increasing; weights are nonnegative and, for the
    uniform trapezoid grids built by :func:`make_uniform_grid`, sum to the
    domain length 1.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        wts = _frozen(self.weights)
        if pts.ndim != 1 or wts.ndim != 1 or pts.size != wts.size:
            raise ValueError("points and weights must be 1-d of equal length")
        if pts.size < 2:
            raise ValueError("grid needs at least 2 points")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("grid points must be strictly increasing")
        if np.any(wts < 0):
            raise ValueError("quadrature weights must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    def __len__(self):
        return self.points.size

    def same_as(self, other):
        return self is other or (
            np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True)
class GridFunction:
    """A function represented by its values at the grid points."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.ndim != 1 or vals.size != len(self.grid):
            raise ValueError("values length must match the grid")
        if not np.all(np.isfinite(vals)):
            raise ValueError("function values must be finite")
        object.__setattr__(self, "values", vals)


def make_uniform_grid(n_points):
    """Uniform grid x_i = (i-1)/(N-1) on [0, 1] with trapezoid weights."""
    n_points = int(n_points)
    if n_points < 2:
        raise ValueError("a uniform grid needs at least 2 points")
    points = np.linspace(0.0, 1.0, n_points)
    h = 1.0 / (n_points - 1)
    weights = np.full(n_points, h)
    weights[0] = weights[-1] = h / 2.0
    return Grid(points, weights)


def lp_norm(f, p):
    """Discrete L_p norm: quadrature sum for finite p, max |f| for p = inf."""
    p = as_exponent(p)
    if p.is_inf:
        return float(np.max(np.abs(f.values)))
    return float(np.sum(f.grid.weights * np.abs(f.values) ** p.p) ** (1.0 / p.p))


def dual_pair(F, g):
    """Quadrature pairing sum_i w_i F_i g_i of a functional density F with g."""
    if not F.grid.same_as(g.grid):
        raise ValueError("dual_pair requires both functions on the same grid")
    return float(np.sum(F.grid.weights * F.values * g.values))


def peak_functional(g, p):
    """Norming functional of g in L_p, as a grid density.

    Returns F with dual_pair(F, g) = ||g||_p and ||F||_{p'} = 1, realized as
    sign(g) |g|^(p-1) / ||g||_p^(p-1).  Finite p only; the sup-norm peak
    functional is non-unique and not provided.
    """
    p = as_exponent(p)
    if p.is_inf:
        raise ValueError("peak functional is only provided for finite p")
    norm = lp_norm(g, p)
    if norm == 0.0:
        raise ValueError("peak functional of the zero function is undefined")
    v = g.values
    density = np.sign(v) * (np.abs(v) / norm) ** (p.p - 1.0)
    return GridFunction(g.grid, density)


def _basis_matrix(basis, grid):
    if len(basis) == 0:
        return np.zeros((len(grid), 0))
    for b in basis:
        if not b.grid.same_as(grid):
            raise ValueError("all basis functions must share the target's grid")
    return np.column_stack([b.values for b in basis])


def _check_rank(B):
    """Reject numerically dependent columns via pivoted QR."""
    if B.shape[1] == 0:
        return
    col_norms = np.linalg.norm(B, axis=0)
    if np.any(col_norms == 0.0):
        raise DegenerateBasisError("basis contains a zero function")
    _, R, _ = scipy.linalg.qr(B, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size and diag.min() <= RANK_TOL * col_norms.max():
        raise DegenerateBasisError(
            f"basis is rank-deficient on the grid (pivot ratio {diag.min():.3e})"
        )


def _weighted_lstsq(B, fvals, weights):
    sw = np.sqrt(weights)
    c, *_ = np.linalg.lstsq(sw[:, None] * B, sw * fvals, rcond=None)
    return c


def _irls(B, f, p, tol, warm):
    """Damped IRLS for min ||f - B c||_p, finite p != 2.

    The reweighted least-squares displacement is scaled by 1/(p-1), which
    turns the sweep into a Newton step on the smooth objective and gives
    local quadratic convergence; step halving on objective increase guards
    the global phase.  Stops at first-order optimality (the residual's peak
    functional pairs to ~0 against every basis column) or raises
    ConvergenceFailure with the best iterate.
    """
    grid, w = f.grid, f.grid.weights
    fnorm = lp_norm(f, p)
    abs_tol = tol * fnorm
    basis_norms = np.array(
        [lp_norm(GridFunction(grid, B[:, j]), p) for j in range(B.shape[1])]
    )

    def objective(r):
        return float(np.sum(w * np.abs(r) ** p.p))

    def optimality(r):
        rnorm = lp_norm(GridFunction(grid, r), p)
        if rnorm <= abs_tol:
            return 0.0
        peak = np.sign(r) * (np.abs(r) / rnorm) ** (p.p - 1.0)
        g = (w * peak) @ B
        return float(np.max(np.abs(g) / basis_norms))

    newton = 1.0 / (p.p - 1.0)
    c = warm.copy()
    r = f.values - B @ c
    obj = objective(r)
    best_opt, best = optimality(r), (c, r)
    stalled = 0
    for _ in range(IRLS_MAX_ITER):
        if best_opt <= tol:
            return best
        u = np.maximum(np.abs(r), 1e-12) ** (p.p - 2.0)
        u /= u.max()
        u = np.maximum(u, IRLS_WEIGHT_FLOOR)
        c_ls = _weighted_lstsq(B, f.values, w * u)
        step = newton
        for _ in range(60):
            c_try = c + step * (c_ls - c)
            r_try = f.values - B @ c_try
            obj_try = objective(r_try)
            if obj_try <= obj * (1.0 + 1e-15):
                break
            step /= 2.0
        else:
            break  # no acceptable step length left
        c, r, obj = c_try, r_try, obj_try
        opt = optimality(r)
        if opt < best_opt:
            best_opt, best = opt, (c, r)
            stalled = 0
        else:
            stalled += 1
            if stalled >= 8:
                break  # optimality no longer improving
    if best_opt <= tol:
        return best
    c, r = best
    raise ConvergenceFailure(
        f"IRLS stopped at first-order residual {best_opt:.3e} "
        f"(tolerance {tol:g}, p={p.p:g})",
        coefficients=c,
        residual=GridFunction(grid, r),
    )


def _minimax(B, f, tol):
    """Discrete Chebyshev approximation as an LP: min t, |f - B c| <= t."""
    n = B.shape[1]
    m = B.shape[0]
    ones = np.ones((m, 1))
    A_ub = np.block([[B, -ones], [-B, -ones]])
    b_ub = np.concatenate([f.values, -f.values])
    cost = np.zeros(n + 1)
    cost[-1] = 1.0
    res = linprog(
        cost,
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=[(None, None)] * n + [(0, None)],
        method="highs",
    )
    if not res.success:
        # fall back to a high-exponent IRLS surrogate and report the failure
        try:
            c, r = _irls(B, f, LpExponent(128.0), max(tol, 1e-8), _weighted_lstsq(B, f.values, f.grid.weights))
        except ConvergenceFailure as fail:
            c = fail.coefficients
            r = f.values - B @ c
        raise ConvergenceFailure(
            f"minimax LP failed ({res.message}); best high-p surrogate attached",
            coefficients=c,
            residual=GridFunction(f.grid, r),
        )
    return res.x[:n]


def best_approximation(f, basis, p, tol=1e-10):
    """Best approximation of f from span(basis) in the discrete L_p norm.

    Returns ``(coefficients, residual)``.  p = 2 is exact weighted least
    squares; other finite p run damped IRLS warm-started from the p = 2
    solution; p = inf solves the discrete minimax linear program.  ``tol`` is
    relative to ||f||_p and controls the first-order optimality stop of the
    IRLS path.
    """
    p = as_exponent(p)
    if tol <= 0:
        raise ValueError("tol must be positive")
    grid = f.grid
    B = _basis_matrix(basis, grid)
    if B.shape[1] == 0:
        return np.zeros(0), GridFunction(grid, f.values.copy())
    _check_rank(B)

    c2 = _weighted_lstsq(B, f.values, grid.weights)
    if p.is_inf:
        r2 = f.values - B @ c2
        fscale = float(np.max(np.abs(f.values)))
        if np.max(np.abs(r2)) <= 1e-13 * max(fscale, 1e-300):
            c = c2  # already an exact fit; the LP cannot improve it
        else:
            c = _minimax(B, f, tol)
    elif p.p == 2.0:
        c = c2
    else:
        c, _ = _irls(B, f, p, tol, c2)
    residual = GridFunction(grid, f.values - B @ c)
    return c, residual
