"""Greedy approximation in discretized L_p spaces on [0, 1].

Four greedy loops over ridge-function dictionaries: empirical interpolation
and weak reduced-basis selection for whole families, orthogonal and weak
Chebyshev greedy approximation for single targets, plus rate fitting and
theoretical bound evaluators for side-by-side convergence studies.
"""

from .dictionary import (
    DiscreteDictionary,
    FunctionalSet,
    ReluFamilySpec,
    apply_functional,
    build_point_functionals,
    build_relu_dictionary,
    relu_atom,
)
from .diagnostics import (
    BoundInputs,
    EntropyModel,
    RateKind,
    SpaceKind,
    ball_volume_factor,
    cga_bound,
    delta_bound,
    eim_bound,
    fit_rate,
    predicted_order,
)
from .eim import (
    EimModel,
    GreedyTrace,
    TraceRecord,
    eim_fit,
    eim_interpolate,
    eim_sup_error,
    lebesgue_upper,
    weak_rbm_fit,
)
from .errors import ConvergenceFailure, DegenerateBasisError, EmptyDictionaryError
from .function_space import (
    INF,
    Grid,
    GridFunction,
    LpExponent,
    as_exponent,
    best_approximation,
    dual_pair,
    lp_norm,
    make_uniform_grid,
    peak_functional,
)
from .sparse_greedy import CgaConfig, SparseApproximant, cga_run, oga_run

__all__ = [
    "BoundInputs",
    "CgaConfig",
    "ConvergenceFailure",
    "DegenerateBasisError",
    "DiscreteDictionary",
    "EimModel",
    "EmptyDictionaryError",
    "EntropyModel",
    "FunctionalSet",
    "GreedyTrace",
    "Grid",
    "GridFunction",
    "INF",
    "LpExponent",
    "RateKind",
    "ReluFamilySpec",
    "SparseApproximant",
    "SpaceKind",
    "TraceRecord",
    "apply_functional",
    "as_exponent",
    "ball_volume_factor",
    "best_approximation",
    "build_point_functionals",
    "build_relu_dictionary",
    "cga_bound",
    "cga_run",
    "delta_bound",
    "dual_pair",
    "eim_bound",
    "eim_fit",
    "eim_interpolate",
    "eim_sup_error",
    "fit_rate",
    "lebesgue_upper",
    "lp_norm",
    "make_uniform_grid",
    "oga_run",
    "peak_functional",
    "predicted_order",
    "relu_atom",
    "weak_rbm_fit",
]

__version__ = "0.1.0"
