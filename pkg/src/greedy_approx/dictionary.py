"""Ridge-function dictionaries and point-evaluation functional sets.

Atoms are truncated power functions sigma_m(w*x + b) with sigma_m(t) =
max(t, 0)^m for m >= 1 and the Heaviside step (1 for t > 0, else 0) for
m = 0.  In one dimension the unit directions degenerate to w = +/-1; biases
run over a uniform grid of a compact range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDictionaryError
from .function_space import Grid, GridFunction

#: Atom parameters as stored in DiscreteDictionary.labels.
AtomLabel = tuple  # (m, w, b)


@dataclass(frozen=True)
class ReluFamilySpec:
    """Parameter box for a sigma_m ridge family on [0, 1].

    ``w_values`` are the 1-d unit directions (+1/-1); biases form a uniform
    grid of ``b_count`` values on [b_min, b_max].
    """

    m: int
    b_min: float = -2.0
    b_max: float = 2.0
    b_count: int = 4001
    w_values: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("smoothness index m must be >= 0")
        if not self.b_min < self.b_max:
            raise ValueError("bias range must satisfy b_min < b_max")
        if self.b_count < 2:
            raise ValueError("bias grid needs at least 2 values")
        if not all(w in (-1.0, 1.0) for w in self.w_values):
            raise ValueError("1-d unit directions must be +1 or -1")

    def biases(self):
        return np.linspace(self.b_min, self.b_max, self.b_count)


@dataclass(frozen=True)
class DiscreteDictionary:
    """A finite atom family on a shared grid.

    ``values`` holds one atom per row (shape n_atoms x n_points); ``labels``
    carries the (m, w, b) parameters in the same order.  Atoms that vanish
    identically on the grid are dropped at construction.
    """

    grid: Grid
    values: np.ndarray
    labels: list

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] != len(self.grid):
            raise ValueError("values must be a (n_atoms, n_points) matrix")
        if vals.shape[0] == 0:
            raise EmptyDictionaryError("dictionary has no atoms")
        if len(self.labels) != vals.shape[0]:
            raise ValueError("labels must match the number of atoms")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]

    def atom(self, i):
        return GridFunction(self.grid, self.values[i])


@dataclass(frozen=True)
class FunctionalSet:
    """Admissible point-evaluation functionals, as grid-point indices."""

    grid: Grid
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp)
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("functional set needs at least one index")
        if np.unique(idx).size != idx.size:
            raise ValueError("functional indices must be distinct")
        if idx.min() < 0 or idx.max() >= len(self.grid):
            raise ValueError("functional index out of grid bounds")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return self.indices.size


def _sigma(m, t):
    if m == 0:
        return (t > 0).astype(float)
    return np.maximum(t, 0.0) ** m


def relu_atom(m, w, b, grid):
    """Single ridge atom sigma_m(w*x + b) sampled on the grid."""
    if m < 0:
        raise ValueError("smoothness index m must be >= 0")
    return GridFunction(grid, _sigma(m, w * grid.points + b))


def build_relu_dictionary(spec, grid, chunk=20000):
    """All atoms of the family on the grid, identically-zero atoms removed.

    Atoms are ordered by direction (in ``spec.w_values`` order), then by
    increasing bias.  Construction runs in bias chunks to bound the memory
    of the intermediate broadcast.
    """
    x = grid.points
    biases = spec.biases()
    blocks, labels = [], []
    for w in spec.w_values:
        for start in range(0, biases.size, chunk):
            bs = biases[start : start + chunk]
            block = _sigma(spec.m, w * x[None, :] + bs[:, None])
            keep = np.any(block != 0.0, axis=1)
            if np.any(keep):
                blocks.append(block[keep])
                labels.extend((spec.m, w, float(b)) for b in bs[keep])
    if not blocks:
        raise EmptyDictionaryError(
            "every atom of the family vanishes on the grid"
        )
    return DiscreteDictionary(grid, np.vstack(blocks), labels)


def build_point_functionals(grid, stride=1):
    """Every stride-th grid point as an evaluation functional."""
    stride = int(stride)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return FunctionalSet(grid, np.arange(0, len(grid), stride))


def apply_functional(fs, k, f):
    """Value of f at the k-th selected evaluation point."""
    if not 0 <= k < len(fs):
        raise ValueError(f"functional index {k} out of range")
    if not fs.grid.same_as(f.grid):
        raise ValueError("functional set and function live on different grids")
    return float(f.values[fs.indices[k]])
