"""Distance transforms and interval predicates over them.

All transforms return a float field of the source's shape holding, for each
point, the distance to the nearest source point (``inf`` when there is none).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .grid import Model, ModelError, NeighborhoodSpec


@dataclass(frozen=True)
class DistancePredicate:
    """Interval constraint on the free distance variable ``z``.

    ``DistancePredicate(lower=2, upper=5)`` is the doughnut ``2 <= z <= 5``.
    """

    lower: float | None = None
    upper: float | None = None
    lower_strict: bool = False
    upper_strict: bool = False

    def __post_init__(self):
        if self.lower is None and self.upper is None:
            raise ValueError("distance predicate needs at least one bound")
        for b in (self.lower, self.upper):
            if b is not None and not math.isfinite(b):
                raise ValueError("distance bounds must be finite")
        if self.lower is not None and self.lower < 0:
            raise ValueError("lower distance bound must be non-negative")
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise ValueError(f"empty distance interval [{self.lower}, {self.upper}]")
        if self.lower is None and self.lower_strict:
            object.__setattr__(self, "lower_strict", False)
        if self.upper is None and self.upper_strict:
            object.__setattr__(self, "upper_strict", False)

    def holds(self, d: np.ndarray) -> np.ndarray:
        d = np.asarray(d, dtype=np.float64)
        ok = np.ones(d.shape, dtype=bool)
        if self.lower is not None:
            ok &= (d > self.lower) if self.lower_strict else (d >= self.lower)
        if self.upper is not None:
            ok &= (d < self.upper) if self.upper_strict else (d <= self.upper)
        return ok


def _lines_apply(field: np.ndarray, axis: int, fn, *args) -> np.ndarray:
    moved = np.moveaxis(field, axis, -1)
    shape = moved.shape
    rows = np.ascontiguousarray(moved.reshape(-1, shape[-1]))
    out = fn(rows, *args).reshape(shape)
    return np.moveaxis(out, -1, axis)


def edt(source: np.ndarray, spacing: Sequence[float] | None = None) -> np.ndarray:
    """Exact Euclidean distance transform under anisotropic voxel spacing.

    Separable: one lower-envelope-of-parabolas pass per axis, axis 0 first,
    each linear in the line length.
    """
    source = np.asarray(source, dtype=bool)
    spacing = tuple(spacing) if spacing is not None else (1.0,) * source.ndim
    if len(spacing) != source.ndim:
        raise ModelError(f"spacing {spacing} does not match a {source.ndim}-dimensional set")
    sq = np.where(source, 0.0, np.inf)
    for axis, w in enumerate(spacing):
        sq = _lines_apply(sq, axis, _kernels.envelope_rows, float(w))
    return np.sqrt(sq)


def graph_dt(source: np.ndarray, nb: NeighborhoodSpec,
             spacing: Sequence[float] | None = None) -> np.ndarray:
    """Chamfer distance: multi-source Dijkstra over the grid graph of ``nb``.

    Arc weights come from ``nb`` (physical offset length under ``spacing``
    unless overridden).  On directed neighbourhoods the result is the length
    of the shortest path from each point into the source.
    """
    source = np.asarray(source, dtype=bool)
    nb.check_dims(source.ndim)
    spacing = tuple(spacing) if spacing is not None else (1.0,) * source.ndim
    dims = np.array(source.shape, dtype=np.int64)
    if not nb.offsets:
        return np.where(source, 0.0, np.inf)
    flat = source.ravel(order="F")
    dist = _kernels.dijkstra(flat, dims, nb.offset_array(), nb.weight_array(spacing))
    return dist.reshape(source.shape, order="F")


def closed_form_dt(source: np.ndarray, kind: str) -> np.ndarray:
    """Chessboard (max |dx_i|) or cityblock (sum |dx_i|) distance in index units."""
    source = np.asarray(source, dtype=bool)
    if kind not in ("chessboard", "cityblock"):
        raise ValueError(f"unknown closed-form metric {kind!r}")
    field = np.where(source, 0.0, np.inf)
    for axis in range(source.ndim):
        field = _lines_apply(field, axis, _kernels.minplus_rows, kind == "chessboard")
    return field


def percentage_error(d: np.ndarray, d_eucl: np.ndarray) -> np.ndarray:
    """Relative deviation ``|d_eucl - d| / d_eucl``, defined as 0 where ``d_eucl`` is 0."""
    d = np.asarray(d, dtype=np.float64)
    d_eucl = np.asarray(d_eucl, dtype=np.float64)
    if d.shape != d_eucl.shape:
        raise ModelError(f"distance fields differ in shape: {d.shape} vs {d_eucl.shape}")
    out = np.zeros(d.shape)
    nz = d_eucl != 0
    both_inf = np.isinf(d) & np.isinf(d_eucl)
    sel = nz & ~both_inf
    out[sel] = np.abs(d_eucl[sel] - d[sel]) / d_eucl[sel]
    return out


def predicate_mask(d: np.ndarray, pred: DistancePredicate) -> np.ndarray:
    return pred.holds(d)


def distance_field(model: Model, source: np.ndarray) -> np.ndarray:
    """Distance transform of ``source`` using the model's configured metric."""
    g = model.grid
    if model.metric == "euclidean":
        return edt(source, g.spacing)
    if model.metric == "graph":
        return graph_dt(source, model.neighborhood, g.spacing)
    return closed_form_dt(source, model.metric)
