"""Voxel grids, neighbourhood relations and the closure (dilation) they induce.

Point sets are plain boolean ``numpy`` arrays of shape ``grid.dims`` and
scalar fields are float arrays of the same shape.  Array index ``[x0, x1, ...]``
addresses the point with coordinate ``x_i`` along axis ``i``.  When a linear
index is needed it is taken in Fortran order, so axis 0 varies fastest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np


class ModelError(ValueError):
    """Inconsistent grid, neighbourhood or point-set dimensions."""


class LoadError(Exception):
    """Input data could not be turned into a model."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """A finite n-dimensional grid carrying named real-valued attributes.

    Parameters
    ----------
    dims : sequence of int
        Number of points along each axis.
    spacing : sequence of float, optional
        Physical voxel size along each axis. Defaults to 1 everywhere.
    attributes : mapping of str to array_like, optional
        One field of shape ``dims`` per attribute. Values are stored as
        float64 and frozen.
    """

    dims: tuple[int, ...]
    spacing: tuple[float, ...] = ()
    attributes: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ModelError(f"invalid grid dimensions {self.dims!r}")
        spacing = tuple(float(s) for s in self.spacing) or (1.0,) * len(dims)
        if len(spacing) != len(dims):
            raise ModelError(f"spacing {spacing} does not match {len(dims)} dimensions")
        if not all(math.isfinite(s) and s > 0 for s in spacing):
            raise ModelError(f"spacing must be positive and finite, got {spacing}")
        attrs = {}
        for name, values in self.attributes.items():
            values = np.asarray(values)
            if values.shape != dims:
                if values.size != math.prod(dims):
                    raise ModelError(
                        f"attribute {name!r} has {values.size} values, expected {math.prod(dims)}")
                values = values.reshape(dims, order="F")
            values = _freeze(values)
            if np.isnan(values).any():
                raise ModelError(f"attribute {name!r} contains NaN")
            attrs[name] = values
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "attributes", MappingProxyType(attrs))

    @classmethod
    def from_array(cls, values, name: str = "intensity", spacing: Sequence[float] = ()):
        values = np.asarray(values)
        return cls(values.shape, spacing, {name: values})

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.attributes[name]

    def with_spacing(self, spacing: Sequence[float]) -> "VoxelGrid":
        return VoxelGrid(self.dims, tuple(spacing), self.attributes)

    def with_attributes(self, **extra) -> "VoxelGrid":
        return VoxelGrid(self.dims, self.spacing, {**self.attributes, **extra})

    def empty(self) -> np.ndarray:
        return np.zeros(self.dims, dtype=bool)

    def full(self) -> np.ndarray:
        return np.ones(self.dims, dtype=bool)

    def check_mask(self, mask: np.ndarray) -> np.ndarray:
        mask = np.asarray(mask)
        if mask.shape != self.dims:
            raise ModelError(f"point set of shape {mask.shape} does not fit grid {self.dims}")
        return mask.astype(bool, copy=False)


@dataclass(frozen=True, eq=False)
class NeighborhoodSpec:
    """The adjacency relation R, given as integer offsets.

    ``x`` is adjacent to ``x + o`` for every offset ``o``.  Offsets leaving the
    grid are dropped.  ``weights`` maps an offset to its arc length; offsets
    without an explicit weight get their physical Euclidean length.
    """

    offsets: tuple[tuple[int, ...], ...]
    weights: Mapping[tuple[int, ...], float] | None = None
    name: str = "custom"

    def __post_init__(self):
        offsets = tuple(sorted({tuple(int(c) for c in o) for o in self.offsets}))
        if offsets and len({len(o) for o in offsets}) != 1:
            raise ModelError("offsets must all have the same length")
        if any(not any(o) for o in offsets):
            raise ModelError("zero offset is not allowed")
        weights = None
        if self.weights is not None:
            weights = {tuple(int(c) for c in o): float(w) for o, w in self.weights.items()}
            unknown = set(weights) - set(offsets)
            if unknown:
                raise ModelError(f"weights given for unknown offsets {sorted(unknown)}")
            if not all(w > 0 and math.isfinite(w) for w in weights.values()):
                raise ModelError("arc weights must be positive and finite")
            weights = MappingProxyType(weights)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def moore(cls, ndim: int) -> "NeighborhoodSpec":
        return cls.extended(ndim, 1, name="moore")

    @classmethod
    def von_neumann(cls, ndim: int) -> "NeighborhoodSpec":
        offsets = []
        for axis in range(ndim):
            for step in (-1, 1):
                o = [0] * ndim
                o[axis] = step
                offsets.append(tuple(o))
        return cls(tuple(offsets), name="vonneumann")

    @classmethod
    def extended(cls, ndim: int, k: int, name: str | None = None) -> "NeighborhoodSpec":
        """All nonzero offsets in ``{-k, ..., k}^ndim`` (k=2 gives the 5-hypercube)."""
        if k < 1:
            raise ModelError("extended neighbourhood needs k >= 1")
        rng = range(-k, k + 1)
        offsets = tuple(o for o in itertools.product(rng, repeat=ndim) if any(o))
        return cls(offsets, name=name or f"extended{k}")

    @classmethod
    def preset(cls, name: str, ndim: int, k: int = 2) -> "NeighborhoodSpec":
        key = name.lower().replace("_", "").replace(" ", "")
        if key == "moore":
            return cls.moore(ndim)
        if key in ("vonneumann", "neumann"):
            return cls.von_neumann(ndim)
        if key == "extended":
            return cls.extended(ndim, k)
        raise ModelError(f"unknown neighbourhood preset {name!r}")

    def with_unit_weights(self) -> "NeighborhoodSpec":
        return NeighborhoodSpec(self.offsets, {o: 1.0 for o in self.offsets}, self.name)

    @property
    def ndim(self) -> int:
        return len(self.offsets[0]) if self.offsets else 0

    @property
    def symmetric(self) -> bool:
        offs = set(self.offsets)
        if any(tuple(-c for c in o) not in offs for o in offs):
            return False
        if self.weights is None:
            return True
        return all(self.weights.get(o) == self.weights.get(tuple(-c for c in o)) for o in offs)

    def weight(self, offset: Sequence[int], spacing: Sequence[float]) -> float:
        offset = tuple(offset)
        if self.weights is not None and offset in self.weights:
            return self.weights[offset]
        return math.sqrt(sum((o * s) ** 2 for o, s in zip(offset, spacing)))

    def offset_array(self) -> np.ndarray:
        return np.array(self.offsets, dtype=np.int64).reshape(len(self.offsets), -1)

    def weight_array(self, spacing: Sequence[float]) -> np.ndarray:
        return np.array([self.weight(o, spacing) for o in self.offsets], dtype=np.float64)

    def check_dims(self, ndim: int):
        if self.offsets and self.ndim != ndim:
            raise ModelError(f"{self.ndim}-dimensional neighbourhood used on a {ndim}-dimensional grid")


def _shift_slices(offset, dims):
    """Slices (dst, src) such that dst[x] receives src[x - offset] within bounds."""
    dst, src = [], []
    for o, n in zip(offset, dims):
        if abs(o) >= n:
            return None
        if o >= 0:
            dst.append(slice(o, n))
            src.append(slice(0, n - o))
        else:
            dst.append(slice(0, n + o))
            src.append(slice(-o, n))
    return tuple(dst), tuple(src)


def dilate(s: np.ndarray, nb: NeighborhoodSpec) -> np.ndarray:
    """Closure of ``s``: ``s`` plus every in-bounds ``x`` with ``x - o`` in ``s`` for some offset ``o``."""
    s = np.asarray(s, dtype=bool)
    nb.check_dims(s.ndim)
    out = s.copy()
    for o in nb.offsets:
        sl = _shift_slices(o, s.shape)
        if sl is not None:
            out[sl[0]] |= s[sl[1]]
    return out


def neighbors_of(x: Sequence[int], nb: NeighborhoodSpec, grid: VoxelGrid) -> list[tuple[tuple[int, ...], float]]:
    """In-bounds points ``x + o`` with the weight of the arc leading to them."""
    x = tuple(int(c) for c in x)
    if len(x) != grid.ndim or any(not 0 <= c < n for c, n in zip(x, grid.dims)):
        raise ModelError(f"point {x} outside grid {grid.dims}")
    nb.check_dims(grid.ndim)
    out = []
    for o in nb.offsets:
        y = tuple(c + d for c, d in zip(x, o))
        if all(0 <= c < n for c, n in zip(y, grid.dims)):
            out.append((y, nb.weight(o, grid.spacing)))
    return out


METRICS = ("graph", "euclidean", "chessboard", "cityblock")


@dataclass(frozen=True, eq=False)
class Model:
    """Grid plus adjacency plus the metric used by distance formulas."""

    grid: VoxelGrid
    neighborhood: NeighborhoodSpec
    metric: str = "graph"

    def __post_init__(self):
        self.neighborhood.check_dims(self.grid.ndim)
        if self.metric not in METRICS:
            raise ModelError(f"unknown metric {self.metric!r}; expected one of {METRICS}")

    @property
    def dims(self):
        return self.grid.dims


def make_model(source, nb: NeighborhoodSpec | None = None, metric: str = "graph",
               spacing: Sequence[float] | None = None) -> Model:
    """Bundle an image or volume with a neighbourhood.

    ``source`` may be a :class:`VoxelGrid`, an array (stored as attribute
    ``intensity``) or a path to an image or RAWVOL volume.
    """
    if isinstance(source, VoxelGrid):
        grid = source
    elif isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        from . import imgio
        grid = imgio.load(source)
    else:
        try:
            arr = np.asarray(source, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise LoadError(f"cannot build a grid from {type(source).__name__}") from exc
        if arr.ndim == 0:
            raise LoadError("scalar input is not an image")
        grid = VoxelGrid.from_array(arr)
    if spacing is not None:
        grid = grid.with_spacing(spacing)
    if nb is None:
        nb = NeighborhoodSpec.moore(grid.ndim)
    return Model(grid, nb, metric)


def linear_index(point: Iterable[int], dims: Sequence[int]) -> int:
    return int(np.ravel_multi_index(tuple(point), tuple(dims), order="F"))
