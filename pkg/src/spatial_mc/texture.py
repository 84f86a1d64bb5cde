"""First-order texture statistics: value histograms and their similarity.

Histograms use ``nbins`` equal-width bins over ``[vmin, vmax]``. Bins are
half-open except the last, which is closed; values outside the range are
clamped into the end bins so that no sample is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import ModelError, VoxelGrid


class TextureError(ValueError):
    pass


@dataclass(frozen=True)
class Histogram:
    nbins: int
    vmin: float
    vmax: float
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.nbins < 1 or not self.vmin < self.vmax:
            raise TextureError(f"bad histogram configuration: {self.nbins} bins over [{self.vmin}, {self.vmax}]")
        if len(self.counts) != self.nbins:
            raise TextureError("counts do not match bin count")

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def config(self):
        return (self.nbins, self.vmin, self.vmax)

    def frequencies(self) -> np.ndarray:
        c = np.asarray(self.counts, dtype=np.float64)
        return c / c.sum()


def bin_index(values, nbins: int, vmin: float, vmax: float) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    idx = np.floor((values - vmin) * nbins / (vmax - vmin))
    return np.clip(idx, 0, nbins - 1).astype(np.int64)


def _histogram(values, nbins, vmin, vmax) -> Histogram:
    counts = np.bincount(bin_index(values, nbins, vmin, vmax).ravel(), minlength=nbins)
    return Histogram(nbins, float(vmin), float(vmax), tuple(int(c) for c in counts))


def region_histogram(g: VoxelGrid, attr: str, region: np.ndarray,
                     nbins: int, vmin: float, vmax: float) -> Histogram:
    region = g.check_mask(region)
    if not region.any():
        raise TextureError("reference region is empty")
    return _histogram(g[attr][region], nbins, vmin, vmax)


def window_histogram(g: VoxelGrid, attr: str, center, radius: int,
                     nbins: int, vmin: float, vmax: float) -> Histogram:
    """Histogram over the Chebyshev ball of ``radius`` around ``center``, clipped to the grid."""
    if radius < 1:
        raise TextureError("window radius must be at least 1")
    center = tuple(int(c) for c in center)
    if len(center) != g.ndim or any(not 0 <= c < n for c, n in zip(center, g.dims)):
        raise ModelError(f"point {center} outside grid {g.dims}")
    window = tuple(slice(max(c - radius, 0), c + radius + 1) for c in center)
    return _histogram(g[attr][window], nbins, vmin, vmax)


def _check_compatible(a: Histogram, b: Histogram):
    if a.config != b.config:
        raise TextureError(f"incompatible histograms {a.config} vs {b.config}")


def cross_correlation(a: Histogram, b: Histogram) -> float:
    """Pearson correlation of the two frequency vectors.

    If either vector is flat (zero variance) the result is 1 when the
    frequency vectors are equal and 0 otherwise.
    """
    _check_compatible(a, b)
    fa, fb = a.frequencies(), b.frequencies()
    ca = np.asarray(a.counts, dtype=np.int64)
    cb = np.asarray(b.counts, dtype=np.int64)
    equal = bool(np.all(ca * b.total == cb * a.total))
    da, db = fa - fa.mean(), fb - fb.mean()
    va, vb = float(np.dot(da, da)), float(np.dot(db, db))
    if np.all(ca == ca[0]) or np.all(cb == cb[0]):
        return 1.0 if equal else 0.0
    if equal:
        return 1.0
    r = float(np.dot(da, db)) / math.sqrt(va * vb)
    return min(1.0, max(-1.0, r))


def _box_sum(arr: np.ndarray, radius: int) -> np.ndarray:
    """Sum over the clipped hypercube of half-width ``radius`` around each point."""
    out = arr
    for axis in range(arr.ndim):
        n = out.shape[axis]
        cs = np.cumsum(out, axis=axis, dtype=np.int64)
        pad = [(0, 0)] * out.ndim
        pad[axis] = (1, 0)
        cs = np.pad(cs, pad)
        idx = np.arange(n)
        hi = np.minimum(idx + radius + 1, n)
        lo = np.maximum(idx - radius, 0)
        out = np.take(cs, hi, axis=axis) - np.take(cs, lo, axis=axis)
    return out


def similarity_field(values: np.ndarray, ref: Histogram, radius: int) -> np.ndarray:
    """Correlation between each point's window histogram and ``ref``.

    Window counts per bin come from separable box sums over one-hot bin
    indicators, so the cost is linear in the number of points per bin.
    Correlation is computed from raw counts, which equals the correlation of
    the frequency vectors because Pearson's r ignores scaling.
    """
    if radius < 1:
        raise TextureError("window radius must be at least 1")
    nbins = ref.nbins
    bins = bin_index(values, nbins, ref.vmin, ref.vmax)
    b = np.asarray(ref.counts, dtype=np.int64)
    tb = int(b.sum())
    total = _box_sum(np.ones(values.shape, dtype=np.int64), radius)
    sum_ab = np.zeros(values.shape, dtype=np.int64)
    sum_aa = np.zeros(values.shape, dtype=np.int64)
    equal = np.ones(values.shape, dtype=bool)
    first = None
    flat_a = np.ones(values.shape, dtype=bool)
    for k in range(nbins):
        a_k = _box_sum((bins == k).astype(np.int64), radius)
        sum_ab += a_k * b[k]
        sum_aa += a_k * a_k
        equal &= a_k * tb == b[k] * total
        if first is None:
            first = a_k
        else:
            flat_a &= a_k == first
    # n*cov and n*var, exact in integers
    num = nbins * sum_ab - total * tb
    var_a = nbins * sum_aa - total * total
    var_b = nbins * int(np.dot(b, b)) - tb * tb
    with np.errstate(invalid="ignore", divide="ignore"):
        r = num / (np.sqrt(var_a.astype(np.float64)) * math.sqrt(max(var_b, 0)))
    r = np.clip(np.nan_to_num(r, nan=0.0), -1.0, 1.0)
    flat_b = bool(np.all(b == b[0]))
    degenerate = flat_a | flat_b
    r = np.where(degenerate, np.where(equal, 1.0, 0.0), r)
    r[equal] = 1.0
    return r


def scmp_mask(g: VoxelGrid, attr: str, reference: np.ndarray, threshold: float,
              radius: int, nbins: int, vmin: float, vmax: float) -> np.ndarray:
    """Points whose local histogram correlates with the reference region's at least ``threshold``."""
    ref = region_histogram(g, attr, reference, nbins, vmin, vmax)
    return similarity_field(g[attr], ref, radius) >= threshold
