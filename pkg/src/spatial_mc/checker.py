"""Global model checking: the set of points satisfying a formula, bottom-up."""

from __future__ import annotations

import numpy as np

from . import _kernels, texture
from .distance import distance_field, predicate_mask
from .formula import (And, Atom, Dist, Formula, Near, Not, Or, Scmp, Surrounded, TT,
                      to_text, validate)
from .grid import Model, NeighborhoodSpec, VoxelGrid, dilate


class CheckError(Exception):
    pass


_COMPARE = {
    "<": np.less,
    "<=": np.less_equal,
    "=": np.equal,
    ">=": np.greater_equal,
    ">": np.greater,
}


def eval_atom(g: VoxelGrid, atom: Atom) -> np.ndarray:
    if atom.attribute not in g.attributes:
        raise CheckError(f"unknown attribute {atom.attribute}")
    return _COMPARE[atom.op](g[atom.attribute], atom.value)


def surrounded(a: np.ndarray, b: np.ndarray, nb: NeighborhoodSpec) -> np.ndarray:
    """Points of ``a`` from which no path leaves ``a`` without first touching ``b``.

    Flood backwards from the points outside both sets, through points not in
    ``b``; whatever of ``a`` is reached can escape.
    """
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    nb.check_dims(a.ndim)
    seed = ~a & ~b
    if not nb.offsets or not seed.any():
        return a.copy()
    reached = _kernels.flood_back(
        seed.ravel(order="F"), (~b).ravel(order="F"),
        np.array(a.shape, dtype=np.int64), nb.offset_array())
    return a & ~reached.reshape(a.shape, order="F")


class Checker:
    """Evaluates formulas on one model, caching every subformula's point set.

    Cached arrays are marked read-only; callers get them as-is.
    """

    def __init__(self, model: Model, cache: bool = True):
        self.model = model
        self.use_cache = cache
        self.cache: dict[Formula, np.ndarray] = {}

    @property
    def grid(self) -> VoxelGrid:
        return self.model.grid

    def check(self, f: Formula) -> np.ndarray:
        if self.use_cache and f in self.cache:
            return self.cache[f]
        result = self._eval(f)
        result.setflags(write=False)
        if self.use_cache:
            self.cache[f] = result
        return result

    def check_valid(self, f: Formula) -> np.ndarray:
        errors = validate(f, self.grid)
        if errors:
            raise CheckError("; ".join(errors))
        return self.check(f)

    def _eval(self, f: Formula) -> np.ndarray:
        if isinstance(f, TT):
            return self.grid.full()
        if isinstance(f, Atom):
            return eval_atom(self.grid, f)
        if isinstance(f, Not):
            return ~self.check(f.arg)
        if isinstance(f, And):
            return self.check(f.left) & self.check(f.right)
        if isinstance(f, Or):
            return self.check(f.left) | self.check(f.right)
        if isinstance(f, Near):
            return self.eval_near(f.arg)
        if isinstance(f, Surrounded):
            return self.eval_surrounded(f.left, f.right)
        if isinstance(f, Dist):
            d = distance_field(self.model, self.check(f.arg))
            return predicate_mask(d, f.pred)
        if isinstance(f, Scmp):
            return self.eval_scmp(f)
        raise CheckError(f"cannot check {f!r}")

    def eval_near(self, f: Formula) -> np.ndarray:
        return dilate(self.check(f), self.model.neighborhood)

    def eval_surrounded(self, f1: Formula, f2: Formula) -> np.ndarray:
        return surrounded(self.check(f1), self.check(f2), self.model.neighborhood)

    def eval_scmp(self, f: Scmp) -> np.ndarray:
        p = f.params
        problems = p.problems()
        if problems:
            raise CheckError("; ".join(problems))
        if p.attribute not in self.grid.attributes:
            raise CheckError(f"unknown attribute {p.attribute}")
        sa = self.check(f.arg)
        if not sa.any():
            raise CheckError(f"SCMP reference area is empty: {to_text(f.arg)}")
        return texture.scmp_mask(self.grid, p.attribute, sa, p.threshold,
                                 p.radius, p.nbins, p.vmin, p.vmax)


def check(model: Model, f: Formula, cache: bool = True) -> np.ndarray:
    return Checker(model, cache).check_valid(f)
