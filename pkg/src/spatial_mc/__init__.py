"""Spatial model checking for images and voxel volumes.

Formulas combine pointwise constraints on image attributes with the
near/surrounded operators of closure spaces, distance predicates computed
from distance transforms, and a texture-similarity operator.
"""

from .checker import CheckError, Checker, check, eval_atom, surrounded
from .distance import (DistancePredicate, closed_form_dt, distance_field, edt, graph_dt,
                       percentage_error, predicate_mask)
from .formula import (And, Atom, Dist, Formula, FormulaSyntaxError, Near, Not, Or, Scmp,
                      ScmpParams, Surrounded, TT, parse_formula, to_text, validate)
from .grid import (LoadError, Model, ModelError, NeighborhoodSpec, VoxelGrid, dilate,
                   make_model, neighbors_of)

__all__ = [
    "And", "Atom", "CheckError", "Checker", "Dist", "DistancePredicate", "Formula",
    "FormulaSyntaxError", "LoadError", "Model", "ModelError", "Near", "NeighborhoodSpec",
    "Not", "Or", "Scmp", "ScmpParams", "Surrounded", "TT", "VoxelGrid", "check",
    "closed_form_dt", "dilate", "distance_field", "edt", "eval_atom", "graph_dt",
    "make_model", "neighbors_of", "parse_formula", "percentage_error", "predicate_mask",
    "surrounded", "to_text", "validate",
]
