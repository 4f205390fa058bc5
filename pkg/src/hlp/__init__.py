"""Exact verification of Hodge-Lefschetz packages.

The layers, bottom-up: :mod:`hlp.exact` (rational matrices and subspaces),
:mod:`hlp.graded` (graded spaces, operators, twisted forms),
:mod:`hlp.lefschetz` (weight filtrations and Lefschetz decompositions),
:mod:`hlp.perverse` (perverse filtration and the structural checks),
:mod:`hlp.corpus` (ground-truth packages) and :mod:`hlp.cli`.
"""

from .exact import Matrix, Subspace, image, join, kernel, meet, perp, quotient_map, signature
from .graded import GradedOperator, GradedSpace, PoincarePairing, TwistedForm, twisted_form
from .lefschetz import (
    double_decomposition,
    double_form,
    induced_form,
    jordan_weight_oracle,
    lefschetz_decomposition,
    weight_filtration,
)
from .perverse import FiberRecord, PerversePackage, perverse_filtration, validate_package

__version__ = "0.1.0"

__all__ = [
    "Matrix",
    "Subspace",
    "image",
    "join",
    "kernel",
    "meet",
    "perp",
    "quotient_map",
    "signature",
    "GradedOperator",
    "GradedSpace",
    "PoincarePairing",
    "TwistedForm",
    "twisted_form",
    "double_decomposition",
    "double_form",
    "induced_form",
    "jordan_weight_oracle",
    "lefschetz_decomposition",
    "weight_filtration",
    "FiberRecord",
    "PerversePackage",
    "perverse_filtration",
    "validate_package",
]
