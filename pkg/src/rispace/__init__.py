"""Exact computations in rearrangement-invariant spaces on step functions.

Submodules
----------
stepfn      step functions on [0, 1), rearrangements, head integrals
norms       Lorentz, Marcinkiewicz, Orlicz exponential and L^p norms
rademacher  dyadic Rademacher sums
signselect  certified sign selection for head-integral domination
mixed2d     mixed norms on the unit square and the transposition counterexample
harness     summing ratios and randomized inequality suites
"""

from .stepfn import StepFn1D, distribution, head_integral, rearrange
from .norms import SpaceSpec, WeightFn, norm
from .rademacher import rademacher_sum
from .signselect import SelectionCertificate, select_signs
from .mixed2d import StepFn2D, mixed_norm
from .harness import ExperimentReport, max_sign_norm, run_suite, summing_ratio

__version__ = "0.1.0"

__all__ = [
    "ExperimentReport",
    "SelectionCertificate",
    "SpaceSpec",
    "StepFn1D",
    "StepFn2D",
    "WeightFn",
    "distribution",
    "head_integral",
    "max_sign_norm",
    "mixed_norm",
    "norm",
    "rademacher_sum",
    "rearrange",
    "run_suite",
    "select_signs",
    "summing_ratio",
]
