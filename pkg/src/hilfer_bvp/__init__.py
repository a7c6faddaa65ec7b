"""Numerical toolkit for sequential ψ-Hilfer fractional boundary value problems.

Modules:

* :mod:`~hilfer_bvp.expr`: expression language for f, g, ψ and metadata.
* :mod:`~hilfer_bvp.psi`: the kernel function ψ and its built-in families.
* :mod:`~hilfer_bvp.fraccalc`: ψ-Riemann–Liouville integrals and the ψ-Hilfer derivative.
* :mod:`~hilfer_bvp.bvp`: problem model and the fixed-point operator.
* :mod:`~hilfer_bvp.solver`: Picard iteration and residual checks.
* :mod:`~hilfer_bvp.criteria`: existence, uniqueness and stability constants.
* :mod:`~hilfer_bvp.stability`: empirical Ulam–Hyers experiments.
* :mod:`~hilfer_bvp.config`, :mod:`~hilfer_bvp.scenarios`, :mod:`~hilfer_bvp.cli`: run configuration and command line.
"""

from __future__ import annotations

from .bvp import Growth, Lipschitz, ProblemSpec, VOperator, apply_operator, compute_delta, operator_at
from .criteria import CriteriaReport, compute_constants, full_report
from .errors import HilferBVPError
from .fraccalc import FracOrder, GridFunction, frac_integral, hilfer_derivative
from .psi import PsiFunction, gamma_fn
from .solver import SolveResult, boundary_residuals, fixed_point_residual, picard_solve
from .stability import Perturbation, uh_check

__version__ = "0.1.0"

__all__ = [
    "CriteriaReport",
    "FracOrder",
    "GridFunction",
    "Growth",
    "HilferBVPError",
    "Lipschitz",
    "Perturbation",
    "ProblemSpec",
    "PsiFunction",
    "SolveResult",
    "VOperator",
    "apply_operator",
    "boundary_residuals",
    "compute_constants",
    "compute_delta",
    "fixed_point_residual",
    "frac_integral",
    "full_report",
    "gamma_fn",
    "hilfer_derivative",
    "operator_at",
    "picard_solve",
    "uh_check",
]
