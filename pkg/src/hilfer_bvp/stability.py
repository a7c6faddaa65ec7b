"""Empirical Ulam–Hyers experiments.

A perturbation z with |z(t)| ≤ ε is added to the right-hand side of the
equation while the boundary conditions stay unchanged. If the unperturbed
problem is a contraction with constant q = Ω + kN < 1, the perturbed solution
u and the exact solution x satisfy ‖u − x‖ ≤ c_f ε with c_f = Θ/(1 − q).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import expr as _expr
from .bvp import ProblemSpec
from .criteria import CriteriaReport, compute_constants, ulam_constant
from .errors import InvalidProblem
from .fraccalc import DEFAULT_N
from .solver import SolveResult, picard_solve

__all__ = ["Perturbation", "perturbed_solve", "uh_check", "UHResult"]

_Z_VARS = frozenset({"t", "eps", "psi"})


@dataclass(frozen=True)
class Perturbation:
    """z(t) as an expression in ``t``, ``eps`` (= ε) and ``psi`` (= ψ(t)), with ε ≥ 0."""

    z: _expr.Expr
    eps: float

    @classmethod
    def from_source(cls, source: str, eps: float) -> "Perturbation":
        return cls(_expr.parse(source, variables=_Z_VARS), float(eps))

    @classmethod
    def constant(cls, eps: float) -> "Perturbation":
        return cls.from_source("eps", eps)

    @classmethod
    def sine(cls, eps: float) -> "Perturbation":
        return cls.from_source("eps*sin(psi)", eps)

    def __post_init__(self):
        if not self.eps >= 0:
            raise InvalidProblem(f"eps must be nonnegative, got {self.eps!r}")
        extra = _expr.free_variables(self.z) - _Z_VARS
        if extra:
            raise InvalidProblem(f"z may only use t, eps and psi, not {sorted(extra)}")

    def values(self, spec: ProblemSpec, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = _expr.evaluate(self.z, {"t": t, "eps": self.eps, "psi": spec.psi(t)})
        return np.asarray(out, dtype=float) + np.zeros_like(t)

    def check_bound(self, spec: ProblemSpec, samples: int = 10_000) -> float:
        """Sampled sup |z|; raises :class:`InvalidProblem` if it exceeds ε."""
        t = np.linspace(spec.a, spec.T, samples + 1)
        sup = float(np.max(np.abs(self.values(spec, t))))
        if sup > self.eps * (1 + 1e-12):
            raise InvalidProblem(f"sup|z| = {sup:.6g} exceeds eps = {self.eps:.6g}")
        return sup


def perturbed_solve(
    spec: ProblemSpec,
    pert: Perturbation,
    tol: float = 1e-10,
    max_iter: int = 200,
    n: int = DEFAULT_N,
    report: CriteriaReport | None = None,
) -> SolveResult:
    """Picard solution of the equation with right-hand side F_u + z."""
    pert.check_bound(spec)
    report = report or compute_constants(spec)
    if report.banach_value is None or not report.banach_value < 1.0:
        warnings.warn("contraction criterion does not hold; Picard may not converge", RuntimeWarning, stacklevel=2)
    return picard_solve(spec, tol=tol, max_iter=max_iter, n=n, forcing=lambda t: pert.values(spec, t))


@dataclass
class UHResult:
    eps: float
    sup_diff: float
    bound: float
    passed: bool
    c_f: float
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def uh_check(
    spec: ProblemSpec,
    pert: Perturbation,
    tol: float = 1e-10,
    max_iter: int = 200,
    n: int = DEFAULT_N,
    baseline: SolveResult | None = None,
    report: CriteriaReport | None = None,
) -> UHResult:
    """Compare the perturbed and unperturbed solutions against c_f ε (+ 2 tol).

    Raises :class:`NotContractive` when Ω + kN ≥ 1.
    """
    report = report or compute_constants(spec)
    c_f, phi_f = ulam_constant(report)
    if baseline is None:
        baseline = picard_solve(spec, tol=tol, max_iter=max_iter, n=n)
    elif baseline.u.n != n:
        raise ValueError("baseline solution lives on a different grid")
    pert_res = perturbed_solve(spec, pert, tol=tol, max_iter=max_iter, n=n, report=report)
    sup_diff = float(np.max(np.abs(pert_res.u.values - baseline.u.values)))
    bound = phi_f(pert.eps)
    return UHResult(
        eps=pert.eps,
        sup_diff=sup_diff,
        bound=bound,
        passed=bool(sup_diff <= bound + 2 * tol),
        c_f=c_f,
        iterations=pert_res.iterations,
        converged=pert_res.converged and baseline.converged,
    )
