"""Picard iteration u_{k+1} = 𝒜 u_k with residual diagnostics.

When the contraction constant q of 𝒜 is below one the iterates converge
geometrically, ‖u_{k+1} − u_k‖ ≤ q^k ‖u_1 − u_0‖, and the fixed point is the
unique solution of the boundary value problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bvp import ProblemSpec, _forcing_values
from .errors import DomainError, NotConverged
from .fraccalc import DEFAULT_N, GridFunction, integrate_nodes, point_weights
from .psi import gamma_fn

__all__ = [
    "SolveResult",
    "picard_solve",
    "fixed_point_residual",
    "boundary_residuals",
    "derivative_at",
    "leading_coefficient",
]


@dataclass
class SolveResult:
    """Outcome of :func:`picard_solve`.

    ``iterations`` counts the applications of 𝒜 that moved the iterate by
    more than ``tol`` (at least one). ``applications`` counts every
    application, including the final one that confirmed convergence.
    """

    u: GridFunction
    iterations: int
    applications: int
    sup_diffs: list[float]
    fixed_point_residual: float
    bc_residuals: tuple[float, float]
    converged: bool
    tol: float
    message: str = ""
    extra: dict = field(default_factory=dict)

    def contraction_ratios(self) -> np.ndarray:
        d = np.asarray(self.sup_diffs)
        with np.errstate(divide="ignore", invalid="ignore"):
            return d[1:] / d[:-1]

    def raise_if_not_converged(self) -> "SolveResult":
        if not self.converged:
            raise NotConverged(self.applications, self.sup_diffs[-1] if self.sup_diffs else math.nan)
        return self

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "applications": self.applications,
            "tol": self.tol,
            "last_sup_diff": self.sup_diffs[-1] if self.sup_diffs else None,
            "fixed_point_residual": self.fixed_point_residual,
            "bc_residuals": list(self.bc_residuals),
            "sup_norm": self.u.sup_norm(),
            "grid_n": self.u.n,
            "message": self.message,
        }


def picard_solve(
    spec: ProblemSpec,
    tol: float = 1e-10,
    max_iter: int = 200,
    u0: GridFunction | None = None,
    n: int | None = None,
    forcing=None,
) -> SolveResult:
    """Iterate 𝒜 from ``u0`` (default zero) until ‖u_{k+1} − u_k‖ ≤ tol.

    Non-convergence is reported in the result (``converged=False``), not
    raised; call :meth:`SolveResult.raise_if_not_converged` to escalate.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if u0 is None:
        u0 = GridFunction.zeros(spec.psi, n or DEFAULT_N)
    elif n is not None and n != u0.n:
        raise ValueError("u0 lives on a different grid than n")
    disc = spec.discretization(u0.n)
    fv = _forcing_values(forcing, u0)

    u = u0
    diffs: list[float] = []
    converged = False
    message = ""
    for _ in range(int(max_iter)):
        try:
            A1, A2 = disc.split(u, fv)
        except DomainError as exc:
            message = f"iteration left the domain of f or g: {exc}"
            break
        new = A1 + A2
        if not np.all(np.isfinite(new)):
            message = "iterates diverged to non-finite values"
            break
        diff = float(np.max(np.abs(new - u.values)))
        diffs.append(diff)
        u = u.with_values(new)
        if diff <= tol:
            converged = True
            break
    else:
        message = f"no convergence within {max_iter} iterations"

    applications = len(diffs)
    moved = sum(1 for d in diffs if d > tol)
    try:
        res = fixed_point_residual(spec, u, forcing=fv)
        bcs = boundary_residuals(spec, u, forcing=fv)
    except DomainError:
        res, bcs = math.inf, (math.inf, math.inf)
    return SolveResult(
        u=u,
        iterations=max(1, moved),
        applications=applications,
        sup_diffs=diffs,
        fixed_point_residual=res,
        bc_residuals=bcs,
        converged=converged,
        tol=tol,
        message=message or "converged",
    )


def fixed_point_residual(spec: ProblemSpec, u: GridFunction, forcing=None) -> float:
    """‖u − 𝒜u‖ over the grid."""
    A1, A2 = spec.discretization(u.n).split(u, _forcing_values(forcing, u))
    return float(np.max(np.abs(u.values - A1 - A2)))


def leading_coefficient(spec: ProblemSpec, u: GridFunction, F: np.ndarray) -> float:
    """c₁ in u = I^νF − λI^1u + c₁ ψ_a^{μ−1}/Γ(μ), read off ``u`` at T."""
    mu = spec.mu
    sig = spec.singular_exponents
    IF_T = float(integrate_nodes(F, u.h, spec.nu, sig)[-1])
    Iu_T = float(integrate_nodes(u.values, u.h, 1.0, sig)[-1])
    return gamma_fn(mu) * (u.values[-1] - IF_T + spec.lam * Iu_T) / spec.psi.power(spec.T, mu - 1.0)


def derivative_at(spec: ProblemSpec, u: GridFunction, t: float, forcing=None) -> float:
    """u′(t) under the convention of the problem's fidelity mode.

    ``"paper-faithful"``: differentiating the representation with the
    coefficient ψ(t) on I^{ν−1}F and no ψ′ on the ψ_a^{μ−2} term,

        u′(t) = ψ(t) I^{ν−1}F(t) − λ ψ′(t) u(t) + ψ_a^{μ−2}(t) c₁ / Γ(μ−1),

    with c₁ from :func:`leading_coefficient`. ``"corrected"``: the ordinary
    derivative du/dt = ψ′(t) du/dτ from a degree-4 local polynomial in τ.
    """
    if spec.mode == "corrected":
        return _local_derivative(u, t)
    psi = spec.psi
    F = spec.discretization(u.n).F_values(u, _forcing_values(forcing, u))
    c1 = leading_coefficient(spec, u, F)
    mu, nu, lam = spec.mu, spec.nu, spec.lam
    I_nm1 = float(point_weights(psi, u.n, nu - 1.0, t, spec.singular_exponents) @ F)
    return (
        float(psi(t)) * I_nm1
        - lam * float(psi.prime(t)) * local_value(u, t)
        + psi.power(t, mu - 2.0) * c1 / gamma_fn(mu - 1.0)
    )


def _local_poly(u: GridFunction, t: float) -> np.ndarray:
    """Coefficients (in (τ − ψ(t))/h) of the quartic through the 5 nearest nodes."""
    tau = float(u.psi(t))
    j = int(round((tau - u.taus[0]) / u.h))
    lo = min(max(j - 2, 0), u.n - 4)
    idx = np.arange(lo, lo + 5)
    x = (u.taus[idx] - tau) / u.h
    return np.polynomial.polynomial.polyfit(x, u.values[idx], 4)


def _local_derivative(u: GridFunction, t: float) -> float:
    return float(_local_poly(u, t)[1] / u.h * u.psi.prime(t))


def local_value(u: GridFunction, t: float) -> float:
    """u(t) from the quartic through the 5 nearest nodes (smooth parts of u)."""
    return float(_local_poly(u, t)[0])


def boundary_residuals(spec: ProblemSpec, u: GridFunction, forcing=None) -> tuple[float, float]:
    """(|u(a)|, |I^{2−μ}u(T) − Σαᵢu(ηᵢ) − Σβᵢu′(ηᵢ) − g(u(ξ))|).

    I^{2−μ}u(T) uses starting weights for the exponents ψ_a^{μ−1}, ψ_a^ν and
    ψ_a^μ that solutions carry near t = a, so these terms are integrated
    exactly. Point values at ηᵢ and ξ use a local quartic in τ; u′(ηᵢ)
    follows :func:`derivative_at`.
    """
    left = abs(float(u.values[0]))
    lhs = float(point_weights(spec.psi, u.n, 2.0 - spec.mu, spec.T, spec.singular_exponents) @ u.values)
    rhs = float(spec.g_at(local_value(u, spec.xi)))
    for al, be, eta in zip(spec.alphas, spec.betas, spec.etas):
        rhs += al * local_value(u, eta)
        if be != 0.0:
            rhs += be * derivative_at(spec, u, eta, forcing=forcing)
    return left, abs(lhs - rhs)
