"""Closed-form criteria constants and verdicts for existence, uniqueness and stability.

With k = ψ_a^{μ−1}(T) / (|Δ| Γ(μ)) the constants are

.. math::

    \\Theta = \\frac{\\psi_a^{\\nu}(T)}{\\Gamma(\\nu+1)} + k\\Big[\\sum|\\alpha_i|
        \\frac{\\psi_a^{\\nu}(\\eta_i)}{\\Gamma(\\nu+1)} + \\sum|\\beta_i| c_i
        \\frac{\\psi_a^{\\nu-1}(\\eta_i)}{\\Gamma(\\nu)}
        + \\frac{\\psi_a^{2-\\mu+\\nu}(T)}{\\Gamma(3-\\mu+\\nu)}\\Big],

    \\Phi = k\\Big(\\frac{\\psi_a^{3-\\mu}(T)}{\\Gamma(4-\\mu)} + \\sum|\\alpha_i|\\psi_a(\\eta_i)
        + \\sum|\\beta_i|\\psi'(\\eta_i)\\Big) + \\psi_a(T),

    \\Lambda(t,\\mu) = l_1^* + l_2^* + l_3^* \\frac{\\psi_a^{2-\\mu}(t)}{\\Gamma(3-\\mu)},
    \\qquad \\Omega = \\Lambda(T,\\mu)\\Theta + |\\lambda|\\Phi,

where c_i = ψ(η_i) (paper-faithful) or ψ′(η_i) (corrected). The contraction
constant of 𝒜 is Ω + kN, Ξ = |λ|Φ + kN, and the Ulam–Hyers constant is
c_f = Θ / (1 − (Ω + kN)).

The offset term kN|a| in r_min, M and ζ comes from |g(x)| ≤ N(|x| + |a|),
which follows from g(a) = 0 and the Lipschitz bound on g.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import expr as _expr
from .bvp import ProblemSpec, compute_delta
from .errors import MissingMetadata, NotContractive
from .psi import gamma_fn

__all__ = [
    "CriteriaReport",
    "Verdict",
    "compute_constants",
    "check_banach",
    "check_sadovskii",
    "check_burton_kirk",
    "ulam_constant",
    "zeta",
    "sampled_max",
    "compare_reference",
    "SAMPLE_POINTS",
]

#: uniform t-samples used for the maxima l_i*, p_i*, ‖p‖ and L
SAMPLE_POINTS = 10_000


@dataclass
class Verdict:
    holds: bool
    reason: str
    details: dict = field(default_factory=dict)


@dataclass
class CriteriaReport:
    """Criteria constants of one problem. Fields needing absent metadata are ``None``."""

    mode: str
    delta: float
    theta: float
    phi: float
    k: float
    lstar: tuple[float, float, float] | None = None
    N: float | None = None
    lambda_T_mu: float | None = None
    omega: float | None = None
    banach_value: float | None = None
    xi_const: float | None = None
    L: float | None = None
    r_min: float | None = None
    M_bound: float | None = None
    c_f: float | None = None
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    reference: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["lstar"] is not None:
            d["lstar"] = list(d["lstar"])
        return d


def sampled_max(e: _expr.Expr, a: float, T: float, samples: int = SAMPLE_POINTS, var: str = "t") -> float:
    """max over ``samples`` uniform points of [a, T] (endpoints included)."""
    t = np.linspace(a, T, samples + 1)
    return float(np.max(np.asarray(_expr.evaluate(e, {var: t}), dtype=float) + np.zeros_like(t)))


def _beta_coefficient(spec: ProblemSpec, eta: float) -> float:
    return float(spec.psi.prime(eta)) if spec.mode == "corrected" else float(spec.psi(eta))


def _theta(spec: ProblemSpec, k: float) -> float:
    psi, mu, nu = spec.psi, spec.mu, spec.nu
    T = spec.T
    inner = psi.power(T, 2.0 - mu + nu) / gamma_fn(3.0 - mu + nu)
    for al, be, eta in zip(spec.alphas, spec.betas, spec.etas):
        inner += abs(al) * psi.power(eta, nu) / gamma_fn(nu + 1.0)
        inner += abs(be) * _beta_coefficient(spec, eta) * psi.power(eta, nu - 1.0) / gamma_fn(nu)
    return psi.power(T, nu) / gamma_fn(nu + 1.0) + k * inner


def _phi(spec: ProblemSpec, k: float) -> float:
    psi, mu = spec.psi, spec.mu
    inner = psi.power(spec.T, 3.0 - mu) / gamma_fn(4.0 - mu)
    for al, be, eta in zip(spec.alphas, spec.betas, spec.etas):
        inner += abs(al) * psi.power(eta, 1.0) + abs(be) * float(psi.prime(eta))
    return k * inner + psi.power(spec.T, 1.0)


def lambda_t_mu(spec: ProblemSpec, lstar, t: float) -> float:
    l1, l2, l3 = lstar
    mu = spec.mu
    return l1 + l2 + l3 * spec.psi.power(t, 2.0 - mu) / gamma_fn(3.0 - mu)


def compute_constants(spec: ProblemSpec, samples: int = SAMPLE_POINTS) -> CriteriaReport:
    """Evaluate Δ, Θ, Φ, k and, when metadata allows, Λ, Ω, Ξ, r_min, M, c_f."""
    delta = compute_delta(spec)
    mu = spec.mu
    k = spec.psi.power(spec.T, mu - 1.0) / (abs(delta) * gamma_fn(mu))
    theta = _theta(spec, k)
    phi = _phi(spec, k)
    rep = CriteriaReport(mode=spec.mode, delta=delta, theta=theta, phi=phi, k=k)
    a, T = spec.a, spec.T
    t = np.linspace(a, T, samples + 1)
    f0 = np.asarray(spec.f_at(t, 0.0, 0.0, 0.0), dtype=float) + np.zeros_like(t)
    rep.L = float(np.max(np.abs(f0)))

    lip = spec.lipschitz
    if lip is not None:
        if lip.N is not None:
            rep.N = float(lip.N)
            rep.xi_const = abs(spec.lam) * phi + k * rep.N
        if None not in (lip.l1, lip.l2, lip.l3):
            rep.lstar = tuple(sampled_max(e, a, T, samples) for e in (lip.l1, lip.l2, lip.l3))
            rep.lambda_T_mu = lambda_t_mu(spec, rep.lstar, T)
            rep.omega = rep.lambda_T_mu * theta + abs(spec.lam) * phi
            if rep.N is not None:
                rep.banach_value = rep.omega + k * rep.N
                if rep.banach_value < 1.0:
                    rep.c_f = theta / (1.0 - rep.banach_value)
                    rep.r_min = (rep.L * theta + k * rep.N * abs(a)) / (1.0 - rep.banach_value)
    if spec.bound_p is not None and rep.xi_const is not None and rep.xi_const < 1.0:
        p_norm = sampled_max(_expr.Call("abs", (spec.bound_p,)), a, T, samples)
        rep.M_bound = (theta * p_norm + abs(a) * rep.N * k) / (1.0 - rep.xi_const)
    return rep


# ---------------------------------------------------------------------------
# verdicts


def check_banach(report: CriteriaReport) -> Verdict:
    """Unique solution when Ω + kN < 1."""
    if report.banach_value is None:
        v = Verdict(False, "Lipschitz data (l1, l2, l3, N) missing; contraction constant unavailable")
    elif report.banach_value < 1.0:
        v = Verdict(
            True,
            f"contraction constant {report.banach_value:.6g} < 1: unique solution",
            {"banach_value": report.banach_value, "r_min": report.r_min},
        )
    else:
        v = Verdict(False, f"contraction constant {report.banach_value:.6g} >= 1", {"banach_value": report.banach_value})
    report.verdicts["banach"] = v
    return v


def zeta(spec: ProblemSpec, report: CriteriaReport) -> Callable[[np.ndarray], np.ndarray]:
    """ζ(r) = [(p₁*φ₁(r) + p₂*φ₂(r) + p₃*φ₃(ψ_a^{2−μ}(T) r/Γ(3−μ)))Θ + kNa]/(1 − Ξ) − r."""
    gr = spec.growth
    if gr is None:
        raise MissingMetadata("growth (p1..p3, phi1..phi3)")
    if report.xi_const is None:
        raise MissingMetadata("N")
    a, T = spec.a, spec.T
    pstar = [sampled_max(p, a, T) for p in (gr.p1, gr.p2, gr.p3)]
    scale = spec.psi.power(T, 2.0 - spec.mu) / gamma_fn(3.0 - spec.mu)
    theta, k, N, xi = report.theta, report.k, report.N, report.xi_const

    def phi(e, r):
        r = np.asarray(r, dtype=float)
        return np.asarray(_expr.evaluate(e, {"r": r}), dtype=float) + np.zeros_like(r)

    def z(r):
        r = np.asarray(r, dtype=float)
        growth = pstar[0] * phi(gr.phi1, r) + pstar[1] * phi(gr.phi2, r) + pstar[2] * phi(gr.phi3, scale * r)
        return (growth * theta + k * N * abs(a)) / (1.0 - xi) - r

    z.pstar = tuple(pstar)  # type: ignore[attr-defined]
    return z


def _bisect_root(fn, lo: float, hi: float, tol: float = 1e-8) -> float:
    flo = float(fn(lo))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = float(fn(mid))
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_sadovskii(
    spec: ProblemSpec, report: CriteriaReport, r_range: tuple[float, float] | None = None, samples: int = 512
) -> Verdict:
    """Existence when Ξ < 1 and ζ(r) < 0 somewhere on the r-range.

    ζ is sampled at ``samples`` uniform points; every sign change is refined
    by bisection to 1e−8 and the negative intervals are reported.
    """
    z = zeta(spec, report)
    r0, r1 = r_range if r_range is not None else (0.0, spec.T)
    r = np.linspace(r0, r1, samples)
    vals = z(r)
    neg = vals < 0
    intervals = []
    i = 0
    while i < len(r):
        if neg[i]:
            j = i
            while j + 1 < len(r) and neg[j + 1]:
                j += 1
            lo = r0 if i == 0 else _bisect_root(z, float(r[i - 1]), float(r[i]))
            hi = r1 if j == len(r) - 1 else _bisect_root(z, float(r[j]), float(r[j + 1]))
            intervals.append([lo, hi])
            i = j + 1
        else:
            i += 1
    xi_ok = report.xi_const < 1.0
    holds = xi_ok and bool(intervals)
    if not xi_ok:
        reason = f"Xi = {report.xi_const:.6g} >= 1"
    elif not intervals:
        reason = "zeta(r) >= 0 at every sampled r"
    else:
        reason = f"Xi = {report.xi_const:.6g} < 1 and zeta < 0 on {len(intervals)} interval(s)"
    v = Verdict(
        holds,
        reason,
        {"xi_const": report.xi_const, "negative_intervals": intervals, "pstar": list(z.pstar), "zeta_at_0": float(z(0.0))},
    )
    report.verdicts["sadovskii"] = v
    return v


def check_burton_kirk(spec: ProblemSpec, report: CriteriaReport) -> Verdict:
    """Existence when Ξ < 1 given |f| ≤ p; a priori bound M = (Θ‖p‖ + aNk)/(1 − Ξ)."""
    if spec.bound_p is None:
        raise MissingMetadata("p (uniform bound of f)")
    if report.xi_const is None:
        raise MissingMetadata("N")
    a, T = spec.a, spec.T
    t = np.linspace(a, T, SAMPLE_POINTS + 1)
    p = np.asarray(_expr.evaluate(spec.bound_p, {"t": t}), dtype=float) + np.zeros_like(t)
    bound_ok = _f_bounded_by(spec, t, p)
    xi_ok = report.xi_const < 1.0
    p_norm = float(np.max(np.abs(p)))
    M = (report.theta * p_norm + abs(a) * report.N * report.k) / (1.0 - report.xi_const) if xi_ok else None
    report.M_bound = M
    holds = xi_ok and bound_ok
    if not xi_ok:
        reason = f"Xi = {report.xi_const:.6g} >= 1"
    elif not bound_ok:
        reason = "sampled |f| exceeds p"
    else:
        reason = f"Xi = {report.xi_const:.6g} < 1; solutions bounded by M = {M:.6g}"
    v = Verdict(holds, reason, {"xi_const": report.xi_const, "p_norm": p_norm, "M_bound": M})
    report.verdicts["burton_kirk"] = v
    return v


def _f_bounded_by(spec: ProblemSpec, t: np.ndarray, p: np.ndarray, trials: int = 16, seed: int = 0) -> bool:
    """Sampled check |f(t, x₁, x₂, x₃)| ≤ p(t) on random arguments."""
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        x = rng.normal(scale=10.0, size=(3,) + t.shape)
        f = np.asarray(spec.f_at(t, x[0], x[1], x[2]), dtype=float) + np.zeros_like(t)
        if np.any(np.abs(f) > p * (1 + 1e-12) + 1e-15):
            return False
    return True


def ulam_constant(report: CriteriaReport) -> tuple[float, Callable[[float], float]]:
    """(c_f, φ_f) with c_f = Θ/(1 − (Ω + kN)) and φ_f(ε) = c_f ε."""
    q = report.banach_value
    if q is None or not q < 1.0:
        raise NotContractive(f"Ulam-Hyers constant needs a contraction constant < 1, got {q!r}")
    c_f = report.theta / (1.0 - q)

    def phi_f(eps: float) -> float:
        return c_f * eps

    v = Verdict(True, f"Ulam-Hyers stable with c_f = {c_f:.6g}", {"c_f": c_f})
    report.verdicts["ulam_hyers"] = v
    return c_f, phi_f


def compare_reference(report: CriteriaReport, reference: dict[str, float], rel_flag: float = 1e-3) -> dict:
    """Attach computed-vs-reference deltas; entries off by more than ``rel_flag`` are flagged."""
    out = {}
    for name, ref in reference.items():
        val = getattr(report, name, None)
        if val is None:
            out[name] = {"reference": ref, "computed": None, "flagged": True}
            continue
        rel = abs(val - ref) / abs(ref) if ref != 0 else abs(val - ref)
        out[name] = {
            "reference": ref,
            "computed": val,
            "abs_delta": val - ref,
            "rel_delta": rel,
            "flagged": bool(rel > rel_flag),
        }
    report.reference = out
    return out


def full_report(spec: ProblemSpec, reference: dict | None = None, r_range=None) -> CriteriaReport:
    """Constants plus every verdict whose metadata is present."""
    rep = compute_constants(spec)
    check_banach(rep)
    if rep.banach_value is not None and rep.banach_value < 1.0:
        ulam_constant(rep)
    if spec.growth is not None and rep.xi_const is not None:
        check_sadovskii(spec, rep, r_range)
    if spec.bound_p is not None and rep.xi_const is not None:
        check_burton_kirk(spec, rep)
    if reference:
        compare_reference(rep, reference)
    return rep
