"""Problem model and the fixed-point operator 𝒜 = 𝒜₁ + 𝒜₂.

The boundary value problem is

.. math::

    ({}^H D^{\\nu,\\beta;\\psi} + \\lambda\\, {}^H D^{\\nu-1,\\beta;\\psi}) u(t)
        = f(t, u(t), (\\mathcal V u)(t), I^{2-\\mu,\\psi} u(t)),

    u(a) = 0, \\qquad I^{2-\\mu,\\psi} u(T) = \\sum \\alpha_i u(\\eta_i)
        + \\sum \\beta_i u'(\\eta_i) + g(u(\\xi)).

Its solutions are the fixed points of 𝒜. With F_u the right-hand side above
and P(t) = ψ_a^{μ−1}(t) / (Δ Γ(μ)):

.. math::

    \\mathcal A_1 u = I^\\nu F_u + P\\,S_F + \\lambda\\,(P\\,S_u - I^1 u),
    \\qquad \\mathcal A_2 u = P\\, g(u(\\xi)),

    S_F = \\sum \\alpha_i I^\\nu F_u(\\eta_i) + \\sum \\beta_i c_i I^{\\nu-1} F_u(\\eta_i)
          - I^{2-\\mu+\\nu} F_u(T),

    S_u = I^{3-\\mu} u(T) - \\sum \\alpha_i I^1 u(\\eta_i) - \\sum \\beta_i \\psi'(\\eta_i) u(\\eta_i).

In ``"paper-faithful"`` mode c_i = ψ(η_i), and Δ carries β_i unweighted. In
``"corrected"`` mode the true chain rule is used: c_i = ψ′(η_i) and Δ
carries β_i ψ′(η_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import expr as _expr
from .errors import DegenerateDelta, InvalidProblem
from .fraccalc import (
    FracOrder,
    GridFunction,
    integrate_nodes,
    interp_weights,
    point_weights,
)
from .psi import PsiFunction, gamma_fn

__all__ = [
    "MODES",
    "VOperator",
    "Lipschitz",
    "Growth",
    "ProblemSpec",
    "Kernel",
    "compute_delta",
    "eval_Fu",
    "apply_operator",
    "apply_split",
    "operator_at",
    "F_values",
]

MODES = ("paper-faithful", "corrected")
# long spelling accepted on input and normalised to "corrected"
MODE_ALIASES = {"corrected-derivative": "corrected"}
DELTA_FLOOR = 1e-12
_F_VARS = frozenset({"t", "u", "v", "w"})


def _as_expr(src, variables: frozenset[str], params: Mapping[str, float] | None = None) -> _expr.Expr:
    params = dict(params or {})
    e = _expr.parse(src, variables=variables | set(params)) if isinstance(src, str) else src
    e = _expr.substitute(e, params)
    extra = _expr.free_variables(e) - variables
    if extra:
        raise InvalidProblem(f"expression {_expr.to_source(e)!r} uses unexpected variables {sorted(extra)}")
    return e


# ---------------------------------------------------------------------------
# the operator V


@dataclass(frozen=True)
class VOperator:
    """The map u ↦ 𝒱u inside f.

    ``kind`` is ``"identity"``, ``"time-warp"`` (𝒱u(t) = u(warp(t))) or
    ``"custom"`` (``hook`` maps a :class:`GridFunction` to node values).
    """

    kind: str = "identity"
    warp: _expr.Expr | None = None
    hook: Callable[[GridFunction], np.ndarray] | None = None

    @classmethod
    def time_warp(cls, warp: str | _expr.Expr, params: Mapping[str, float] | None = None) -> "VOperator":
        return cls("time-warp", _as_expr(warp, frozenset({"t"}), params))

    def __post_init__(self):
        if self.kind not in ("identity", "time-warp", "custom"):
            raise InvalidProblem(f"unknown V kind {self.kind!r}")
        if self.kind == "time-warp" and self.warp is None:
            raise InvalidProblem("time-warp V needs a warp expression")
        if self.kind == "custom" and self.hook is None:
            raise InvalidProblem("custom V needs a hook")

    def warp_points(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(_expr.evaluate(self.warp, {"t": t}), dtype=float) + np.zeros(np.shape(t))

    def source(self) -> str | None:
        return _expr.to_source(self.warp) if self.warp is not None else None

    def validate(self, psi: PsiFunction, n: int = 256, trials: int = 8, seed: int = 0) -> None:
        """Sampled checks: range inside [a, T], ‖𝒱u‖ ≤ ‖u‖, nonexpansive."""
        if self.kind == "time-warp":
            s = self.warp_points(psi.grid(n).ts)
            slack = 1e-12 * (psi.T - psi.a)
            if np.any(s < psi.a - slack) or np.any(s > psi.T + slack):
                raise InvalidProblem("time-warp maps outside [a, T]")
        if self.kind == "identity":
            return
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            u = GridFunction(psi, n, rng.uniform(-1, 1, n + 1))
            v = GridFunction(psi, n, rng.uniform(-1, 1, n + 1))
            vu, vv = self.apply(u), self.apply(v)
            if np.max(np.abs(vu)) > u.sup_norm() * (1 + 1e-12) + 1e-15:
                raise InvalidProblem("V is not norm-bounded by 1 on the sample")
            if np.max(np.abs(vu - vv)) > np.max(np.abs(u.values - v.values)) * (1 + 1e-12) + 1e-15:
                raise InvalidProblem("V is not nonexpansive on the sample")

    def apply(self, u: GridFunction) -> np.ndarray:
        """Node values of 𝒱u."""
        if self.kind == "identity":
            return u.values
        if self.kind == "time-warp":
            return u(self.warp_points(u.ts))
        return np.asarray(self.hook(u), dtype=float)

    def apply_at(self, u: GridFunction, t: float) -> float:
        if self.kind == "identity":
            return u(t)
        if self.kind == "time-warp":
            return float(u(float(self.warp_points(np.asarray(t)))))
        vals = self.apply(u)
        return GridFunction(u.psi, u.n, vals)(t)


# ---------------------------------------------------------------------------
# metadata


@dataclass(frozen=True)
class Lipschitz:
    """Lipschitz data: |f(t,x)−f(t,y)| ≤ Σ lᵢ(t)|xᵢ−yᵢ| and |g(x)−g(y)| ≤ N|x−y|.

    Any of the parts may be ``None``; quantities needing them are then absent.
    """

    l1: _expr.Expr | None = None
    l2: _expr.Expr | None = None
    l3: _expr.Expr | None = None
    N: float | None = None


@dataclass(frozen=True)
class Growth:
    """Growth data |f(t,x)| ≤ Σ pᵢ(t) φᵢ(|xᵢ|) with nondecreasing φᵢ."""

    p1: _expr.Expr
    p2: _expr.Expr
    p3: _expr.Expr
    phi1: _expr.Expr
    phi2: _expr.Expr
    phi3: _expr.Expr


@dataclass(frozen=True)
class Kernel:
    """𝒦_t^ν(s) = ψ′(s)(ψ(t) − ψ(s))^{ν−1} / Γ(ν)."""

    psi: PsiFunction
    order: float

    def __call__(self, t: float, s):
        s = np.asarray(s, dtype=float)
        d = np.maximum(self.psi(t) - np.asarray(self.psi(s)), 0.0)
        with np.errstate(divide="ignore"):
            out = self.psi.prime(s) * d ** (self.order - 1.0) / gamma_fn(self.order)
        return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# the problem


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """All data of one boundary value problem.

    ``f`` is an expression in ``t, u, v, w`` (v = 𝒱u(t), w = I^{2−μ}u(t)),
    ``g`` an expression in ``u``.
    """

    order: FracOrder
    lam: float
    psi: PsiFunction
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    etas: tuple[float, ...]
    xi: float
    f: _expr.Expr
    g: _expr.Expr
    V: VOperator = field(default_factory=VOperator)
    lipschitz: Lipschitz | None = None
    growth: Growth | None = None
    bound_p: _expr.Expr | None = None
    mode: str = "paper-faithful"
    require_g_zero_at_a: bool = True
    name: str = "problem"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("alphas", "betas", "etas"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "mode", MODE_ALIASES.get(self.mode, self.mode))
        if self.mode not in MODES:
            raise InvalidProblem(f"mode must be one of {MODES}, got {self.mode!r}")
        m = len(self.etas)
        if len(self.alphas) != m or len(self.betas) != m:
            raise InvalidProblem("alphas, betas and etas must have equal length")
        a, T = self.psi.a, self.psi.T
        pts = (a, *self.etas, self.xi, T)
        if not all(x < y for x, y in zip(pts, pts[1:])):
            raise InvalidProblem("need a < eta_1 < ... < eta_m < xi < T")
        if not all(math.isfinite(x) for x in (*self.alphas, *self.betas, self.lam)):
            raise InvalidProblem("coefficients must be finite")
        if not _expr.free_variables(self.f) <= _F_VARS:
            raise InvalidProblem(f"f may only use variables {sorted(_F_VARS)}")
        if not _expr.free_variables(self.g) <= {"u"}:
            raise InvalidProblem("g may only use the variable u")
        if self.require_g_zero_at_a:
            g_a = _expr.evaluate(self.g, {"u": a})
            if abs(g_a) > 1e-14:
                raise InvalidProblem(f"g(a) must vanish, got g({a})={g_a!r}")
        compute_delta(self)

    # -- convenience ------------------------------------------------------

    @property
    def mu(self) -> float:
        return self.order.mu

    @property
    def nu(self) -> float:
        return self.order.nu

    @property
    def a(self) -> float:
        return self.psi.a

    @property
    def singular_exponents(self) -> tuple[float, float, float]:
        """Exponents of the non-smooth terms ψ_a^σ that solutions carry near t = a."""
        return (self.mu - 1.0, self.nu, self.mu)

    @property
    def T(self) -> float:
        return self.psi.T

    def beta_coefficients(self) -> np.ndarray:
        """c_i multiplying β_i I^{ν−1}F(η_i): ψ(η_i) or ψ′(η_i) by mode."""
        etas = np.array(self.etas)
        if self.mode == "corrected":
            return np.atleast_1d(self.psi.prime(etas))
        return np.atleast_1d(self.psi(etas))

    def prefactor_scale(self) -> float:
        """1 / (Δ Γ(μ))."""
        return 1.0 / (compute_delta(self) * gamma_fn(self.mu))

    def f_at(self, t, u, v, w):
        return _expr.evaluate(self.f, {"t": t, "u": u, "v": v, "w": w})

    def g_at(self, x):
        return _expr.evaluate(self.g, {"u": x})

    def discretization(self, n: int) -> "Discretization":
        d = self._cache.get(n)
        if d is None:
            d = Discretization(self, n)
            self._cache[n] = d
        return d


def compute_delta(spec: ProblemSpec) -> float:
    """Δ = ψ_a(T) − Σ ψ_a^{μ−2}(η_i)/Γ(μ−1) (α_i ψ_a(η_i)/(μ−1) + β_i c_i).

    c_i = 1 in paper-faithful mode and ψ′(η_i) in corrected mode.
    """
    mu = spec.mu
    psi = spec.psi
    total = psi.power(spec.T, 1.0)
    for al, be, eta in zip(spec.alphas, spec.betas, spec.etas):
        c = float(psi.prime(eta)) if spec.mode == "corrected" else 1.0
        total -= psi.power(eta, mu - 2.0) / gamma_fn(mu - 1.0) * (al * psi.power(eta, 1.0) / (mu - 1.0) + be * c)
    if not abs(total) > DELTA_FLOOR:
        raise DegenerateDelta(total)
    return float(total)


# ---------------------------------------------------------------------------
# discretisation


class Discretization:
    """Precomputed weights for applying 𝒜 on an ``n``-cell τ-grid."""

    def __init__(self, spec: ProblemSpec, n: int):
        self.spec = spec
        self.n = n
        psi = spec.psi
        self.grid = psi.grid(n)
        spec.V.validate(psi, min(n, 256))
        nu, mu = spec.nu, spec.mu
        self.sigmas = sig = spec.singular_exponents
        self.P = psi.power(self.grid.ts, mu - 1.0) * spec.prefactor_scale()
        self.P[0] = 0.0
        etas = list(spec.etas)
        # rows: I^ν at η_i, I^{ν−1} at η_i, I^1 at η_i, interpolation at η_i
        self.W_nu_eta = np.array([point_weights(psi, n, nu, e, sig) for e in etas]).reshape(len(etas), n + 1)
        self.W_num1_eta = np.array([point_weights(psi, n, nu - 1.0, e, sig) for e in etas]).reshape(len(etas), n + 1)
        self.W_1_eta = np.array([point_weights(psi, n, 1.0, e, sig) for e in etas]).reshape(len(etas), n + 1)
        self.E_eta = np.array([_interp_row(psi, n, e) for e in etas]).reshape(len(etas), n + 1)
        self.E_xi = _interp_row(psi, n, spec.xi)
        self.W_T_F = point_weights(psi, n, 2.0 - mu + nu, spec.T, sig)
        self.W_T_u = point_weights(psi, n, 3.0 - mu, spec.T, sig)
        self.alphas = np.array(spec.alphas)
        self.betas = np.array(spec.betas)
        self.c_beta = spec.beta_coefficients() if etas else np.zeros(0)
        self.dpsi_eta = np.atleast_1d(psi.prime(np.array(etas))) if etas else np.zeros(0)
        if spec.V.kind == "time-warp":
            j, theta = interp_weights(psi, n, spec.V.warp_points(self.grid.ts))
            self.V_j, self.V_theta = j, theta

    # -- pieces -----------------------------------------------------------

    def V_values(self, u: GridFunction) -> np.ndarray:
        if self.spec.V.kind == "time-warp":
            v = u.values
            return (1.0 - self.V_theta) * v[self.V_j] + self.V_theta * v[self.V_j + 1]
        return self.spec.V.apply(u)

    def F_values(self, u: GridFunction, forcing: np.ndarray | None = None) -> np.ndarray:
        spec = self.spec
        w = integrate_nodes(u.values, self.grid.h, 2.0 - spec.mu, self.sigmas)
        F = np.asarray(spec.f_at(self.grid.ts, u.values, self.V_values(u), w), dtype=float) + np.zeros(self.n + 1)
        if forcing is not None:
            F = F + forcing
        return F

    def split(self, u: GridFunction, forcing: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        spec = self.spec
        F = self.F_values(u, forcing)
        IF = integrate_nodes(F, self.grid.h, spec.nu, self.sigmas)
        S_F = self.boundary_sum_F(F)
        A1 = IF + self.P * S_F
        if spec.lam != 0.0:
            Iu = integrate_nodes(u.values, self.grid.h, 1.0, self.sigmas)
            A1 = A1 + spec.lam * (self.P * self.boundary_sum_u(u.values) - Iu)
        A2 = self.P * float(spec.g_at(float(self.E_xi @ u.values)))
        A1[0] = 0.0
        return A1, A2

    def boundary_sum_F(self, F: np.ndarray) -> float:
        return float(
            self.alphas @ (self.W_nu_eta @ F) + (self.betas * self.c_beta) @ (self.W_num1_eta @ F) - self.W_T_F @ F
        )

    def boundary_sum_u(self, v: np.ndarray) -> float:
        return float(self.W_T_u @ v - self.alphas @ (self.W_1_eta @ v) - (self.betas * self.dpsi_eta) @ (self.E_eta @ v))


def _interp_row(psi: PsiFunction, n: int, t: float) -> np.ndarray:
    """Cubic Lagrange interpolation in τ through the 4 nearest nodes.

    Point values u(ηᵢ), u(ξ) sit in the interior where u is smooth, so the
    higher order pays off; linear interpolation is used when n < 3.
    """
    j, theta = interp_weights(psi, n, t)
    j, theta = int(j), float(theta)
    row = np.zeros(n + 1)
    if n < 3:
        row[j] += 1.0 - theta
        row[j + 1] += theta
        return row
    lo = min(max(j - 1, 0), n - 3)
    x = j + theta - lo
    nodes = np.arange(4, dtype=float)
    for k in range(4):
        others = np.delete(nodes, k)
        row[lo + k] = np.prod((x - others) / (nodes[k] - others))
    return row


# ---------------------------------------------------------------------------
# public operations


def _check_grid(spec: ProblemSpec, u: GridFunction) -> None:
    if u.psi is not spec.psi:
        raise InvalidProblem("grid function lives on a different psi")


def F_values(spec: ProblemSpec, u: GridFunction, forcing=None) -> np.ndarray:
    """F_u at every grid node."""
    _check_grid(spec, u)
    return spec.discretization(u.n).F_values(u, _forcing_values(forcing, u))


def eval_Fu(spec: ProblemSpec, u: GridFunction, t: float) -> float:
    """F_u(t) = f(t, u(t), 𝒱u(t), I^{2−μ}u(t)) at a single point."""
    _check_grid(spec, u)
    w = float(point_weights(spec.psi, u.n, 2.0 - spec.mu, t, spec.singular_exponents) @ u.values)
    return float(spec.f_at(float(t), u(t), spec.V.apply_at(u, t), w))


def apply_split(spec: ProblemSpec, u: GridFunction, forcing=None) -> tuple[GridFunction, GridFunction]:
    """(𝒜₁u, 𝒜₂u) on the grid of ``u``."""
    _check_grid(spec, u)
    A1, A2 = spec.discretization(u.n).split(u, _forcing_values(forcing, u))
    return u.with_values(A1), u.with_values(A2)


def apply_operator(spec: ProblemSpec, u: GridFunction, forcing=None) -> GridFunction:
    """𝒜u = 𝒜₁u + 𝒜₂u.

    ``forcing`` (node values, a :class:`GridFunction` or a callable of t) is
    added to F_u; it models the perturbed equation used for stability tests.
    """
    _check_grid(spec, u)
    A1, A2 = spec.discretization(u.n).split(u, _forcing_values(forcing, u))
    return u.with_values(A1 + A2)


def operator_at(spec: ProblemSpec, u: GridFunction, t, forcing=None):
    """(𝒜u)(t) at arbitrary points, with the integrand interpolated in τ."""
    _check_grid(spec, u)
    disc = spec.discretization(u.n)
    fv = _forcing_values(forcing, u)
    F = disc.F_values(u, fv)
    S_F = disc.boundary_sum_F(F)
    S_u = disc.boundary_sum_u(u.values)
    g = float(spec.g_at(float(disc.E_xi @ u.values)))
    scale = spec.prefactor_scale()
    sig = spec.singular_exponents

    def one(x: float) -> float:
        P = spec.psi.power(x, spec.mu - 1.0) * scale
        val = float(point_weights(spec.psi, u.n, spec.nu, x, sig) @ F) + P * (S_F + g)
        if spec.lam != 0.0:
            val += spec.lam * (P * S_u - float(point_weights(spec.psi, u.n, 1.0, x, sig) @ u.values))
        return val

    if np.ndim(t) == 0:
        return one(float(t))
    return np.array([one(float(x)) for x in np.ravel(t)]).reshape(np.shape(t))


def _forcing_values(forcing, u: GridFunction):
    if forcing is None:
        return None
    if isinstance(forcing, GridFunction):
        return forcing.values
    if callable(forcing):
        return np.asarray(forcing(u.ts), dtype=float) + np.zeros(u.n + 1)
    arr = np.asarray(forcing, dtype=float)
    return arr + np.zeros(u.n + 1)

