"""Weight functions ψ, the Gamma function and ψ-powers.

A weight function is an increasing C¹ map ψ: [a, T] → ℝ with ψ′ > 0. All
quadrature in the toolkit runs in the variable τ = ψ(t), so every
:class:`PsiFunction` also carries an inverse and a cached uniform τ-grid.

The ψ-power with exponent ς is

.. math::

    \\psi_a^{\\varsigma}(t) = (\\psi(t) - \\psi(a))^{\\varsigma}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import expr as _expr
from .errors import (
    InvalidProblem,
    NonPositiveArgument,
    OutOfDomain,
    OutOfRange,
    SingularAtLeftEndpoint,
)

__all__ = [
    "gamma_fn",
    "PsiFunction",
    "PsiGrid",
    "PsiPower",
    "psi_eval",
    "psi_inverse",
    "psi_power_eval",
    "BUILTIN_FAMILIES",
    "builtin",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]

#: number of points of the construction-time validation sample
VALIDATION_SAMPLES = 4001


def gamma_fn(x: float) -> float:
    """Euler's Γ for positive real arguments.

    Delegates to :func:`math.gamma` (Lanczos-type, a few ulp on (0, 4]).
    """
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise NonPositiveArgument(x)
    return math.gamma(x)


@dataclass(frozen=True)
class PsiGrid:
    """Uniform grid in τ with ``n + 1`` nodes and the matching t-values."""

    taus: np.ndarray
    ts: np.ndarray
    h: float

    @property
    def n(self) -> int:
        return len(self.taus) - 1


def _wrap_expr(e: _expr.Expr, var: str) -> ArrayFn:
    def fn(x):
        return np.asarray(_expr.evaluate(e, {var: x}), dtype=float) + np.zeros(np.shape(x))

    return fn


@dataclass(frozen=True, eq=False)
class PsiFunction:
    """An increasing weight function on ``[a, T]``.

    ``psi``, ``psi_prime`` and ``inverse_hint`` are vectorised callables.
    When ``psi_prime`` is ``None`` a central difference with step
    ``1e-6 (T - a)`` is used; without ``inverse_hint`` the inverse is found
    by bisection. Validation happens at construction.
    """

    psi: ArrayFn
    psi_prime: ArrayFn | None
    a: float
    T: float
    inverse_hint: ArrayFn | None = None
    label: str = "psi"
    sources: Mapping[str, str] = field(default_factory=dict)
    _grids: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        a, T = float(self.a), float(self.T)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "T", T)
        if not (math.isfinite(a) and math.isfinite(T) and a < T):
            raise InvalidProblem(f"interval [{a}, {T}] is empty or not finite")
        self._validate()

    # -- construction helpers -------------------------------------------

    @classmethod
    def from_expr(
        cls,
        psi: str | _expr.Expr,
        a: float,
        T: float,
        psi_prime: str | _expr.Expr | None = None,
        inverse_hint: str | _expr.Expr | None = None,
        params: Mapping[str, float] | None = None,
        label: str = "psi",
    ) -> "PsiFunction":
        """Build from expression strings in ``t`` (and ``tau`` for the inverse).

        ``params`` are substituted as literals before evaluation.
        """
        params = dict(params or {})

        def prep(src, var):
            names = {var, *params}
            e = _expr.parse(src, variables=names) if isinstance(src, str) else src
            return _expr.substitute(e, params)

        sources = {}
        e_psi = prep(psi, "t")
        sources["psi"] = _expr.to_source(e_psi)
        d = inv = None
        if psi_prime is not None:
            e_d = prep(psi_prime, "t")
            sources["psi_prime"] = _expr.to_source(e_d)
            d = _wrap_expr(e_d, "t")
        if inverse_hint is not None:
            e_inv = prep(inverse_hint, "tau")
            sources["inverse_hint"] = _expr.to_source(e_inv)
            inv = _wrap_expr(e_inv, "tau")
        return cls(_wrap_expr(e_psi, "t"), d, a, T, inv, label, sources)

    # -- validation -------------------------------------------------------

    def _validate(self) -> None:
        t = np.linspace(self.a, self.T, VALIDATION_SAMPLES)
        try:
            y = self.psi(t)
            dy = self.prime(t)
        except Exception as exc:  # DomainError from expressions, overflow, ...
            raise InvalidProblem(f"{self.label} cannot be evaluated on [a, T]: {exc}") from exc
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(dy))):
            raise InvalidProblem(f"{self.label} is not finite on [a, T]")
        if not np.all(dy > 0):
            bad = float(t[np.argmax(~(dy > 0))])
            raise InvalidProblem(f"{self.label}' must be positive on [a, T]; fails at t={bad!r}")
        if not np.all(np.diff(y) > 0):
            raise InvalidProblem(f"{self.label} is not strictly increasing on [a, T]")
        if self.inverse_hint is not None:
            back = self.inverse_hint(y)
            if not np.all(np.abs(self.psi(back) - y) <= 1e-10 * max(1.0, float(np.max(np.abs(y))))):
                raise InvalidProblem(f"inverse hint of {self.label} does not invert it")

    # -- evaluation -------------------------------------------------------

    @property
    def tau_a(self) -> float:
        return float(self.psi(np.asarray(self.a)))

    @property
    def tau_T(self) -> float:
        return float(self.psi(np.asarray(self.T)))

    def _check_t(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        slack = 1e-12 * (self.T - self.a)
        if np.any(t < self.a - slack) or np.any(t > self.T + slack):
            bad = t[(t < self.a - slack) | (t > self.T + slack)]
            raise OutOfDomain(float(np.ravel(bad)[0]), self.a, self.T)
        return np.clip(t, self.a, self.T)

    def __call__(self, t):
        t = self._check_t(t)
        return _scalar_or_array(self.psi(t))

    def prime(self, t):
        t = np.asarray(t, dtype=float)
        if self.psi_prime is not None:
            return _scalar_or_array(self.psi_prime(t))
        h = 1e-6 * (self.T - self.a)
        lo = np.maximum(t - h, self.a)
        hi = np.minimum(t + h, self.T)
        return _scalar_or_array((self.psi(hi) - self.psi(lo)) / (hi - lo))

    def inverse(self, tau):
        """The unique t in [a, T] with ψ(t) = τ."""
        tau = np.asarray(tau, dtype=float)
        ta, tT = self.tau_a, self.tau_T
        slack = 1e-12 * max(1.0, abs(tT))
        if np.any(tau < ta - slack) or np.any(tau > tT + slack):
            bad = tau[(tau < ta - slack) | (tau > tT + slack)]
            raise OutOfRange(float(np.ravel(bad)[0]), ta, tT)
        tau = np.clip(tau, ta, tT)
        if self.inverse_hint is not None:
            t = np.clip(self.inverse_hint(tau), self.a, self.T)
        else:
            t = self._bisect(tau)
        t = np.where(tau == ta, self.a, np.where(tau == tT, self.T, t))
        return _scalar_or_array(t)

    def _bisect(self, tau: np.ndarray) -> np.ndarray:
        lo = np.full(tau.shape, self.a)
        hi = np.full(tau.shape, self.T)
        # Bisect down to a couple of ulp in t; this is well inside the
        # 1e-12 max(1, |psi(T)|) residual target and costs ~55 sweeps.
        width = 4e-16 * max(1.0, abs(self.a), abs(self.T))
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self.psi(mid) < tau
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= width):
                break
        return 0.5 * (lo + hi)

    def power(self, t, exponent: float):
        """ψ_a^ς(t) = (ψ(t) − ψ(a))^ς."""
        d = np.maximum(np.asarray(self(t), dtype=float) - self.tau_a, 0.0)
        return _scalar_or_array(_offset_power(d, exponent))

    def grid(self, n: int) -> PsiGrid:
        """Uniform τ-grid with ``n + 1`` nodes (cached per ``n``)."""
        n = int(n)
        if n < 1:
            raise ValueError("grid needs at least one interval")
        g = self._grids.get(n)
        if g is None:
            taus = np.linspace(self.tau_a, self.tau_T, n + 1)
            ts = np.asarray(self.inverse(taus), dtype=float)
            g = PsiGrid(taus, ts, (self.tau_T - self.tau_a) / n)
            self._grids[n] = g
        return g


def _scalar_or_array(x):
    arr = np.asarray(x, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _offset_power(d, exponent: float):
    d = np.asarray(d, dtype=float)
    if exponent == 0:
        return np.ones_like(d)
    if exponent < 0 and np.any(d <= 0):
        raise SingularAtLeftEndpoint(exponent)
    with np.errstate(divide="ignore"):
        return np.power(d, exponent)


@dataclass(frozen=True)
class PsiPower:
    """The function t ↦ ψ_a^ς(t).

    ``at_offset`` evaluates it directly in d = ψ(t) − ψ(a), which the
    quadrature uses to avoid a round trip through ψ⁻¹.
    """

    base: PsiFunction
    exponent: float

    def __call__(self, t):
        return psi_power_eval(self, t)

    def at_offset(self, d):
        return _scalar_or_array(_offset_power(np.maximum(d, 0.0), self.exponent))


def psi_eval(p: PsiFunction, t):
    return p(t)


def psi_inverse(p: PsiFunction, tau):
    return p.inverse(tau)


def psi_power_eval(q: PsiPower, t):
    return q.base.power(t, q.exponent)


# ---------------------------------------------------------------------------
# built-in families


def linear(a: float = 0.0, T: float = 1.0) -> PsiFunction:
    """ψ(t) = t."""
    return PsiFunction.from_expr("t", a, T, psi_prime="1", inverse_hint="tau", label="linear")


def exp_saturating(c: float = math.sqrt(2.0), a: float = 0.0, T: float = 1.0) -> PsiFunction:
    """ψ(t) = 1 − exp(−c t), c > 0."""
    if not c > 0:
        raise InvalidProblem("exp-saturating family needs c > 0")

    def inv(tau):
        return -np.log1p(-tau) / c

    p = PsiFunction.from_expr("1 - exp(-t*c)", a, T, psi_prime="c*exp(-t*c)", params={"c": c}, label="exp-saturating")
    return PsiFunction(p.psi, p.psi_prime, a, T, inv, p.label, p.sources)


def power_exponential(rho: float, a: float = 0.0, T: float = 1.0) -> PsiFunction:
    """ψ(t) = 3^(t^ρ + 2t) − 1; the inverse is found by bisection."""
    return PsiFunction.from_expr(
        "3^(t^r + 2*t) - 1",
        a,
        T,
        psi_prime="ln(3)*(r*t^(r - 1) + 2)*3^(t^r + 2*t)",
        params={"r": rho},
        label="power-exponential",
    )


def tangent(rho: float, a: float = 0.0, T: float = 1.0) -> PsiFunction:
    """ψ(t) = tan(π t √ρ / 4)."""
    k = math.pi * math.sqrt(rho) / 4.0

    def inv(tau):
        return np.arctan(tau) / k

    p = PsiFunction.from_expr(
        "tan(pi*t*sqrt(r)/4)", a, T, psi_prime="pi*sqrt(r)/4/cos(pi*t*sqrt(r)/4)^2", params={"r": rho}, label="tangent"
    )
    return PsiFunction(p.psi, p.psi_prime, a, T, inv, p.label, p.sources)


BUILTIN_FAMILIES: dict[str, Callable[..., PsiFunction]] = {
    "linear": linear,
    "exp-saturating": exp_saturating,
    "power-exponential": power_exponential,
    "tangent": tangent,
}


def builtin(name: str, a: float, T: float, param: float | None = None) -> PsiFunction:
    """Instantiate a registered family by name."""
    try:
        factory = BUILTIN_FAMILIES[name]
    except KeyError:
        raise InvalidProblem(f"unknown psi family {name!r}; known: {sorted(BUILTIN_FAMILIES)}") from None
    if name == "linear":
        return factory(a, T)
    if param is None:
        raise InvalidProblem(f"psi family {name!r} needs a parameter")
    return factory(param, a, T)
