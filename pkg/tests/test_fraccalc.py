from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilfer_bvp import psi as P
from hilfer_bvp.errors import InvalidOrder, InvalidProblem, OutOfDomain, StencilOutOfDomain
from hilfer_bvp.fraccalc import (
    FracOrder,
    GridFunction,
    frac_integral,
    frac_integral_grid,
    frac_integral_nodes,
    hilfer_derivative,
    integrate_nodes,
    point_weights,
)

from . import oracles

LIN = P.linear(0.0, 1.0)
EXP = P.exp_saturating(math.sqrt(2.0), 0.0, 7 / 6)
# Γ(3/2)/Γ(7/4) ψ_a^{3/4}(7/6), mpmath
QUARTER_OF_SQRT = float(oracles.rl_power(0.25, 1.5, oracles.psi_exp(oracles.T_END)))


def test_fracorder_mu_and_validation():
    assert FracOrder(1.5, 0.5).mu == 1.75
    assert FracOrder(2.0, 0.0).mu == 2.0
    for nu, beta in ((1.0, 0.5), (2.5, 0.0), (1.5, 1.0), (1.5, -0.1)):
        with pytest.raises(InvalidProblem):
            FracOrder(nu, beta)


def test_zero_integrand_and_left_endpoint():
    assert frac_integral(EXP, 0.5, lambda t: 0.0 * t, 0.9) == 0.0
    assert frac_integral(EXP, 0.5, np.cos, 0.0) == 0.0
    u = GridFunction.zeros(EXP, 64)
    assert frac_integral_grid(u, 0.3, 1.0) == 0.0


def test_invalid_order_and_domain():
    with pytest.raises(InvalidOrder):
        frac_integral(EXP, 0.0, np.cos, 0.5)
    with pytest.raises(OutOfDomain):
        frac_integral(EXP, 0.5, np.cos, 2.0)


def test_identity_weight_power_example():
    # Γ(2)/Γ(5/2)
    val = frac_integral(LIN, 0.5, lambda s: s, 1.0)
    assert val == pytest.approx(0.75225277806367505, rel=1e-7)


def test_exponential_weight_power_example():
    val = frac_integral(EXP, 0.25, P.PsiPower(EXP, 0.5), 7 / 6)
    assert val == pytest.approx(QUARTER_OF_SQRT, rel=1e-7)
    assert QUARTER_OF_SQRT == pytest.approx(0.82173, rel=1e-5)


def test_grid_integral_matches_callable_example():
    u = GridFunction.from_callable(EXP, 1024, P.PsiPower(EXP, 0.5))
    assert abs(frac_integral_grid(u, 0.25, 7 / 6) - QUARTER_OF_SQRT) <= 1e-5
    assert abs(frac_integral_nodes(u, 0.25)[-1] - QUARTER_OF_SQRT) <= 1e-5


def test_unit_order_is_trapezoid_rule():
    u = GridFunction.from_callable(EXP, 512, np.cos)
    trap = np.concatenate([[0.0], np.cumsum(0.5 * (u.values[1:] + u.values[:-1]) * u.h)])
    np.testing.assert_allclose(frac_integral_nodes(u, 1.0), trap, atol=1e-12)


def test_quadrature_against_mpmath_defining_integral():
    f_np = lambda t: np.exp(-t) * np.sin(3 * t) + 1
    f_mp = lambda t: mp.exp(-t) * mp.sin(3 * t) + 1
    for alpha in (0.3, 1.7):
        ref = float(oracles.rl_quad(oracles.psi_exp, oracles.dpsi_exp, alpha, f_mp, mp.mpf(1)))
        assert frac_integral(EXP, alpha, f_np, 1.0) == pytest.approx(ref, rel=1e-6)


def test_point_weights_reproduce_node_integrals():
    u = GridFunction.from_callable(EXP, 128, np.exp)
    nodes = frac_integral_nodes(u, 0.6)
    for j in (0, 1, 17, 128):
        w = point_weights(EXP, 128, 0.6, float(u.ts[j]))
        assert float(w @ u.values) == pytest.approx(nodes[j], rel=1e-11, abs=1e-14)


def test_starting_weights_make_singular_powers_exact():
    n, h = 256, EXP.grid(256).h
    d = EXP.grid(256).taus - EXP.tau_a
    for sigma, alpha in ((0.75, 0.25), (1.5, 0.5), (0.5, 1.25)):
        exact = math.gamma(sigma + 1) / math.gamma(sigma + 1 + alpha) * d ** (sigma + alpha)
        got = integrate_nodes(d**sigma, h, alpha, singular=(sigma,))
        np.testing.assert_allclose(got, exact, rtol=1e-12, atol=1e-14)


def test_convergence_order_about_two():
    f = P.PsiPower(EXP, 2.0)  # υ = 3
    exact = math.gamma(3) / math.gamma(3.75) * (EXP.tau_T - EXP.tau_a) ** 2.75
    e1 = abs(frac_integral(EXP, 0.75, f, 7 / 6, n=256, grading=1.0) - exact)
    e2 = abs(frac_integral(EXP, 0.75, f, 7 / 6, n=512, grading=1.0) - exact)
    assert e1 / e2 >= 3.5


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-3, 3),
    st.floats(-3, 3),
    st.floats(0.1, 2.0),
    st.floats(0.05, 7 / 6),
)
def test_linearity(c1, c2, alpha, t):
    f1, f2 = np.cos, lambda s: s**2
    lhs = frac_integral(EXP, alpha, lambda s: c1 * f1(s) + c2 * f2(s), t, n=256)
    rhs = c1 * frac_integral(EXP, alpha, f1, t, n=256) + c2 * frac_integral(EXP, alpha, f2, t, n=256)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.01, 7 / 6), st.floats(0.0, 5.0))
def test_positivity(alpha, t, shift):
    assert frac_integral(EXP, alpha, lambda s: np.sin(5 * s) ** 2 + shift, t, n=128) >= 0.0


def test_grid_function_invariants():
    g = EXP.grid(32)
    assert np.all(np.diff(g.taus) > 0)
    with pytest.raises(ValueError):
        GridFunction(EXP, 32, np.full(33, np.nan))
    with pytest.raises(ValueError):
        GridFunction(EXP, 32, np.zeros(10))
    u = GridFunction.from_callable(EXP, 32, lambda t: 2 * t)
    with pytest.raises(ValueError):
        u.values[0] = 1.0


# -- Hilfer derivative --------------------------------------------------------


def test_hilfer_of_power_identity_weight():
    # Γ(3)/Γ(3/2) for υ = 3, ν = 3/2, β = 1/2, t = 1
    val = hilfer_derivative(LIN, 1.5, 0.5, P.PsiPower(LIN, 2.0), 1.0)
    assert val == pytest.approx(2.2567583341910251, rel=1e-6)


def test_hilfer_of_zero():
    assert hilfer_derivative(EXP, 1.5, 0.5, lambda t: 0.0 * t, 0.7) == 0.0


@pytest.mark.parametrize("k", [1, 2])
def test_hilfer_annihilates_kernel_powers(k):
    mu = FracOrder(1.5, 0.5).mu
    for t in np.linspace(0.1, 7 / 6, 5):
        assert abs(hilfer_derivative(EXP, 1.5, 0.5, P.PsiPower(EXP, mu - k), float(t))) <= 1e-4


def test_hilfer_callable_path():
    # ψ = t, f = t² : D^{3/2,1/2} t² = Γ(3)/Γ(3/2) t^{1/2}
    val = hilfer_derivative(LIN, 1.5, 0.5, lambda t: t**2, 0.5)
    assert val == pytest.approx(2.2567583341910251 * math.sqrt(0.5), rel=1e-5)


def test_hilfer_stencil_out_of_domain():
    with pytest.raises(StencilOutOfDomain):
        hilfer_derivative(EXP, 1.5, 0.5, np.cos, 0.0)
