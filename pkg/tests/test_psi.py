from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilfer_bvp import psi as P
from hilfer_bvp.errors import (
    InvalidProblem,
    NonPositiveArgument,
    OutOfDomain,
    OutOfRange,
    SingularAtLeftEndpoint,
)

EXP = P.exp_saturating(math.sqrt(2.0), 0.0, 7 / 6)


def test_exp_weight_values():
    assert P.psi_eval(EXP, 0.0) == 0.0
    # mpmath: 1 − e^{−7√2/6}
    assert P.psi_eval(EXP, 7 / 6) == pytest.approx(0.80793392446921634, rel=1e-14)


def test_tangent_family_value():
    p = P.tangent(2.0, 0.0, 7 / 6)
    # mpmath: tan(π√2/8)
    assert P.psi_eval(p, 0.5) == pytest.approx(0.62050492169420362, rel=1e-14)


def test_out_of_domain():
    with pytest.raises(OutOfDomain):
        P.psi_eval(EXP, 1.5)
    with pytest.raises(OutOfDomain):
        P.psi_eval(EXP, -0.1)


def test_inverse_examples():
    assert P.psi_inverse(EXP, EXP.tau_a) == pytest.approx(0.0, abs=1e-15)
    # −ln(0.5)/√2
    assert P.psi_inverse(EXP, 0.5) == pytest.approx(0.49012907173427360, rel=1e-14)
    with pytest.raises(OutOfRange):
        P.psi_inverse(EXP, 0.95)


@pytest.mark.parametrize(
    "family, param", [("linear", None), ("exp-saturating", math.sqrt(2)), ("power-exponential", 1.1), ("tangent", 2.0)]
)
def test_round_trip_random_points(family, param):
    p = P.builtin(family, 0.0, 7 / 6, param)
    t = np.random.default_rng(1).uniform(0, 7 / 6, 100)
    np.testing.assert_allclose(p.inverse(p(t)), t, atol=1e-10)
    tau = np.linspace(p.tau_a, p.tau_T, 257)
    np.testing.assert_allclose(p(p.inverse(tau)), tau, atol=1e-10 * max(1.0, abs(p.tau_T)))


def test_bisection_inverse_without_hint():
    p = P.PsiFunction.from_expr("t^3 + t", 0.0, 2.0)
    tau = np.linspace(p.tau_a, p.tau_T, 50)
    assert np.max(np.abs(p(p.inverse(tau)) - tau)) <= 1e-12 * max(1.0, p.tau_T)


def test_gamma_values_and_errors():
    assert P.gamma_fn(1.0) == 1.0
    assert P.gamma_fn(2.5) == pytest.approx(1.3293403881791370, rel=1e-13)
    assert P.gamma_fn(1.25) == pytest.approx(0.90640247705547708, rel=1e-13)
    with pytest.raises(NonPositiveArgument):
        P.gamma_fn(0.0)
    with pytest.raises(NonPositiveArgument):
        P.gamma_fn(-1.5)


@pytest.mark.parametrize("x", np.arange(0.25, 3.51, 0.25))
def test_gamma_recurrence(x):
    assert P.gamma_fn(x + 1) == pytest.approx(x * P.gamma_fn(x), rel=1e-12)


def test_psi_power():
    assert P.psi_power_eval(P.PsiPower(EXP, 1.0), 0.7) == pytest.approx(EXP(0.7))
    assert P.psi_power_eval(P.PsiPower(EXP, 0.75), 7 / 6) == pytest.approx(0.85218107078366550, rel=1e-13)
    assert P.psi_power_eval(P.PsiPower(EXP, 0.0), 0.3) == 1.0
    with pytest.raises(SingularAtLeftEndpoint):
        P.psi_power_eval(P.PsiPower(EXP, -0.5), 0.0)


def test_rejects_nonincreasing_or_flat_start():
    with pytest.raises(InvalidProblem):
        P.PsiFunction.from_expr("-t", 0.0, 1.0)
    with pytest.raises(InvalidProblem):
        P.PsiFunction.from_expr("t^2", 0.0, 1.0, psi_prime="2*t")
    with pytest.raises(InvalidProblem):
        P.PsiFunction.from_expr("t", 0.0, 1.0, inverse_hint="2*tau")


def test_numeric_derivative_when_absent():
    p = P.PsiFunction.from_expr("exp(t)", 0.0, 1.0)
    assert p.prime(0.5) == pytest.approx(math.exp(0.5), rel=1e-8)


def test_grid_is_uniform_and_cached():
    g = EXP.grid(64)
    assert g is EXP.grid(64)
    assert g.taus[0] == EXP.tau_a and g.taus[-1] == EXP.tau_T
    np.testing.assert_allclose(np.diff(g.taus), g.h, rtol=1e-12)
    np.testing.assert_allclose(EXP(g.ts), g.taus, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 7 / 6), min_size=2, max_size=30, unique=True))
def test_monotone_on_sorted_samples(ts):
    # separation above rounding level so that strict increase is representable
    ts = np.sort(np.array(ts))
    ts = ts[np.concatenate([[True], np.diff(ts) > 1e-9])]
    assert np.all(np.diff(EXP(ts)) > 0)
