from __future__ import annotations

import dataclasses
import json

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilfer_bvp import expr as E
from hilfer_bvp.bvp import Growth, Lipschitz
from hilfer_bvp.criteria import (
    check_banach,
    check_burton_kirk,
    check_sadovskii,
    compare_reference,
    compute_constants,
    full_report,
    lambda_t_mu,
    ulam_constant,
    zeta,
)
from hilfer_bvp.errors import MissingMetadata, NotContractive

from . import oracles
from .test_bvp import make_spec

# mpmath values of the printed formulas (40 digits, rounded)
ORACLE_I = {
    "delta": -1.9408117110161720,
    "theta": 1.3408893672480948,
    "phi": 2.1538002373351572,
    "k": 0.47775299704783295,
    "lambda_T_mu": 0.66872768083126019,
    "omega": 0.91822783918446597,
    "banach_value": 0.98110366958694815,
    "c_f": 70.960304881308145,
    "xi_const": 0.084413832775833752,
}


def test_frozen_oracle_matches_mpmath():
    fresh = oracles.example_i_constants()
    for name, val in ORACLE_I.items():
        assert float(fresh[name]) == pytest.approx(val, rel=1e-15)


def test_constants_match_oracle(spec_i):
    rep = compute_constants(spec_i)
    for name, val in ORACLE_I.items():
        assert getattr(rep, name) == pytest.approx(val, rel=1e-10), name
    assert rep.lstar == pytest.approx((0.1, 4 * np.pi / 27, 8 / 81), rel=1e-12)


def test_printed_values_within_tolerance(spec_i):
    rep = compute_constants(spec_i)
    assert rep.lambda_T_mu == pytest.approx(0.668728, rel=1e-3)
    assert rep.delta == pytest.approx(-1.94081, rel=1e-3)
    assert rep.theta == pytest.approx(1.34089, rel=1e-3)


def test_printed_phi_chain_is_flagged(spec_i):
    rep = full_report(spec_i, {"phi": 1.73186, "c_f": 58.007, "theta": 1.34089})
    assert rep.reference["phi"]["flagged"] and rep.reference["c_f"]["flagged"]
    assert not rep.reference["theta"]["flagged"]
    assert rep.reference["phi"]["abs_delta"] == pytest.approx(ORACLE_I["phi"] - 1.73186)


def test_corrected_mode_constants(spec_i):
    corrected = dataclasses.replace(spec_i, mode="corrected", _cache={})
    rep = compute_constants(corrected)
    ref = oracles.example_i_constants(corrected=True)
    for name in ("delta", "theta", "phi", "omega", "banach_value", "xi_const"):
        assert getattr(rep, name) == pytest.approx(float(ref[name]), rel=1e-10)
    assert not check_banach(rep).holds


def test_definitional_identities(spec_i):
    rep = compute_constants(spec_i)
    assert rep.omega == pytest.approx(rep.lambda_T_mu * rep.theta + abs(spec_i.lam) * rep.phi, rel=1e-12)
    assert rep.xi_const == pytest.approx(abs(spec_i.lam) * rep.phi + rep.k * rep.N, rel=1e-12)
    assert rep.c_f == pytest.approx(rep.theta / (1 - rep.banach_value), rel=1e-12)


def test_missing_metadata_leaves_fields_absent():
    rep = compute_constants(make_spec())
    assert rep.omega is None and rep.banach_value is None and rep.c_f is None
    assert not check_banach(rep).holds
    with pytest.raises(NotContractive):
        ulam_constant(rep)
    with pytest.raises(MissingMetadata):
        zeta(make_spec(), rep)
    with pytest.raises(MissingMetadata):
        check_burton_kirk(make_spec(), rep)


def test_trivial_structure():
    spec = make_spec(
        alphas=(0.0, 0.0),
        betas=(0.0, 0.0),
        lipschitz=Lipschitz(E.parse("1/10"), E.parse("0"), E.parse("0"), N=0.0),
    )
    rep = compute_constants(spec)
    assert rep.omega == pytest.approx(rep.lambda_T_mu * rep.theta, rel=1e-14)
    assert rep.theta == pytest.approx(
        spec.psi.power(spec.T, 1.5) / oracles.mp.gamma(2.5)
        + rep.k * spec.psi.power(spec.T, 1.75) / oracles.mp.gamma(2.75),
        rel=1e-13,
    )


def test_banach_threshold(spec_i):
    rep = compute_constants(spec_i)
    assert check_banach(rep).holds
    big = dataclasses.replace(spec_i, lipschitz=dataclasses.replace(spec_i.lipschitz, N=1.0), _cache={})
    v = check_banach(compute_constants(big))
    assert not v.holds and ">= 1" in v.reason


def test_r_min_formula(spec_i):
    rep = compute_constants(spec_i)
    t = np.linspace(0, 7 / 6, 10001)
    L = np.max(np.abs(np.cos(t) / (1 + t) + (2 * t - 1) ** 2 / 6))
    assert rep.L == pytest.approx(L, rel=1e-14)
    assert rep.r_min == pytest.approx(L * rep.theta / (1 - rep.banach_value), rel=1e-12)


def test_ulam_constant(spec_i):
    rep = compute_constants(spec_i)
    c_f, phi_f = ulam_constant(rep)
    assert c_f == pytest.approx(ORACLE_I["c_f"], rel=1e-10)
    assert phi_f(0.0) == 0.0
    eps = np.linspace(0, 1, 11)
    assert np.all(np.diff([phi_f(e) for e in eps]) >= 0)
    zero = dataclasses.replace(rep, banach_value=0.0)
    assert ulam_constant(zero)[0] == rep.theta


def test_sadovskii_example_ii(spec_ii):
    rep = compute_constants(spec_ii)
    v = check_sadovskii(spec_ii, rep, (0.0, 7 / 6))
    assert v.holds
    lo, hi = v.details["negative_intervals"][0]
    assert lo < 0.3 and hi > 0.9
    assert 0.24 < lo < 0.26 and 0.97 < hi < 1.0


def test_zeta_against_oracle(spec_ii):
    rep = compute_constants(spec_ii)
    z = zeta(spec_ii, rep)
    for r in (0.0, 0.3, 0.9, 1.1):
        assert float(z(r)) == pytest.approx(float(oracles.zeta_example_ii(r, z.pstar)), rel=1e-12, abs=1e-14)
    assert float(z(0.0)) > 0
    a, b, c = 37 / 500, 29 / 125, 3 / 10
    assert z.pstar == pytest.approx((a, b / 8, c * np.e / 4), rel=1e-6)


def test_zeta_zero_growth_is_minus_r():
    zero = E.parse("0")
    spec = make_spec(
        growth=Growth(zero, zero, zero, E.parse("r"), E.parse("r"), E.parse("r")),
        lipschitz=Lipschitz(N=0.0),
    )
    rep = compute_constants(spec)
    z = zeta(spec, rep)
    r = np.linspace(0, 1, 7)
    np.testing.assert_allclose(z(r), -r, atol=1e-15)
    assert check_sadovskii(spec, rep).holds


def test_burton_kirk_example_iii(spec_iii):
    rep = compute_constants(spec_iii)
    v = check_burton_kirk(spec_iii, rep)
    assert v.holds
    p_norm = np.exp(7 / 6)
    assert v.details["M_bound"] == pytest.approx(rep.theta * p_norm / (1 - rep.xi_const), rel=1e-12)
    D = oracles.delta(psi=oracles.psi1(mp.mpf(11) / 10), dpsi=None)
    assert rep.delta == pytest.approx(float(D), rel=1e-10)


def test_burton_kirk_zero_bound():
    spec = make_spec(bound_p=E.parse("0"), lipschitz=Lipschitz(N=0.1))
    rep = compute_constants(spec)
    v = check_burton_kirk(spec, rep)
    assert v.details["M_bound"] == pytest.approx(abs(spec.a) * 0.1 * rep.k / (1 - rep.xi_const), abs=1e-15)


def test_burton_kirk_detects_violated_bound():
    spec = make_spec(f=E.parse("1 + abs(u)"), bound_p=E.parse("1"), lipschitz=Lipschitz(N=0.1))
    assert not check_burton_kirk(spec, compute_constants(spec)).holds


def test_grid_independence(spec_i):
    a = compute_constants(spec_i, samples=10_000)
    b = compute_constants(spec_i, samples=20_000)
    for name in ("delta", "theta", "phi", "k"):
        assert getattr(a, name) == getattr(b, name)


def test_report_is_json_serialisable(spec_i):
    rep = full_report(spec_i, {"delta": -1.94081})
    json.dumps(rep.to_dict(), default=lambda o: o.__dict__)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(0, 0.3),
    st.floats(0, 0.3),
    st.floats(0, 0.3),
    st.floats(0, 0.5),
    st.floats(0, 0.1),
    st.sampled_from(["l1", "l2", "l3", "N", "lam"]),
)
def test_banach_value_monotone(l1, l2, l3, N, lam, which):
    def value(l1, l2, l3, N, lam):
        lip = Lipschitz(E.parse(repr(l1)), E.parse(repr(l2)), E.parse(repr(l3)), N=N)
        return compute_constants(make_spec(lipschitz=lip, lam=lam), samples=16).banach_value

    base = dict(l1=l1, l2=l2, l3=l3, N=N, lam=lam)
    bumped = dict(base)
    bumped[which] += 0.05
    identities_spec = make_spec(lipschitz=Lipschitz(E.parse(repr(l1)), E.parse(repr(l2)), E.parse(repr(l3)), N=N), lam=lam)
    rep = compute_constants(identities_spec, samples=16)
    assert rep.omega == pytest.approx(lambda_t_mu(identities_spec, rep.lstar, 7 / 6) * rep.theta + lam * rep.phi, rel=1e-12)
    assert rep.xi_const == pytest.approx(lam * rep.phi + rep.k * N, rel=1e-12, abs=1e-300)
    assert value(**bumped) >= value(**base)
