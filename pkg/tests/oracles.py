"""Independent extended-precision oracles (mpmath) for the test suite.

Nothing here imports the package: every quantity is recomputed from its
defining formula at 40 significant digits.
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 40

SQRT2 = mp.sqrt(2)
T_END = mp.mpf(7) / 6
NU = mp.mpf(3) / 2
BETA = mp.mpf(1) / 2
MU = NU + BETA * (2 - NU)
LAM = mp.mpf(1) / 100
ALPHAS = (mp.mpf(1), mp.mpf(2))
BETAS = (mp.mpf(1) / 3, mp.mpf(2) / 5)
ETAS = (mp.mpf(1) / 6, mp.mpf(5) / 6)
N_LIP = mp.mpf(3) ** (mp.mpf(1) / 4) / 10


def psi_exp(t):
    return 1 - mp.exp(-t * SQRT2)


def dpsi_exp(t):
    return SQRT2 * mp.exp(-t * SQRT2)


def psi1(rho):
    return lambda t: mp.power(3, mp.power(t, rho) + 2 * t) - 1


def psi2(rho):
    return lambda t: mp.tan(mp.pi * t * mp.sqrt(rho) / 4)


def rl_power(alpha, upsilon, d):
    """I^α of d^{υ−1} (d = ψ(t) − ψ(a)): Γ(υ)/Γ(υ+α) d^{υ+α−1}."""
    alpha, upsilon, d = mp.mpf(alpha), mp.mpf(upsilon), mp.mpf(d)
    return mp.gamma(upsilon) / mp.gamma(upsilon + alpha) * d ** (upsilon + alpha - 1)


def rl_quad(psi, dpsi, alpha, f, t, a=0):
    """I^{α,ψ} f(t) by tanh-sinh quadrature of the defining integral."""
    alpha, t = mp.mpf(alpha), mp.mpf(t)
    pt = psi(t)
    integrand = lambda s: dpsi(s) * (pt - psi(s)) ** (alpha - 1) * f(s)
    return mp.quad(integrand, [a, t]) / mp.gamma(alpha)


def delta(psi=psi_exp, dpsi=dpsi_exp, corrected=False):
    total = psi(T_END)
    for al, be, eta in zip(ALPHAS, BETAS, ETAS):
        c = dpsi(eta) if corrected else 1
        total -= psi(eta) ** (MU - 2) / mp.gamma(MU - 1) * (al * psi(eta) / (MU - 1) + be * c)
    return total


def example_i_constants(corrected=False):
    """Θ, Φ, Λ(T, μ), Ω, k, Ω + kN, c_f, Ξ for the Lipschitz example."""
    D = delta(corrected=corrected)
    k = psi_exp(T_END) ** (MU - 1) / (abs(D) * mp.gamma(MU))
    inner = psi_exp(T_END) ** (2 - MU + NU) / mp.gamma(3 - MU + NU)
    for al, be, eta in zip(ALPHAS, BETAS, ETAS):
        c = dpsi_exp(eta) if corrected else psi_exp(eta)
        inner += abs(al) * psi_exp(eta) ** NU / mp.gamma(NU + 1)
        inner += abs(be) * c * psi_exp(eta) ** (NU - 1) / mp.gamma(NU)
    theta = psi_exp(T_END) ** NU / mp.gamma(NU + 1) + k * inner
    phi_inner = psi_exp(T_END) ** (3 - MU) / mp.gamma(4 - MU)
    for al, be, eta in zip(ALPHAS, BETAS, ETAS):
        phi_inner += abs(al) * psi_exp(eta) + abs(be) * dpsi_exp(eta)
    phi = k * phi_inner + psi_exp(T_END)
    # l1* = 1/10 at t = 0, l2* = π(2T−1)²/12, l3* = (2T−1)²/18 at t = T
    l1 = mp.mpf(1) / 10
    l2 = mp.pi * (2 * T_END - 1) ** 2 / 12
    l3 = (2 * T_END - 1) ** 2 / 18
    lam_T = l1 + l2 + l3 * psi_exp(T_END) ** (2 - MU) / mp.gamma(3 - MU)
    omega = lam_T * theta + LAM * phi
    banach = omega + k * N_LIP
    return {
        "delta": D,
        "theta": theta,
        "phi": phi,
        "k": k,
        "lambda_T_mu": lam_T,
        "omega": omega,
        "banach_value": banach,
        "c_f": theta / (1 - banach),
        "xi_const": LAM * phi + k * N_LIP,
    }


def zeta_example_ii(r, pstar):
    """ζ(r) with growth data φ = (r, 3 + r/(1+r), 2r³ + 1/4) and given p*."""
    c = example_i_constants()
    r = mp.mpf(r)
    scale = psi_exp(T_END) ** (2 - MU) / mp.gamma(3 - MU)
    s = scale * r
    growth = pstar[0] * r + pstar[1] * (3 + r / (1 + r)) + pstar[2] * (2 * s**3 + mp.mpf(1) / 4)
    return growth * c["theta"] / (1 - c["xi_const"]) - r


def closed_form_iii(psi, t):
    """The displayed solution of the f ≡ 1, g ≡ 1, λ = 0 problem."""
    D = delta(psi=psi, dpsi=None)
    pT = psi(T_END)
    bracket = 1 - pT ** (2 - MU + NU) / mp.gamma(3 - MU + NU)
    for al, be, eta in zip(ALPHAS, BETAS, ETAS):
        bracket += al * psi(eta) ** NU / mp.gamma(NU + 1) + be * psi(eta) ** NU / mp.gamma(NU)
    p = psi(mp.mpf(t))
    return p**NU / mp.gamma(NU + 1) + p ** (MU - 1) / (D * mp.gamma(MU)) * bracket


def constant_forcing_response(t, eps):
    """Contribution of z ≡ ε to 𝒜 for the exponential ψ (paper-faithful mode)."""
    D = delta()
    pT = psi_exp(T_END)
    S = -(pT ** (2 - MU + NU)) / mp.gamma(3 - MU + NU)
    for al, be, eta in zip(ALPHAS, BETAS, ETAS):
        S += al * psi_exp(eta) ** NU / mp.gamma(NU + 1) + be * psi_exp(eta) * psi_exp(eta) ** (NU - 1) / mp.gamma(NU)
    p = psi_exp(mp.mpf(t))
    return eps * (p**NU / mp.gamma(NU + 1) + p ** (MU - 1) / (D * mp.gamma(MU)) * S)
