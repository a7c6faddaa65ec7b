"""Built-in run configurations for the worked example and its variants.

The shared data: ν = 3/2, β = 1/2, J = [0, 7/6], ψ(t) = 1 − e^{−t√2},
α = (1, 2), β = (1/3, 2/5), η = (1/6, 5/6), ξ = 1,
g(u) = ln(1 + √3 u²)/10 with Lipschitz constant N = 3^{1/4}/10.

* ``example-4.1-i``: Lipschitz right-hand side with 𝒱u(t) = u(2t/(1+t)).
* ``example-4.1-ii``: growth-bounded right-hand side (ζ scan).
* ``example-4.1-iii``: f ≡ 1, g ≡ 1 with ψ₁(t) = 3^{t^ρ+2t} − 1, ρ = 11/10.
* ``example-4.1-iii-sweep``: ψ₁ and ψ₂(t) = tan(πt√ρ/4) over six ρ and
  λ ∈ {0, 1/100}.
"""

from __future__ import annotations

import copy
import json

from .config import RunConfig, parse_config
from .errors import ConfigError

__all__ = ["BUILTIN_SCENARIOS", "scenario_document", "load_scenario"]

_COMMON = {
    "nu": "3/2",
    "beta": "1/2",
    "lambda": "1/100",
    "a": 0,
    "T": "7/6",
    "psi": {"family": "exp-saturating", "param": "sqrt(2)"},
    "alphas": [1, 2],
    "betas": ["1/3", "2/5"],
    "etas": ["1/6", "5/6"],
    "xi": 1,
    "g": "ln(1 + u^2*sqrt(3))/10",
    "V": {"time_warp": "2*t/(1+t)"},
}

_EX_I = {
    "name": "example-4.1-i",
    "problem": {
        **_COMMON,
        "f": (
            "cos(t)/(1+t) + exp(-sin(t)^2)/sqrt(25+t)*abs(u)/(2+abs(u))"
            " + (2*t-1)^2/6*(cos(pi/2*v) + abs(w)/(3+abs(w)))"
        ),
        "lipschitz": {
            "l1": "exp(-sin(t)^2)/(2*sqrt(25+t))",
            "l2": "pi*(2*t-1)^2/12",
            "l3": "(2*t-1)^2/18",
            "N": "3^(1/4)/10",
        },
    },
    "grid": {"n": 2048},
    "solver": {"tol": 1e-10, "max_iter": 5000},
    "stability": {"eps": [0.01, 0.001], "z": "eps"},
    "reference": {
        "lambda_T_mu": 0.668728,
        "delta": -1.94081,
        "theta": 1.34089,
        "phi": 1.73186,
        "omega": 0.9140092,
        "banach_value": 0.976884,
        "c_f": 58.007,
        "xi_const": 0.0801944,
    },
}

_EX_II = {
    "name": "example-4.1-ii",
    "problem": {
        **_COMMON,
        "params": {"a": "37/500", "b": "29/125", "c": "3/10"},
        "f": (
            "exp(-sqrt(t))/(1+t)*a*u + b*(t-t^2)/(2+t)*(3 + abs(v)/(1+abs(v)))"
            " + c*exp(sin(3*pi*t/7))/sqrt(16+t^2)*(2*w^3 + 1/4)"
        ),
        "lipschitz": {"N": "3^(1/4)/10"},
        "growth": {
            "p": ["a*exp(-sqrt(t))", "b*(t-t^2)/2", "c*exp(sin(3*pi*t/7))/4"],
            "phi": ["r", "3 + r/(1+r)", "2*r^3 + 1/4"],
        },
    },
    "grid": {"n": 2048},
    "solver": {"tol": 1e-10, "max_iter": 5000},
    "zeta": {"range": [0, "7/6"], "samples": 512},
    "reference": {"xi_const": 0.0801944},
}

_EX_III_PROBLEM = {
    **{k: v for k, v in _COMMON.items() if k not in ("psi", "g", "V")},
    "lambda": 0,
    "psi": {"family": "power-exponential", "param": "11/10"},
    "f": "1",
    "g": "1",
    "require_g_zero_at_a": False,
    "lipschitz": {"N": 0},
    "p": "exp(t)",
}

_EX_III = {
    "name": "example-4.1-iii",
    "problem": _EX_III_PROBLEM,
    "grid": {"n": 2048},
    "solver": {"tol": 1e-10, "max_iter": 200},
}

_RHOS = ("11/10", "13/10", "15/10", "17/10", "19/10", "20/10")
_LAMBDAS = (("0", 0), ("0.01", "1/100"))


def _sweep_entries() -> list[dict]:
    out = []
    for fam, tag, n in (("power-exponential", "psi1", 8192), ("tangent", "psi2", 2048)):
        for rho in _RHOS:
            r = int(rho.split("/")[0]) / 10
            for ltag, lam in _LAMBDAS:
                out.append(
                    {
                        "label": f"{tag}-rho{r:.1f}-lambda{ltag}",
                        "psi": {"family": fam, "param": rho},
                        "lambda": lam,
                        "grid": {"n": n},
                    }
                )
    return out


_EX_III_SWEEP = {
    "name": "example-4.1-iii-sweep",
    "problem": _EX_III_PROBLEM,
    "grid": {"n": 2048},
    "solver": {"tol": 1e-10, "max_iter": 200},
    "sweep": _sweep_entries(),
}

BUILTIN_SCENARIOS: dict[str, dict] = {
    d["name"]: d for d in (_EX_I, _EX_II, _EX_III, _EX_III_SWEEP)
}  # fmt: skip


def scenario_document(name: str) -> dict:
    """A deep copy of a built-in configuration document."""
    try:
        return copy.deepcopy(BUILTIN_SCENARIOS[name])
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; known: {sorted(BUILTIN_SCENARIOS)}", field="scenario") from None


def load_scenario(name: str, **overrides) -> RunConfig:
    """Materialise a built-in scenario (``grid_n`` and ``mode`` may override)."""
    doc = scenario_document(name)
    return parse_config(doc, json.dumps(doc, indent=2), **overrides)
