"""JSON run configurations and their materialisation into :class:`ProblemSpec`.

A configuration is one JSON document::

    {
      "name": "my-run",
      "problem": {
        "nu": "3/2", "beta": "1/2", "lambda": "1/100", "a": 0, "T": "7/6",
        "psi": {"family": "exp-saturating", "param": "sqrt(2)"},
        "alphas": [1, 2], "betas": ["1/3", "2/5"], "etas": ["1/6", "5/6"], "xi": 1,
        "f": "cos(t)/(1+t) + ...", "g": "ln(1 + u^2*sqrt(3))/10",
        "V": {"time_warp": "2*t/(1+t)"},
        "lipschitz": {"l1": "...", "l2": "...", "l3": "...", "N": "3^(1/4)/10"},
        "growth": {"p": ["...", "...", "..."], "phi": ["r", "...", "..."]},
        "p": "exp(t)", "params": {"c": 2}, "mode": "paper-faithful"
      },
      "grid": {"n": 2048},
      "solver": {"tol": 1e-10, "max_iter": 200},
      "zeta": {"range": [0, "7/6"], "samples": 512},
      "stability": {"eps": [0.01, 0.001], "z": "eps"},
      "reference": {"delta": -1.94081},
      "sweep": [{"label": "variant", "lambda": 0, "psi": {...}, "grid": {"n": 8192}}]
    }

Numbers may be written as strings in the expression language (``"7/6"``,
``"sqrt(2)"``). ψ is either a built-in family or ``{"expr", "prime",
"inverse"}`` expressions in ``t`` (the inverse in ``tau``). Each ``sweep``
entry overrides problem keys (and optionally ``grid``) to give one variant.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from typing import Any

from . import expr as _expr
from .bvp import Growth, Lipschitz, ProblemSpec, VOperator
from .errors import ConfigError, HilferBVPError, InvalidProblem
from .fraccalc import DEFAULT_N, FracOrder
from .psi import PsiFunction, builtin

__all__ = ["RunConfig", "Variant", "load_config", "parse_config", "materialize_problem", "parse_number"]

_TOP_KEYS = {"name", "problem", "grid", "solver", "zeta", "stability", "reference", "sweep"}
_PROBLEM_KEYS = {
    "nu", "beta", "lambda", "a", "T", "psi", "alphas", "betas", "etas", "xi", "f", "g", "V",
    "lipschitz", "growth", "p", "params", "mode", "require_g_zero_at_a",
}  # fmt: skip
_REQUIRED = ("nu", "beta", "a", "T", "psi", "xi", "f", "g")


@dataclass(frozen=True)
class Variant:
    """One materialised problem of a configuration, with its grid size."""

    label: str
    spec: ProblemSpec
    n: int


@dataclass
class RunConfig:
    """Validated configuration. ``variants`` holds the base problem or the sweep members."""

    name: str
    variants: list[Variant]
    tol: float = 1e-10
    max_iter: int = 200
    zeta_range: tuple[float, float] | None = None
    zeta_samples: int = 512
    stability_eps: tuple[float, ...] = (1e-2, 1e-3)
    stability_z: str = "eps"
    reference: dict[str, float] = field(default_factory=dict)
    source: dict = field(default_factory=dict, repr=False)

    @property
    def spec(self) -> ProblemSpec:
        return self.variants[0].spec

    @property
    def n(self) -> int:
        return self.variants[0].n

    @property
    def is_sweep(self) -> bool:
        return "sweep" in self.source


class _Ctx:
    """Carries the raw text so field errors can report a line number."""

    def __init__(self, text: str | None):
        self.text = text

    def line_of(self, path: str) -> int | None:
        if not self.text:
            return None
        key = path.split(".")[-1].split("[")[0]
        m = re.search(r'"' + re.escape(key) + r'"\s*:', self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else None

    def error(self, message: str, path: str) -> ConfigError:
        return ConfigError(message, field=path, line=self.line_of(path))


def parse_number(value: Any, path: str = "value", ctx: _Ctx | None = None) -> float:
    """A JSON number, or a string evaluated as a constant expression."""
    ctx = ctx or _Ctx(None)
    if isinstance(value, bool):
        raise ctx.error("expected a number, got a boolean", path)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(_expr.evaluate(_expr.parse(value, variables=())))
        except HilferBVPError as exc:
            raise ctx.error(f"not a constant expression: {exc}", path) from None
    raise ctx.error(f"expected a number, got {type(value).__name__}", path)


def _expr_field(value: Any, variables: set[str], params: dict[str, float], path: str, ctx: _Ctx) -> _expr.Expr:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = repr(float(value))
    if not isinstance(value, str):
        raise ctx.error("expected an expression string", path)
    try:
        e = _expr.parse(value, variables=variables | set(params))
    except HilferBVPError as exc:
        raise ctx.error(f"bad expression: {exc}", path) from None
    return _expr.substitute(e, params)


def _numbers(value: Any, path: str, ctx: _Ctx) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ctx.error("expected a list", path)
    return tuple(parse_number(x, f"{path}[{i}]", ctx) for i, x in enumerate(value))


def _psi(value: Any, a: float, T: float, params: dict[str, float], ctx: _Ctx) -> PsiFunction:
    path = "problem.psi"
    if not isinstance(value, dict):
        raise ctx.error("psi must be an object", path)
    try:
        if "family" in value:
            param = value.get("param")
            p = None if param is None else parse_number(param, path + ".param", ctx)
            return builtin(str(value["family"]), a, T, p)
        if "expr" not in value:
            raise ctx.error("psi needs either 'family' or 'expr'", path)
        return PsiFunction.from_expr(
            _expr_field(value["expr"], {"t"}, params, path + ".expr", ctx),
            a,
            T,
            psi_prime=None if "prime" not in value else _expr_field(value["prime"], {"t"}, params, path + ".prime", ctx),
            inverse_hint=None
            if "inverse" not in value
            else _expr_field(value["inverse"], {"tau"}, params, path + ".inverse", ctx),
        )
    except InvalidProblem:
        raise
    except ConfigError:
        raise
    except HilferBVPError as exc:
        raise InvalidProblem(f"psi rejected: {exc}") from None


def _v_operator(value: Any, params: dict[str, float], ctx: _Ctx) -> VOperator:
    path = "problem.V"
    if value is None or value == "identity" or value == {"kind": "identity"}:
        return VOperator()
    if isinstance(value, dict) and "time_warp" in value:
        return VOperator("time-warp", _expr_field(value["time_warp"], {"t"}, params, path + ".time_warp", ctx))
    raise ctx.error("V must be 'identity' or {'time_warp': expr}", path)


def materialize_problem(problem: dict, ctx: _Ctx | None = None, name: str = "problem") -> ProblemSpec:
    """Turn a ``problem`` object into a validated :class:`ProblemSpec`."""
    ctx = ctx or _Ctx(None)
    if not isinstance(problem, dict):
        raise ctx.error("problem must be an object", "problem")
    unknown = set(problem) - _PROBLEM_KEYS
    if unknown:
        raise ctx.error(f"unknown key(s) {sorted(unknown)}", f"problem.{sorted(unknown)[0]}")
    for key in _REQUIRED:
        if key not in problem:
            raise ctx.error(f"missing required key {key!r}", f"problem.{key}")
    raw_params = problem.get("params", {})
    if not isinstance(raw_params, dict):
        raise ctx.error("params must be an object", "problem.params")
    params = {k: parse_number(v, f"problem.params.{k}", ctx) for k, v in raw_params.items()}

    def num(key, default=None):
        return parse_number(problem[key], f"problem.{key}", ctx) if key in problem else default

    a, T = num("a"), num("T")
    try:
        order = FracOrder(num("nu"), num("beta"))
    except HilferBVPError as exc:
        raise InvalidProblem(f"fractional order rejected: {exc}") from None
    psi = _psi(problem["psi"], a, T, params, ctx)

    lip = None
    if "lipschitz" in problem:
        raw = problem["lipschitz"]
        if not isinstance(raw, dict):
            raise ctx.error("lipschitz must be an object", "problem.lipschitz")
        ls = [
            _expr_field(raw[k], {"t"}, params, f"problem.lipschitz.{k}", ctx) if k in raw else None
            for k in ("l1", "l2", "l3")
        ]
        N = parse_number(raw["N"], "problem.lipschitz.N", ctx) if "N" in raw else None
        lip = Lipschitz(*ls, N=N)

    growth = None
    if "growth" in problem:
        raw = problem["growth"]
        if not (isinstance(raw, dict) and len(raw.get("p", ())) == 3 and len(raw.get("phi", ())) == 3):
            raise ctx.error("growth needs three 'p' and three 'phi' expressions", "problem.growth")
        ps = [_expr_field(x, {"t"}, params, f"problem.growth.p[{i}]", ctx) for i, x in enumerate(raw["p"])]
        phis = [_expr_field(x, {"r"}, params, f"problem.growth.phi[{i}]", ctx) for i, x in enumerate(raw["phi"])]
        growth = Growth(*ps, *phis)

    mode = problem.get("mode", "paper-faithful")
    rgz = problem.get("require_g_zero_at_a", True)
    if not isinstance(rgz, bool):
        raise ctx.error("require_g_zero_at_a must be a boolean", "problem.require_g_zero_at_a")
    return ProblemSpec(
        order=order,
        lam=num("lambda", 0.0),
        psi=psi,
        alphas=_numbers(problem.get("alphas", []), "problem.alphas", ctx),
        betas=_numbers(problem.get("betas", []), "problem.betas", ctx),
        etas=_numbers(problem.get("etas", []), "problem.etas", ctx),
        xi=num("xi"),
        f=_expr_field(problem["f"], {"t", "u", "v", "w"}, params, "problem.f", ctx),
        g=_expr_field(problem["g"], {"u"}, params, "problem.g", ctx),
        V=_v_operator(problem.get("V"), params, ctx),
        lipschitz=lip,
        growth=growth,
        bound_p=_expr_field(problem["p"], {"t"}, params, "problem.p", ctx) if "p" in problem else None,
        mode=mode,
        require_g_zero_at_a=rgz,
        name=name,
    )


def _grid_n(raw: Any, path: str, ctx: _Ctx, default: int) -> int:
    if raw is None:
        return default
    if not isinstance(raw, dict) or not isinstance(raw.get("n", default), int) or raw.get("n", default) < 4:
        raise ctx.error("grid.n must be an integer >= 4", path)
    return int(raw.get("n", default))


def parse_config(
    doc: dict,
    text: str | None = None,
    *,
    grid_n: int | None = None,
    mode: str | None = None,
) -> RunConfig:
    """Validate a decoded document; ``grid_n`` and ``mode`` override the file."""
    ctx = _Ctx(text)
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object", line=1)
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ctx.error(f"unknown top-level key {key!r}", key)
    if "problem" not in doc:
        raise ConfigError("missing 'problem'", field="problem", line=1)
    name = str(doc.get("name", "run"))
    base_n = _grid_n(doc.get("grid"), "grid", ctx, DEFAULT_N)
    solver = doc.get("solver", {})
    if not isinstance(solver, dict):
        raise ctx.error("solver must be an object", "solver")
    tol = parse_number(solver.get("tol", 1e-10), "solver.tol", ctx)
    max_iter = solver.get("max_iter", 200)
    if not isinstance(max_iter, int) or max_iter < 1 or not tol > 0:
        raise ctx.error("solver needs tol > 0 and integer max_iter >= 1", "solver")

    def problem_for(overrides: dict) -> dict:
        p = copy.deepcopy(doc["problem"])
        if not isinstance(p, dict):
            raise ctx.error("problem must be an object", "problem")
        p.update(overrides)
        if mode is not None:
            p["mode"] = mode
        return p

    variants: list[Variant] = []
    sweep = doc.get("sweep")
    if sweep is None:
        spec = materialize_problem(problem_for({}), ctx, name)
        variants.append(Variant(name, spec, grid_n or base_n))
    else:
        if not isinstance(sweep, list) or not sweep:
            raise ctx.error("sweep must be a non-empty list", "sweep")
        for i, item in enumerate(sweep):
            if not isinstance(item, dict) or "label" not in item:
                raise ctx.error("each sweep entry needs a 'label'", f"sweep[{i}]")
            over = {k: v for k, v in item.items() if k not in ("label", "grid")}
            n = _grid_n(item.get("grid"), f"sweep[{i}].grid", ctx, base_n)
            label = str(item["label"])
            variants.append(Variant(label, materialize_problem(problem_for(over), ctx, label), grid_n or n))
        labels = [v.label for v in variants]
        if len(set(labels)) != len(labels):
            raise ctx.error("sweep labels must be unique", "sweep")

    zeta = doc.get("zeta", {})
    zr = zeta.get("range")
    zeta_range = None if zr is None else tuple(_numbers(zr, "zeta.range", ctx))
    if zeta_range is not None and (len(zeta_range) != 2 or not zeta_range[0] < zeta_range[1]):
        raise ctx.error("zeta.range must be [lo, hi] with lo < hi", "zeta.range")
    zs = zeta.get("samples", 512)
    if not isinstance(zs, int) or zs < 2:
        raise ctx.error("zeta.samples must be an integer >= 2", "zeta.samples")

    stab = doc.get("stability", {})
    eps = _numbers(stab.get("eps", [1e-2, 1e-3]), "stability.eps", ctx)
    if any(e < 0 for e in eps):
        raise ctx.error("stability.eps must be nonnegative", "stability.eps")
    z = stab.get("z", "eps")
    _expr_field(z, {"t", "eps", "psi"}, {}, "stability.z", ctx)

    ref = doc.get("reference", {})
    if not isinstance(ref, dict):
        raise ctx.error("reference must be an object", "reference")
    reference = {k: parse_number(v, f"reference.{k}", ctx) for k, v in ref.items()}
    return RunConfig(
        name=name,
        variants=variants,
        tol=tol,
        max_iter=max_iter,
        zeta_range=zeta_range,
        zeta_samples=zs,
        stability_eps=eps,
        stability_z=z,
        reference=reference,
        source=doc,
    )


def load_config(path: str, **overrides) -> RunConfig:
    """Read and validate a JSON configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return parse_config(doc, text, **overrides)
