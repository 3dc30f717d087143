"""Run configuration: one YAML document describing model, policy, costs and controls.

Example::

    model:
      mu: 1.0
      alpha: 1.0
      lambda: 1.0
      lambda_prime: 0.5
      jump: {dist: gamma, beta: 2.0, eta: 3.0}
    policy: {x: 10.0, a: 2.0, Q: 3.0}
    rates: {C_o: 1.0, C_h: 0.5, C_so: 0.0}
    series: {epsilon: 1.0e-10}
    quadrature: {nodes: 256, scheme: simpson}
    mc: {paths: 100000, horizon: 5.0, seed: 42, confidence_level: 0.95}
    output: {format: csv, path: null}
    run: {n: 1, s: 1.0, b: 2.0, grid_a: [1.0, 2.0], grid_q: [1.0, 3.0], checkpoints: [10.0, 100.0]}

Only ``model`` and ``policy`` are required.  Omitted blocks and keys take the
defaults listed in :data:`DEFAULTS`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import yaml

from .cost import QuadratureControl
from .distribution import SeriesControl
from .errors import ParameterError
from .model import CostRates, DemandModel, Exponential, Gamma, Policy
from .montecarlo import McConfig

__all__ = ["ConfigError", "OutputSpec", "RunSpec", "RunConfig", "DEFAULTS", "parse_config", "load_config", "dump_config"]


class ConfigError(ParameterError):
    """A configuration document cannot be parsed or violates an invariant."""


DEFAULTS: Dict[str, Dict[str, Any]] = {
    "rates": {"C_o": 0.0, "C_h": 0.0, "C_so": 0.0},
    "series": {
        "epsilon": 1e-10,
        "max_unit_index": 10_000,
        "max_compound_index": 10_000,
        "max_replenishments": 100_000,
    },
    "quadrature": {"nodes": 256, "scheme": "simpson"},
    "mc": {"paths": 100_000, "horizon": 1.0, "seed": 42, "confidence_level": 0.95},
    "output": {"format": "csv", "path": None},
    "run": {
        "n": 1,
        "s": 1.0,
        "b": 1.0,
        "grid_a": None,
        "grid_q": None,
        "checkpoints": [10.0, 100.0, 1000.0],
        "log_paths": 1,
    },
}

_MODEL_KEYS = ("mu", "alpha", "lambda", "lambda_prime", "jump")
_JUMP_KEYS = {"exponential": ("dist", "eta"), "gamma": ("dist", "beta", "eta")}
_POLICY_KEYS = ("x", "a", "Q")
_TOP_KEYS = ("model", "policy") + tuple(DEFAULTS)


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: Optional[str] = None


@dataclass(frozen=True)
class RunSpec:
    """Subcommand parameters that command-line flags may override."""

    n: int = 1
    s: float = 1.0
    b: float = 1.0
    grid_a: Optional[Tuple[float, ...]] = None
    grid_q: Optional[Tuple[float, ...]] = None
    checkpoints: Tuple[float, ...] = (10.0, 100.0, 1000.0)
    log_paths: int = 1


@dataclass(frozen=True)
class RunConfig:
    model: DemandModel
    policy: Policy
    rates: CostRates = CostRates()
    series: SeriesControl = SeriesControl()
    quadrature: QuadratureControl = QuadratureControl()
    mc: McConfig = McConfig()
    output: OutputSpec = OutputSpec()
    run: RunSpec = field(default_factory=RunSpec)


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent-only floats such as ``1e-10``."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+][0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


def _fail(path, message):
    raise ConfigError(f"{path}: {message}" if path else message)


def _mapping(value, path):
    if value is None:
        return {}
    if not isinstance(value, dict):
        _fail(path, "expected a mapping")
    for key in value:
        if not isinstance(key, str):
            _fail(path, f"keys must be strings, got {key!r}")
    return value


def _reject_unknown(block, allowed, path):
    for key in block:
        if key not in allowed:
            _fail(f"{path}.{key}" if path else key, "unknown key")


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        _fail(path, "must be finite")
    return value


def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        _fail(path, f"expected an integer, got {value!r}")
    return value


def _number_list(value, path):
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or not value:
        _fail(path, "expected a nonempty list of numbers")
    return tuple(_number(v, f"{path}[{k}]") for k, v in enumerate(value))


def _build(path, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ParameterError as exc:
        _fail(path, str(exc))


def _parse_model(raw):
    block = _mapping(raw, "model")
    _reject_unknown(block, _MODEL_KEYS, "model")
    args = {name: _number(block.get(key, 0.0), f"model.{key}") for key, name in (
        ("mu", "drift"),
        ("alpha", "unit_jump_size"),
        ("lambda", "unit_jump_rate"),
        ("lambda_prime", "compound_rate"),
    )}
    jump = None
    if block.get("jump") is not None:
        jb = _mapping(block["jump"], "model.jump")
        dist = jb.get("dist")
        if dist not in _JUMP_KEYS:
            _fail("model.jump.dist", f"must be 'exponential' or 'gamma', got {dist!r}")
        _reject_unknown(jb, _JUMP_KEYS[dist], "model.jump")
        if "eta" not in jb:
            _fail("model.jump.eta", "required")
        eta = _number(jb["eta"], "model.jump.eta")
        if dist == "exponential":
            jump = _build("model.jump.eta", Exponential, rate=eta)
        else:
            if "beta" not in jb:
                _fail("model.jump.beta", "required")
            beta = _number(jb["beta"], "model.jump.beta")
            where = "model.jump.eta" if beta > 0 else "model.jump.beta"
            jump = _build(where, Gamma, shape=beta, rate=eta)
    return _build("model", DemandModel, jump_dist=jump, **args)


def _parse_policy(raw):
    block = _mapping(raw, "policy")
    _reject_unknown(block, _POLICY_KEYS, "policy")
    for key in _POLICY_KEYS:
        if key not in block:
            _fail(f"policy.{key}", "required")
    vals = {k: _number(block[k], f"policy.{k}") for k in _POLICY_KEYS}
    for key in _POLICY_KEYS:
        if vals[key] <= 0:
            _fail(f"policy.{key}", f"{key} must be > 0")
    return Policy(vals["x"], vals["a"], vals["Q"])


def _block(doc, name):
    block = dict(DEFAULTS[name])
    given = _mapping(doc.get(name), name)
    _reject_unknown(given, DEFAULTS[name], name)
    block.update(given)
    return block


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML run configuration.

    Raises
    ------
    ConfigError
        On syntax errors (with line and column), unknown keys (named by their
        full path) and any violated parameter invariant.
    """
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"parse error at {where}: {exc.problem or exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    doc = _mapping(doc, "")
    _reject_unknown(doc, _TOP_KEYS, "")
    for required in ("model", "policy"):
        if required not in doc:
            _fail(required, "required block is missing")

    model = _parse_model(doc["model"])
    policy = _parse_policy(doc["policy"])

    r = _block(doc, "rates")
    rates = _build(
        "rates", CostRates,
        ordering=_number(r["C_o"], "rates.C_o"),
        holding=_number(r["C_h"], "rates.C_h"),
        stockout=_number(r["C_so"], "rates.C_so"),
    )

    s = _block(doc, "series")
    series = _build(
        "series", SeriesControl,
        tail_mass_tol=_number(s["epsilon"], "series.epsilon"),
        max_unit_index=_integer(s["max_unit_index"], "series.max_unit_index"),
        max_compound_index=_integer(s["max_compound_index"], "series.max_compound_index"),
        max_replenishments=_integer(s["max_replenishments"], "series.max_replenishments"),
    )

    q = _block(doc, "quadrature")
    if not isinstance(q["scheme"], str):
        _fail("quadrature.scheme", f"expected a string, got {q['scheme']!r}")
    quad = _build("quadrature", QuadratureControl, nodes=_integer(q["nodes"], "quadrature.nodes"), scheme=q["scheme"])

    m = _block(doc, "mc")
    mc = _build(
        "mc", McConfig,
        paths=_integer(m["paths"], "mc.paths"),
        horizon=_number(m["horizon"], "mc.horizon"),
        seed=_integer(m["seed"], "mc.seed"),
        confidence_level=_number(m["confidence_level"], "mc.confidence_level"),
    )

    o = _block(doc, "output")
    if o["format"] not in ("csv", "json"):
        _fail("output.format", f"must be 'csv' or 'json', got {o['format']!r}")
    if o["path"] is not None and not isinstance(o["path"], str):
        _fail("output.path", "expected a string or null")
    output = OutputSpec(o["format"], o["path"])

    run = _parse_run(_block(doc, "run"))
    return RunConfig(model, policy, rates, series, quad, mc, output, run)


def _parse_run(u):
    n = _integer(u["n"], "run.n")
    if n < 1:
        _fail("run.n", "n must be >= 1")
    s = _number(u["s"], "run.s")
    if s < 0:
        _fail("run.s", "s must be >= 0")
    b = _number(u["b"], "run.b")
    if b <= 0:
        _fail("run.b", "b must be > 0")
    grids = {}
    for key in ("grid_a", "grid_q"):
        grid = _number_list(u[key], f"run.{key}")
        if grid is not None and min(grid) <= 0:
            _fail(f"run.{key}", "entries must be > 0")
        grids[key] = grid
    checkpoints = _number_list(u["checkpoints"], "run.checkpoints")
    if checkpoints is None or min(checkpoints) <= 0:
        _fail("run.checkpoints", "must be a nonempty list of times > 0")
    log_paths = _integer(u["log_paths"], "run.log_paths")
    if log_paths < 1:
        _fail("run.log_paths", "log_paths must be >= 1")
    return RunSpec(n, s, b, grids["grid_a"], grids["grid_q"], checkpoints, log_paths)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return parse_config(text)


def to_document(cfg: RunConfig) -> Dict[str, Any]:
    """Canonical mapping form of a configuration with every default spelled out."""
    m = cfg.model
    model: Dict[str, Any] = {
        "mu": m.drift,
        "alpha": m.unit_jump_size,
        "lambda": m.unit_jump_rate,
        "lambda_prime": m.compound_rate,
    }
    if isinstance(m.jump_dist, Exponential):
        model["jump"] = {"dist": "exponential", "eta": m.jump_dist.rate}
    elif isinstance(m.jump_dist, Gamma):
        model["jump"] = {"dist": "gamma", "beta": m.jump_dist.shape, "eta": m.jump_dist.rate}
    run = cfg.run
    return {
        "model": model,
        "policy": {"x": cfg.policy.initial_stock, "a": cfg.policy.reorder_offset, "Q": cfg.policy.order_quantity},
        "rates": {"C_o": cfg.rates.ordering, "C_h": cfg.rates.holding, "C_so": cfg.rates.stockout},
        "series": {
            "epsilon": cfg.series.tail_mass_tol,
            "max_unit_index": cfg.series.max_unit_index,
            "max_compound_index": cfg.series.max_compound_index,
            "max_replenishments": cfg.series.max_replenishments,
        },
        "quadrature": {"nodes": cfg.quadrature.nodes, "scheme": cfg.quadrature.scheme},
        "mc": {
            "paths": cfg.mc.paths,
            "horizon": cfg.mc.horizon,
            "seed": cfg.mc.seed,
            "confidence_level": cfg.mc.confidence_level,
        },
        "output": {"format": cfg.output.format, "path": cfg.output.path},
        "run": {
            "n": run.n,
            "s": run.s,
            "b": run.b,
            "grid_a": None if run.grid_a is None else list(run.grid_a),
            "grid_q": None if run.grid_q is None else list(run.grid_q),
            "checkpoints": list(run.checkpoints),
            "log_paths": run.log_paths,
        },
    }


def dump_config(cfg: RunConfig) -> str:
    """Canonical YAML text; ``parse_config(dump_config(c)) == c``."""
    return yaml.safe_dump(to_document(cfg), sort_keys=False, default_flow_style=None)
