"""Command-line front end.

Usage::

    levy-inventory SUBCOMMAND CONFIG.yaml [flags]

Subcommands: ``moments``, ``tail``, ``cost``, ``longrun``, ``simulate`` and
``sweep``.  Output goes to stdout (or ``--out``) as CSV or JSON.  Exit status
is 0 on success, 1 for invalid input and 2 for numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import replace
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .cost import (
    expected_total_cost,
    long_run_average_cost,
    cost_sweep,
)
from .distribution import demand_tail
from .errors import DomainError, NumericalError, ParameterError, QuadratureWarning
from .first_passage import fpt_moments
from .montecarlo import McConfig, RngStream, estimate_cost, estimate_fpt_moments, estimate_tail, simulate_path

__all__ = ["main", "OUTPUT_SCHEMA", "SWEEP_HEADER"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

SWEEP_HEADER = ("a", "Q", "t", "ordering", "holding", "stockout", "total")
EVENT_HEADER = ("path_id", "time", "jump_size", "source")

_SCALAR = {"type": ["number", "string", "integer", "null"]}
OUTPUT_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "status"],
    "properties": {
        "command": {"enum": ["moments", "tail", "cost", "longrun", "simulate", "sweep"]},
        "status": {"enum": ["ok", "error"]},
        "columns": {"type": "array", "items": {"type": "string"}},
        "records": {"type": "array", "items": {"type": "object", "additionalProperties": _SCALAR}},
        "argmin": {"type": ["object", "null"], "additionalProperties": _SCALAR},
        "warnings": {"type": "array", "items": {"type": "string"}},
        "error": {
            "type": "object",
            "required": ["code", "message"],
            "properties": {
                "code": {"enum": ["validation_error", "numerical_error", "io_error"]},
                "message": {"type": "string"},
            },
        },
    },
    "allOf": [
        {
            "if": {"properties": {"status": {"const": "ok"}}},
            "then": {"required": ["columns", "records"]},
            "else": {"required": ["error"]},
        }
    ],
    "additionalProperties": False,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _positive_float(text):
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be a finite number > 0, got {text!r}")
    return value


def _nonnegative_float(text):
    value = float(text)
    if not (math.isfinite(value) and value >= 0):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {text!r}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be an integer >= 1, got {text!r}")
    return value


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"must be in [0, 2**64), got {text!r}")
    return value


def _float_list(text):
    try:
        values = tuple(_positive_float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("config", help="YAML run configuration")
    common.add_argument("--format", choices=("csv", "json"), help="output format (overrides output.format)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=_seed, help="Monte Carlo master seed")
    common.add_argument("--paths", type=_positive_int, help="Monte Carlo path count")
    common.add_argument("--t", type=_positive_float, help="time horizon (overrides mc.horizon)")
    common.add_argument("--event-log", metavar="PATH", help="also write per-path events as CSV")

    parser = _Parser(prog="levy-inventory", description="Inventory control under Levy subordinator demand.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("moments", parents=[common], help="closed-form vs simulated reorder-time moments")
    p.add_argument("--n", type=_positive_int, help="order index")
    p = sub.add_parser("tail", parents=[common], help="series vs simulated P(D_s >= b)")
    p.add_argument("--s", type=_nonnegative_float, help="time s")
    p.add_argument("--b", type=_positive_float, help="demand level b")
    sub.add_parser("cost", parents=[common], help="analytic and simulated cost breakdown")
    p = sub.add_parser("longrun", parents=[common], help="long-run average cost and finite-t trace")
    p.add_argument("--checkpoints", type=_float_list, help="comma-separated horizons")
    p = sub.add_parser("simulate", parents=[common], help="dump demand events of sample paths")
    p.add_argument("--log-paths", type=_positive_int, help="number of paths to dump")
    p = sub.add_parser("sweep", parents=[common], help="expected total cost over an (a, Q) grid")
    p.add_argument("--grid-a", type=_float_list, help="comma-separated a values")
    p.add_argument("--grid-q", type=_float_list, help="comma-separated Q values")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    mc = cfg.mc
    mc = McConfig(
        paths=args.paths if args.paths is not None else mc.paths,
        horizon=args.t if args.t is not None else mc.horizon,
        seed=args.seed if args.seed is not None else mc.seed,
        confidence_level=mc.confidence_level,
    )
    run = cfg.run
    changes = {}
    for flag, key in (("n", "n"), ("s", "s"), ("b", "b"), ("grid_a", "grid_a"), ("grid_q", "grid_q"),
                      ("checkpoints", "checkpoints"), ("log_paths", "log_paths")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[key] = value
    run = replace(run, **changes)
    output = cfg.output
    if args.format is not None:
        output = replace(output, format=args.format)
    if args.out is not None:
        output = replace(output, path=args.out)
    return replace(cfg, mc=mc, run=run, output=output)


def _verdict(inside: bool) -> str:
    return "within CI" if inside else "outside CI"


def _cmd_moments(cfg: RunConfig):
    n = cfg.run.n
    closed = fpt_moments(cfg.model, cfg.policy, n)
    mean, var = estimate_fpt_moments(cfg.model, cfg.policy, n, cfg.mc)
    columns = ["n", "quantity", "closed_form", "mc_estimate", "std_error", "ci_low", "ci_high", "verdict"]
    records = []
    for name, value, est in (("mean", closed.mean, mean), ("variance", closed.variance, var)):
        records.append(dict(zip(columns, (n, name, value, est.mean, est.std_error, est.ci_low, est.ci_high,
                                          _verdict(est.covers(value))))))
    return columns, records, None


def _cmd_tail(cfg: RunConfig):
    s, b = cfg.run.s, cfg.run.b
    series = demand_tail(cfg.model, s, b, cfg.series)
    est = estimate_tail(cfg.model, s, b, cfg.mc)
    columns = ["s", "b", "series", "mc_estimate", "std_error", "ci_low", "ci_high", "verdict"]
    row = (s, b, series, est.mean, est.std_error, est.ci_low, est.ci_high, _verdict(est.covers(series)))
    return columns, [dict(zip(columns, row))], None


def _cmd_cost(cfg: RunConfig):
    t = cfg.mc.horizon
    analytic = expected_total_cost(cfg.model, cfg.policy, cfg.rates, t, cfg.series, cfg.quadrature)
    mc = estimate_cost(cfg.model, cfg.policy, cfg.rates, t, cfg.mc)
    columns = ["source", "t", "ordering", "holding", "stockout", "total", "std_error", "ci_low", "ci_high", "verdict"]
    ref = mc.without_stockout
    records = [
        dict(zip(columns, ("analytic", t, analytic.ordering, analytic.holding, analytic.stockout,
                           analytic.total, None, None, None, None))),
        dict(zip(columns, ("mc", t, mc.ordering.mean, mc.holding.mean, mc.stockout.mean, mc.total.mean,
                           mc.total.std_error, mc.total.ci_low, mc.total.ci_high, None))),
        # the analytic path neglects stockout, so it is judged against ordering + holding
        dict(zip(columns, ("mc_without_stockout", t, mc.ordering.mean, mc.holding.mean, 0.0, ref.mean,
                           ref.std_error, ref.ci_low, ref.ci_high, _verdict(ref.covers(analytic.total))))),
    ]
    return columns, records, None


def _cmd_longrun(cfg: RunConfig):
    limit = long_run_average_cost(cfg.model, cfg.rates, cfg.policy.initial_stock)
    columns = ["t", "total", "total_per_time", "long_run", "relative_gap"]
    records = []
    for t in cfg.run.checkpoints:
        bd = expected_total_cost(cfg.model, cfg.policy, cfg.rates, t, cfg.series, cfg.quadrature,
                                 check_resolution=False)
        per = bd.total / t
        gap = (per - limit) / limit if limit != 0 else None
        records.append(dict(zip(columns, (t, bd.total, per, limit, gap))))
    records.append(dict(zip(columns, ("inf", None, limit, limit, 0.0))))
    return columns, records, None


def _event_rows(cfg: RunConfig) -> List[Dict[str, Any]]:
    rows = []
    for path_id in range(cfg.run.log_paths):
        for ev in simulate_path(cfg.model, cfg.mc.horizon, RngStream(cfg.mc.seed, path_id)):
            rows.append(dict(zip(EVENT_HEADER, (path_id, ev.time, ev.jump_size, ev.source))))
    return rows


def _cmd_simulate(cfg: RunConfig):
    return list(EVENT_HEADER), _event_rows(cfg), None


def _cmd_sweep(cfg: RunConfig):
    grid_a = cfg.run.grid_a or (cfg.policy.reorder_offset,)
    grid_q = cfg.run.grid_q or (cfg.policy.order_quantity,)
    t = cfg.mc.horizon
    result = cost_sweep(cfg.model, cfg.rates, cfg.policy.initial_stock, grid_a, grid_q, t,
                        cfg.series, cfg.quadrature)
    records = []
    for row in result.rows:
        bd = row.breakdown
        values = (row.a, row.Q, t) + ((bd.ordering, bd.holding, bd.stockout, bd.total) if bd else (None,) * 4)
        rec = dict(zip(SWEEP_HEADER, values))
        if row.error:
            rec["error"] = row.error
        records.append(rec)
    argmin = None if result.argmin is None else records[result.argmin]
    return list(SWEEP_HEADER), records, argmin


_COMMANDS = {
    "moments": _cmd_moments,
    "tail": _cmd_tail,
    "cost": _cmd_cost,
    "longrun": _cmd_longrun,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
}


def _cell(value) -> str:
    # shortest round-trip text for floats keeps golden files stable
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _render_csv(columns: Sequence[str], records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_cell(rec.get(c)) for c in columns])
    return buf.getvalue()


def _render_json(payload: Dict[str, Any]) -> str:
    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [clean(v) for v in obj]
        return _jsonable(obj)

    return json.dumps(clean(payload), indent=2, allow_nan=False) + "\n"


def _emit(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _error(command, fmt, code, message, out_path) -> None:
    if fmt == "json":
        payload = {"command": command, "status": "error", "error": {"code": code, "message": message}}
        try:
            _emit(_render_json(payload), out_path)
        except OSError:
            sys.stdout.write(_render_json(payload))
    sys.stderr.write(f"levy-inventory: {code}: {message}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(parser.format_usage())
        sys.stderr.write(f"levy-inventory: error: {exc}\n")
        return EXIT_VALIDATION

    command = args.command
    fmt = args.format or "csv"
    out_path = args.out
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except (ConfigError, ParameterError) as exc:
        _error(command, fmt, "validation_error", str(exc), out_path)
        return EXIT_VALIDATION
    fmt, out_path = cfg.output.format, cfg.output.path

    caught: List[str] = []
    try:
        with warnings.catch_warnings(record=True) as seen:
            warnings.simplefilter("always", QuadratureWarning)
            columns, records, argmin = _COMMANDS[command](cfg)
            caught = sorted({str(w.message) for w in seen if issubclass(w.category, QuadratureWarning)})
        if args.event_log and command != "simulate":
            _emit(_render_csv(EVENT_HEADER, _event_rows(cfg)), args.event_log)
    except (ParameterError, DomainError) as exc:
        _error(command, fmt, "validation_error", str(exc), out_path)
        return EXIT_VALIDATION
    except NumericalError as exc:
        _error(command, fmt, "numerical_error", f"{type(exc).__name__}: {exc}", out_path)
        return EXIT_NUMERICAL

    for message in caught:
        sys.stderr.write(f"levy-inventory: warning: {message}\n")
    if fmt == "json":
        payload = {"command": command, "status": "ok", "columns": list(columns), "records": records}
        if command == "sweep":
            payload["argmin"] = argmin
        if caught:
            payload["warnings"] = caught
        text = _render_json(payload)
    else:
        text = _render_csv(columns, records)
        if command == "sweep":
            for rec in records:
                if "error" in rec:
                    sys.stderr.write(f"levy-inventory: cell a={rec['a']!r} Q={rec['Q']!r} failed: {rec['error']}\n")
            if argmin is not None:
                sys.stderr.write("argmin," + ",".join(_cell(argmin[c]) for c in SWEEP_HEADER) + "\n")
    try:
        _emit(text, out_path)
        if command == "simulate" and args.event_log:
            _emit(text, args.event_log)
    except OSError as exc:
        _error(command, "csv", "io_error", str(exc), None)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
