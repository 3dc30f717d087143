import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from levy_inventory.cli import OUTPUT_SCHEMA, SWEEP_HEADER, main

ROOT = Path(__file__).resolve().parents[1]
GENERALIZED = str(ROOT / "demos" / "configs" / "generalized.yaml")
POISSON = str(ROOT / "demos" / "configs" / "drifted_poisson.yaml")
FAST = ["--paths", "2000", "--t", "3"]

EXTRA = {
    "moments": [],
    "tail": [],
    "cost": [],
    "longrun": ["--checkpoints", "5,10"],
    "simulate": [],
    "sweep": ["--grid-a", "1,3", "--grid-q", "2"],
}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("command", list(EXTRA))
def test_csv_output(capsys, command):
    code, out, _ = run(capsys, command, GENERALIZED, *FAST, *EXTRA[command])
    assert code == 0
    assert rows(out)


@pytest.mark.parametrize("command", list(EXTRA))
def test_json_output_matches_schema(capsys, command):
    code, out, _ = run(capsys, command, GENERALIZED, *FAST, *EXTRA[command], "--format", "json")
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, OUTPUT_SCHEMA)
    assert payload["command"] == command and payload["status"] == "ok"


def test_moments_rows(capsys):
    _, out, _ = run(capsys, "moments", POISSON, "--paths", "5000")
    table = rows(out)
    assert [r["quantity"] for r in table] == ["mean", "variance"]
    assert float(table[0]["closed_form"]) == 1.0 and float(table[1]["closed_form"]) == 0.25
    assert all(r["verdict"] in ("within CI", "outside CI") for r in table)


def test_tail_flags_override_config(capsys):
    _, out, _ = run(capsys, "tail", POISSON, "--paths", "1000", "--s", "1.5", "--b", "2.5")
    row = rows(out)[0]
    assert (float(row["s"]), float(row["b"])) == (1.5, 2.5)


def test_cost_sources(capsys):
    _, out, _ = run(capsys, "cost", GENERALIZED, *FAST)
    table = rows(out)
    assert [r["source"] for r in table] == ["analytic", "mc", "mc_without_stockout"]
    assert float(table[0]["stockout"]) == 0.0


def test_longrun_ends_with_limit(capsys):
    _, out, _ = run(capsys, "longrun", GENERALIZED, "--checkpoints", "5")
    table = rows(out)
    assert table[-1]["t"] == "inf"
    assert float(table[-1]["long_run"]) == 2.0 * (1.0 + 1.0 + 0.5) + 0.5 * 10.0


def test_sweep_argmin_on_stderr(capsys):
    _, out, err = run(capsys, "sweep", GENERALIZED, "--t", "3", "--grid-a", "1,3", "--grid-q", "2,4")
    header = out.splitlines()[0].split(",")
    assert tuple(header) == SWEEP_HEADER
    totals = [float(r["total"]) for r in rows(out)]
    argmin_line = [ln for ln in err.splitlines() if ln.startswith("argmin,")][0]
    assert float(argmin_line.split(",")[-1]) == min(totals)


def test_simulate_event_log(capsys, tmp_path):
    log = tmp_path / "events.csv"
    code, out, _ = run(capsys, "simulate", GENERALIZED, "--t", "2", "--log-paths", "3", "--event-log", str(log))
    assert code == 0 and log.read_text() == out
    assert {r["path_id"] for r in rows(out)} <= {"0", "1", "2"}


def test_event_log_alongside_other_commands(capsys, tmp_path):
    log = tmp_path / "events.csv"
    run(capsys, "tail", POISSON, "--paths", "1000", "--event-log", str(log))
    assert log.read_text().startswith("path_id,time,jump_size,source\n")


def test_out_flag_writes_file(capsys, tmp_path):
    target = tmp_path / "tail.json"
    code, out, _ = run(capsys, "tail", POISSON, "--paths", "1000", "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    jsonschema.validate(json.loads(target.read_text()), OUTPUT_SCHEMA)


def write(tmp_path, text):
    path = tmp_path / "cfg.yaml"
    path.write_text(text)
    return str(path)


def test_validation_error_exit_code(capsys, tmp_path):
    cfg = write(tmp_path, "model: {mu: 1, lambda_prime: 1, jump: {dist: gamma, beta: 2, eta: -1}}\npolicy: {x: 1, a: 1, Q: 1}")
    code, out, err = run(capsys, "tail", cfg, "--format", "json")
    assert code == 1
    payload = json.loads(out)
    jsonschema.validate(payload, OUTPUT_SCHEMA)
    assert payload["error"]["code"] == "validation_error"
    assert "model.jump.eta" in payload["error"]["message"] and "eta" in err


def test_numerical_error_exit_code(capsys, tmp_path):
    cfg = write(
        tmp_path,
        "model: {mu: 1, lambda_prime: 1, jump: {dist: exponential, eta: 1}}\npolicy: {x: 1, a: 1, Q: 1}\n"
        "series: {max_compound_index: 3}\nrun: {s: 50, b: 60}\nmc: {paths: 100}",
    )
    code, out, _ = run(capsys, "tail", cfg, "--format", "json")
    assert code == 2
    assert json.loads(out)["error"]["code"] == "numerical_error"


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus", POISSON],
        ["tail", POISSON, "--paths", "0"],
        ["tail", POISSON, "--seed", "-3"],
        ["tail", POISSON, "--b", "nan"],
        ["sweep", POISSON, "--grid-a", "1,x"],
        ["tail", "/nonexistent/config.yaml"],
    ],
)
def test_bad_invocations_exit_1(capsys, argv):
    assert main(argv) == 1


def test_path_count_below_minimum_is_rejected(capsys):
    code, _, err = run(capsys, "tail", POISSON, "--paths", "50")
    assert code == 1 and "paths" in err


@settings(max_examples=40, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.text(max_size=60))
def test_fuzzed_config_text_never_crashes(capsys, tmp_path, text):
    cfg = write(tmp_path, text)
    assert main(["tail", cfg, "--paths", "100"]) in (0, 1)
    capsys.readouterr()


@settings(max_examples=30, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    st.sampled_from(["mu", "alpha", "lambda"]),
    st.one_of(st.floats(max_value=-1e-9), st.just("abc"), st.just(".nan"), st.just("[]")),
)
def test_fuzzed_invalid_parameters_exit_1(capsys, tmp_path, key, value):
    cfg = write(tmp_path, f"model: {{mu: 1, alpha: 1, lambda: 1, {key}: {value}}}\npolicy: {{x: 1, a: 1, Q: 1}}")
    assert main(["tail", cfg, "--paths", "100"]) == 1
    capsys.readouterr()


def test_repeat_runs_are_identical(capsys):
    first = run(capsys, "cost", GENERALIZED, *FAST)[1]
    second = run(capsys, "cost", GENERALIZED, *FAST)[1]
    assert first == second


def test_seed_changes_output(capsys):
    a = run(capsys, "tail", POISSON, "--paths", "1000", "--seed", "1")[1]
    b = run(capsys, "tail", POISSON, "--paths", "1000", "--seed", "2")[1]
    assert a != b


def test_console_script_matches_in_process(capsys):
    env = dict(os.environ, LEVY_INVENTORY_THREADS="2")
    proc = subprocess.run(
        [sys.executable, "-m", "levy_inventory.cli", "tail", POISSON, "--paths", "1000"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert proc.stdout == run(capsys, "tail", POISSON, "--paths", "1000")[1]
