import json
import os
import subprocess
import sys
from io import StringIO

import pytest

from stctl.cli import (
    EXIT_FAILS,
    EXIT_HOLDS,
    EXIT_INCONCLUSIVE,
    EXIT_INPUT,
    BenchPoint,
    RunConfig,
    bench_point,
    bench_sweep,
    main,
    parse_range,
    render_table,
    run,
)
from stctl.engine import explore
from stctl.language import parse_model, parse_property
from stctl.oracle import enumerate_and_check
from stctl.voting import generate_voting


def write_voting(tmp_path, v, c, coalition, prop=None):
    model, default = generate_voting(v, c, coalition)
    (tmp_path / "m.model").write_text(model)
    (tmp_path / "p.prop").write_text(prop or default)
    return str(tmp_path / "m.model"), str(tmp_path / "p.prop")


def verify(m, p, **kw):
    out, err = StringIO(), StringIO()
    code = run(RunConfig(m, p, **kw), out, err)
    return code, out.getvalue(), err.getvalue()


def test_run_config_defaults_and_validation():
    cfg = RunConfig("m", "p")
    assert cfg.timeout_seconds == 120.0 and cfg.threads == 1 and cfg.output_format == "text"
    for bad in ({"timeout_seconds": -1}, {"max_states": -1}, {"output_format": "xml"}, {"threads": 0}):
        with pytest.raises(ValueError):
            RunConfig("m", "p", **bad)


def test_voting_strategy_found(tmp_path):
    code, out, err = verify(*write_voting(tmp_path, 1, 2, [1]), oracle_cross_check=True)
    assert code == EXIT_HOLDS
    assert "V1.deciding -> vote1_1" in out
    assert "termination: Complete" in out
    assert "oracle: agrees" in err


def test_unreachable_proposition_fails(tmp_path):
    m, p = write_voting(tmp_path, 1, 2, [1], "#synth <<V1>> E F[0;8] voted_1_2 & voted_1_1\n")
    code, out, _ = verify(m, p)
    assert code == EXIT_FAILS
    assert "strategies: 0" in out


def test_missing_property_file(tmp_path):
    m, _ = write_voting(tmp_path, 1, 1, [1])
    code, _, err = verify(m, str(tmp_path / "absent.prop"))
    assert code == EXIT_INPUT and "cannot read" in err


def test_parse_errors_are_input_errors(tmp_path):
    m, p = write_voting(tmp_path, 1, 1, [1], "#synth <<V9>> E F[0;8] voted_1_1\n")
    code, _, err = verify(m, p)
    assert code == EXIT_INPUT and "unknown agent" in err and err.startswith(p + ":")
    (tmp_path / "bad.model").write_text("agent { }")
    code, _, err = verify(str(tmp_path / "bad.model"), p)
    assert code == EXIT_INPUT and err.startswith(str(tmp_path / "bad.model") + ":")


def test_budget_exhaustion_is_inconclusive(tmp_path):
    m, p = write_voting(tmp_path, 2, 2, [1], "#synth <<V1>> A G[0;8] !voted_1_2\n")
    code, out, _ = verify(m, p, max_states=3)
    assert code == EXIT_INCONCLUSIVE and "StateBudget" in out


def test_json_and_text_agree(tmp_path):
    m, p = write_voting(tmp_path, 2, 2, [1, 2])
    _, text, _ = verify(m, p)
    code, js, _ = verify(m, p, output_format="json")
    report = json.loads(js)
    assert code == EXIT_HOLDS
    assert set(report) == {"mode", "verdict", "strategies", "stats", "termination"}
    assert {"explored", "frontierPeak", "wallSeconds"} <= set(report["stats"])
    assert report["verdict"] is True and "verdict: true" in text
    assert f"strategies: {len(report['strategies'])}" in text
    for s in report["strategies"]:
        for b in s["bindings"]:
            assert f"  {b['agent']}.{b['location']} -> {b['action']}" in text
    assert f"explored: {report['stats']['explored']}" in text


def test_no_timing_json_is_byte_identical(tmp_path):
    m, p = write_voting(tmp_path, 2, 3, [1, 2])
    runs = [verify(m, p, output_format="json", timing=False)[1] for _ in range(2)]
    assert runs[0] == runs[1]
    assert json.loads(runs[0])["stats"]["wallSeconds"] is None
    threaded = json.loads(verify(m, p, output_format="json", timing=False, threads=4)[1])
    assert threaded["strategies"] == json.loads(runs[0])["strategies"]


def test_main_verify_and_exit_code(tmp_path, capsys):
    m, p = write_voting(tmp_path, 1, 1, [1])
    assert main(["verify", m, p, "--format", "json", "--no-timing"]) == EXIT_HOLDS
    assert json.loads(capsys.readouterr().out)["termination"] == "Complete"


def test_gen_voting_is_deterministic(tmp_path, capsys):
    assert main(["gen-voting", "--voters", "2", "--candidates", "3", "--coalition", "1,2"]) == 0
    first = capsys.readouterr().out
    main(["gen-voting", "--voters", "2", "--candidates", "3", "--coalition", "1,2"])
    assert capsys.readouterr().out == first
    assert main(["gen-voting", "--voters", "2", "--candidates", "3", "--coalition", "1,2",
                 "--out", str(tmp_path)]) == 0
    model, prop = generate_voting(2, 3, [1, 2])
    assert (tmp_path / "voting.model").read_text() == model
    assert (tmp_path / "voting.prop").read_text() == prop


def test_gen_voting_rejects_bad_coalition(capsys):
    assert main(["gen-voting", "--voters", "1", "--candidates", "1", "--coalition", "2"]) == EXIT_INPUT
    with pytest.raises(ValueError):
        generate_voting(0, 1, [1])


def test_generated_model_structure():
    model, prop = generate_voting(2, 2, [1, 2])
    n = parse_model(model)
    assert [g.name for g in n.agents] == ["V1", "V2", "EC"]
    assert prop == "#synth <<V1, V2>> E F[0;8] voted_1_1\n"


@pytest.mark.parametrize("v, c, coal, count", [(1, 1, [1], 1), (1, 2, [1], 1), (2, 2, [1, 2], 2)])
def test_generated_strategy_counts_match_oracle(v, c, coal, count):
    model, prop = generate_voting(v, c, coal)
    n = parse_model(model)
    p = parse_property(prop, n)
    r = explore(n, p)
    assert r.strategies == enumerate_and_check(n, p).strategies
    assert len(r.strategies) == count


def test_parse_range():
    assert parse_range("1..3") == [1, 2, 3]
    assert parse_range("2,1,2") == [1, 2]
    for bad in ("3..1", "0", ""):
        with pytest.raises(ValueError):
            parse_range(bad)


def test_table_golden():
    pts = [BenchPoint(1, 1, 1, 0.01, 2, 1, "Complete"), BenchPoint(1, 2, 1, 0.02, 4, 1, "Complete"),
           BenchPoint(2, 1, 1, 0.5, 8, 1, "Complete"), BenchPoint(2, 2, 1, 120.0, 9, 0, "Timeout")]
    assert render_table(pts) == (
        "+-----+---+------+---------+\n"
        "| |A| | v |  c=1 |     c=2 |\n"
        "+-----+---+------+---------+\n"
        "|   1 | 1 | 0.01 |    0.02 |\n"
        "|   1 | 2 | 0.50 | timeout |\n"
        "+-----+---+------+---------+\n"
    )
    assert "|   1 | 2 |   8 | timeout |" in render_table(pts, "states")


def test_sweep_small():
    pts = bench_sweep([1], [1, 2], [1])
    assert [(p.v, p.c, p.termination) for p in pts] == [(1, 1, "Complete"), (1, 2, "Complete")]
    assert bench_sweep([1], [1], [2]) == []  # |A| > v is skipped


def test_timeout_cell():
    pt = bench_point(3, 3, 3, timeout=1e-9)
    assert pt.termination == "Timeout"
    assert "timeout" in render_table([pt])


def test_bench_records(tmp_path, capsys):
    rec = tmp_path / "r.json"
    assert main(["bench", "--voters", "1", "--candidates", "1..2", "--cells", "states",
                 "--records", str(rec)]) == 0
    assert "|   1 | 1 |   2 |   4 |" in capsys.readouterr().out
    assert [p["explored_states"] for p in json.loads(rec.read_text())] == [2, 4]


def test_numpy_fallback_gives_identical_report(tmp_path):
    m, p = write_voting(tmp_path, 2, 2, [1, 2])
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, STCTL_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-m", "stctl", "verify", m, p, "--format", "json",
                               "--no-timing"], capture_output=True, text=True, env=env)
        assert proc.returncode == EXIT_HOLDS, proc.stderr
        outs.append(proc.stdout)
    assert outs[0] == outs[1]
