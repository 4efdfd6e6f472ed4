import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qconverse import channel, cli
from qconverse.sdpcore.serialize import loads


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound_example_records(capsys):
    code, out, _ = run(["bound", "--builtin", "erasure:d=2,p=0.5", "--bounds", "mw,ns,meta", "--eps", "0.1"], capsys)
    assert code == 0
    recs = json.loads(out)
    assert [r["bound"] for r in recs] == ["mw", "ns", "meta"]
    by = {r["bound"]: r for r in recs}
    assert by["meta"]["value_bits"] <= by["mw"]["value_bits"] + 1e-6
    for r in recs:
        assert r["status"] == "optimal" and r["seed"] == 0 and r["eps"] == 0.1
        assert r["channel"] == "erasure:d=2,p=0.5"
        assert {"gap", "residual_primal", "residual_dual", "wall_time_ms", "solver_iterations"} <= set(r)


def test_constant_channel_example(capsys):
    code, out, _ = run(["bound", "--builtin", "constant:d=2", "--bounds", "mw", "--eps", "0.25"], capsys)
    assert code == 0
    assert json.loads(out)[0]["value_bits"] == pytest.approx(-math.log2(0.75), abs=1e-6)


def test_missing_file_exits_2(capsys, tmp_path):
    path = tmp_path / "absent.json"
    code, _, err = run(["bound", "--channel", str(path)], capsys)
    assert code == 2 and str(path) in err


@pytest.mark.parametrize(
    "argv",
    [
        ["bound", "--builtin", "erasure:d2"],
        ["bound", "--builtin", "warp:d=2"],
        ["bound", "--builtin", "erasure:d=2,p=0.5", "--bounds", "nope"],
        ["bound", "--builtin", "erasure:d=2,p=0.5", "--eps", "x"],
        ["bound"],
        ["scan", "--builtin", "erasure:d=2,p=0.5", "--vary", "p"],
        ["verify", "--suite", "imaginary"],
    ],
)
def test_malformed_input_exits_2(argv, capsys):
    assert run(argv, capsys)[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["erasure", "--p", "1.5"],
        ["bound", "--builtin", "noiseless:m=2", "--eps", "1"],
        ["bound", "--builtin", "noiseless:m=2", "--eps", "0"],
        ["scan", "--builtin", "erasure:d=2,p=0.5", "--vary", "p=0.5,1.5"],
        ["erasure", "--moderate", "--n", "1000000", "--a-exponent", "0"],
    ],
)
def test_domain_violation_exits_4(argv, capsys):
    assert run(argv, capsys)[0] == 4


def test_solver_failure_exits_3(capsys, monkeypatch):
    from qconverse import bounds
    from qconverse.sdpcore import SolverConfig

    real = bounds.BOUNDS["mw"]
    monkeypatch.setitem(bounds.BOUNDS, "mw", lambda c, eps: bounds.mw_bound(c, eps, cfg=SolverConfig(max_iterations=1)))
    code, out, _ = run(["bound", "--builtin", "noiseless:m=2"], capsys)
    assert code == 3
    rec = json.loads(out)[0]
    assert rec["status"] != "optimal" and rec["value_bits"] is None
    assert bounds.BOUNDS["mw"] is not real


def test_channel_file(capsys, tmp_path):
    path = tmp_path / "c.json"
    channel.save_spec(channel.choi_to_spec(channel.erasure_channel(2, 0.5), "file-erasure"), path)
    code, out, _ = run(["bound", "--channel", str(path), "--eps", "0.1"], capsys)
    assert code == 0
    rec = json.loads(out)[0]
    assert rec["channel"] == "file-erasure"
    assert rec["value_bits"] == pytest.approx(-math.log2(0.8), abs=1e-6)


def test_json_output_is_byte_identical_across_runs(capsys):
    argv = ["bound", "--builtin", "random:din=2,dout=2,seed=3", "--bounds", "mw,ns", "--eps", "0.1,0.2"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second


def test_csv_and_json_carry_identical_numbers(capsys):
    base = ["scan", "--builtin", "erasure:d=2,p=0.5", "--vary", "p=0.2:0.8:3", "--bounds", "mw", "--eps", "0.1"]
    _, js, _ = run(base, capsys)
    _, cs, _ = run(base + ["--format", "csv"], capsys)
    recs = json.loads(js)
    rows = list(csv.DictReader(io.StringIO(cs)))
    assert len(rows) == len(recs) == 3
    for rec, row in zip(recs, rows):
        assert set(row) == set(rec)
        for key, value in rec.items():
            if isinstance(value, float):
                assert float(row[key]) == value
            else:
                assert row[key] == str(value)


def test_threaded_output_keeps_grid_order(capsys, monkeypatch):
    argv = ["bound", "--builtin", "erasure:d=2,p=0.3", "--bounds", "mw,ns", "--eps", "0.05,0.1,0.2"]
    _, serial, _ = run(argv, capsys)
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    _, threaded, _ = run(argv, capsys)
    assert serial == threaded


def test_bad_thread_count(capsys, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    assert run(["bound", "--builtin", "noiseless:m=2"], capsys)[0] == 2


def test_timing_is_opt_in(capsys):
    _, out, _ = run(["bound", "--builtin", "noiseless:m=2", "--timing"], capsys)
    assert json.loads(out)[0]["wall_time_ms"] > 0


def test_dump_writes_loadable_programs(capsys, tmp_path):
    code, _, _ = run(["bound", "--builtin", "noiseless:m=2", "--bounds", "mw,meta", "--eps", "0.1,0.2", "--dump", str(tmp_path)], capsys)
    assert code == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ["meta-0.sdp", "meta-1.sdp", "mw-0.sdp", "mw-1.sdp"]
    form = loads((tmp_path / "mw-0.sdp").read_text())
    assert form.A.shape[0] == len(form.b)


def test_erasure_columns(capsys):
    code, out, _ = run(["erasure", "--d", "2", "--p", "0.5", "--n", "100,1000", "--eps", "0.05"], capsys)
    assert code == 0
    recs = json.loads(out)
    assert [r["n"] for r in recs] == [100, 1000]
    for r in recs:
        assert {"exact_bits", "first_order_bits", "second_order_bits", "residual_bits"} <= set(r)
    assert abs(recs[1]["residual_bits"]) / 1000 < abs(recs[0]["residual_bits"]) / 100


def test_moderate_columns(capsys):
    code, out, _ = run(["erasure", "--moderate", "--a-exponent", "1/3", "--n", "10000"], capsys)
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["rate_low"] < rec["exact_rate_low"] <= rec["exact_rate_high"]
    assert {"eps_n", "rate_high", "exact_rate_high", "a_n"} <= set(rec)


def test_verify_text_report(capsys):
    code, out, _ = run(["verify", "--suite", "activation", "--samples", "2", "--seed", "5"], capsys)
    assert code == 0
    assert out.splitlines()[0].startswith("PASS activation: 4 checks")
    assert out.splitlines()[-1] == "seed 5"


def test_verify_json_report(capsys):
    code, out, _ = run(["verify", "--suite", "strong-converse", "--suite", "second-order", "--format", "json"], capsys)
    assert code == 0
    assert [r["suite"] for r in json.loads(out)] == ["strong-converse", "second-order"]


def test_number_encoding():
    assert cli.encode_number(float("inf")) == "+inf"
    assert cli.encode_number(float("nan")) == "nan-rejected"
    assert cli.encode_number(0.1) == 0.1
    assert cli.parse_floats("0:1:3", "x") == [0.0, 0.5, 1.0]
    assert cli.parse_floats("1/4,0.5", "x") == [0.25, 0.5]


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.csv"
    assert run(["bound", "--builtin", "noiseless:m=2", "--format", "csv", "--output", str(target)], capsys)[0] == 0
    assert target.read_text().startswith("channel,bound,eps,value_bits")


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "qconverse.cli", "bound", "--builtin", "noiseless:m=2"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)[0]["bound"] == "mw"
