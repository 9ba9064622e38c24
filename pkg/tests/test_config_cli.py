import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from corrdyn.checks import run_checks
from corrdyn.cli import main
from corrdyn.config import load_scenario
from corrdyn.errors import ConfigError
from corrdyn.hilbert import Statistics, read_operator
from corrdyn.report import CheckReport, parse_jsonl, render_jsonl, render_table

REPO = Path(__file__).resolve().parents[1]
SCENARIOS = REPO / "scenarios"

MINIMAL = """
[system]
d = 2
stats = boltzmann
n_max = 2
seed = 3

[one_body]
rows =
    0+0j 1+0j
    1+0j 0+0j

[initial]
kind = random
seed = 3

[run]
times = 0.0 0.2
checks = norm_bound
"""


def write_cfg(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_config_parses(tmp_path):
    cfg = load_scenario(write_cfg(tmp_path, MINIMAL))
    assert cfg.d == 2 and cfg.stats is Statistics.BOLTZMANN and cfg.n_max == 2
    assert cfg.checks == ("norm_bound",)
    assert cfg.potentials == {}
    assert cfg.tolerance("norm_bound") == 1e-12


def test_missing_scenario_file():
    with pytest.raises(ConfigError, match="not found"):
        load_scenario("/nonexistent/path.cfg")


def test_missing_matrix_file_names_path(tmp_path):
    text = MINIMAL.replace("rows =\n    0+0j 1+0j\n    1+0j 0+0j", "file = missing.op")
    with pytest.raises(ConfigError, match="missing.op"):
        load_scenario(write_cfg(tmp_path, text))


def test_non_hermitian_one_body_reports_deviation(tmp_path):
    text = MINIMAL.replace("0+0j 1+0j\n    1+0j 0+0j", "0+0j 1+0j\n    0+0j 0+0j")
    with pytest.raises(ConfigError, match="deviation"):
        load_scenario(write_cfg(tmp_path, text))


def test_unknown_check_rejected(tmp_path):
    text = MINIMAL.replace("checks = norm_bound", "checks = not_a_check")
    with pytest.raises(ConfigError, match="unknown check"):
        load_scenario(write_cfg(tmp_path, text))


def test_chaos_initial_requires_hermitian_matrix(tmp_path):
    text = MINIMAL.replace(
        "kind = random\nseed = 3",
        "kind = chaos\nrows =\n    0.5+0j 0.1+0j\n    0.1+0j 0.5+0j",
    )
    cfg = load_scenario(write_cfg(tmp_path, text))
    assert cfg.initial.kind == "chaos"
    assert np.allclose(cfg.initial.g1, cfg.initial.g1.conj().T)


def test_matrix_row_shape_errors(tmp_path):
    text = MINIMAL.replace("0+0j 1+0j\n    1+0j 0+0j", "0+0j 1+0j")
    with pytest.raises(ConfigError, match="rows"):
        load_scenario(write_cfg(tmp_path, text))


def test_tolerance_override(tmp_path):
    text = MINIMAL + "\n[tolerances]\nnorm_bound = 1e-6\n"
    cfg = load_scenario(write_cfg(tmp_path, text))
    assert cfg.tolerance("norm_bound") == 1e-6


# ---------------------------------------------------------------- reports

def test_empty_check_list_gives_header_only_pass(tmp_path):
    text = MINIMAL.replace("checks = norm_bound", "checks =")
    cfg = load_scenario(write_cfg(tmp_path, text))
    report = run_checks(cfg)
    assert report.records == ()
    assert report.overall_pass
    table = render_table(report)
    assert "overall PASS" in table


def test_jsonl_roundtrip_is_bit_exact(tmp_path):
    cfg = load_scenario(write_cfg(tmp_path, MINIMAL))
    report = run_checks(cfg)
    text = render_jsonl(report)
    back = parse_jsonl(text)
    assert back.scenario_digest == report.scenario_digest
    for orig, parsed in zip(report.records, back.records):
        assert parsed.residual == orig.residual  # bit-exact through 17 digits
        assert parsed.tolerance == orig.tolerance
        assert parsed.passed == orig.passed


def test_failing_record_fails_report():
    from corrdyn.report import CheckRecord

    rep = CheckReport(
        scenario_digest="x",
        records=(
            CheckRecord(name="a", inputs="", residual=0.0, tolerance=1.0, passed=True),
            CheckRecord(name="b", inputs="", residual=2.0, tolerance=1.0, passed=False),
        ),
    )
    assert not rep.overall_pass
    assert "FAIL" in render_table(rep)


# ---------------------------------------------------------------- cli

def test_cli_check_exit_status(tmp_path):
    path = write_cfg(tmp_path, MINIMAL)
    assert main(["check", str(path)]) == 0


def test_cli_check_jsonl_output_file(tmp_path):
    path = write_cfg(tmp_path, MINIMAL)
    out = tmp_path / "report.jsonl"
    assert main(["check", str(path), "--format", "jsonl", "--out", str(out)]) == 0
    parsed = parse_jsonl(out.read_text())
    assert parsed.overall_pass


def test_cli_parallel_matches_serial(tmp_path):
    path = write_cfg(
        tmp_path, MINIMAL.replace("checks = norm_bound", "checks = norm_bound cumulant_zero_time")
    )
    out_a, out_b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["check", str(path), "--format", "jsonl", "--out", str(out_a)]) == 0
    assert main(["check", str(path), "--format", "jsonl", "--out", str(out_b), "--parallel"]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_cli_evolve_writes_parseable_operators(tmp_path):
    path = write_cfg(tmp_path, MINIMAL)
    out = tmp_path / "f1.ops"
    assert main(["evolve", str(path), "--s", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("time 0")
    with out.open() as fh:
        times = []
        ops = []
        for line in fh:
            if line.startswith("time "):
                times.append(float(line.split()[1]))
                ops.append(read_operator(fh))
    assert times == [0.0, 0.2]
    assert all(op.n == 1 for op in ops)
    # reduced operator of a unit-trace state keeps its trace under the flow
    assert np.isclose(ops[0].trace().real, ops[1].trace().real, atol=1e-10)


def test_cli_evolve_rejects_bad_order(tmp_path):
    path = write_cfg(tmp_path, MINIMAL)
    assert main(["evolve", str(path), "--s", "9"]) == 2


def test_cli_info_runs(tmp_path, capsys):
    path = write_cfg(tmp_path, MINIMAL)
    assert main(["info", str(path)]) == 0
    captured = capsys.readouterr().out
    assert "matrix side" in captured and "partitions" in captured


def test_cli_reports_config_errors(tmp_path, capsys):
    bad = write_cfg(tmp_path, "[system\nd = 2\n")
    assert main(["check", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_corrupted_potential_breaks_symmetry_check(tmp_path):
    # Hermitian but not factor-swap symmetric; strict validation off lets it
    # through to the checks, where the symmetry suite localizes the damage.
    text = """
[system]
d = 2
stats = bose
n_max = 3
seed = 5
strict_potentials = false

[one_body]
rows =
    0+0j 1+0j
    1+0j 0+0j

[potential.2]
rows =
    1+0j 0+0j 0+0j 0+0j
    0+0j 0+0j 0.5+0j 0+0j
    0+0j 0.5+0j -1+0j 0+0j
    0+0j 0+0j 0+0j 0+0j

[initial]
kind = random
seed = 5

[run]
checks = symmetry_preservation
"""
    path = write_cfg(tmp_path, text)
    cfg = load_scenario(path)
    report = run_checks(cfg)
    assert not report.overall_pass
    record = report.records[0]
    assert record.name == "symmetry_preservation"
    assert "evolved" in record.inputs  # locates the transform that broke it
    assert main(["check", str(path)]) == 1


def test_strict_validation_rejects_corrupted_potential(tmp_path):
    text = """
[system]
d = 2
stats = bose
n_max = 2
seed = 5

[one_body]
rows =
    0+0j 1+0j
    1+0j 0+0j

[potential.2]
rows =
    1+0j 0+0j 0+0j 0+0j
    0+0j 0+0j 0.5+0j 0+0j
    0+0j 0.5+0j -1+0j 0+0j
    0+0j 0+0j 0+0j 0+0j

[initial]
kind = random

[run]
checks = norm_bound
"""
    path = write_cfg(tmp_path, text)
    cfg = load_scenario(path)
    # load passes (couplings validated by the dynamics layer), run reports it
    report = run_checks(cfg)
    assert not report.overall_pass
    assert report.records[0].error is not None


def test_cli_evolve_from_sequence_file(tmp_path):
    import numpy as np

    from corrdyn.hilbert import random_sequence, write_sequence

    rng = np.random.default_rng(17)
    d_seq = random_sequence(rng, 2, Statistics.BOLTZMANN, 2, positive=True, f0=1.0)
    seq_path = tmp_path / "initial.seq"
    with seq_path.open("w") as fh:
        write_sequence(d_seq, fh)
    text = MINIMAL.replace("kind = random\nseed = 3", "kind = file\npath = initial.seq")
    path = write_cfg(tmp_path, text)
    out = tmp_path / "f1.ops"
    assert main(["evolve", str(path), "--s", "1", "--out", str(out)]) == 0
    with out.open() as fh:
        fh.readline()  # time 0
        op0 = read_operator(fh)
    assert op0.n == 1


def test_determinism_scenario_reports_are_byte_identical(tmp_path):
    scenario = SCENARIOS / "determinism.cfg"
    outputs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.jsonl"
        proc = subprocess.run(
            [sys.executable, "-m", "corrdyn.cli", "check", str(scenario),
             "--format", "jsonl", "--out", str(out)],
            capture_output=True,
            cwd=REPO,
        )
        assert proc.returncode == 0, proc.stderr.decode()
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
