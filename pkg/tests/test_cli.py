"""CLI subcommands, config round-trip, exit codes, artifact formats."""

import pytest

from nlstree.cli import main
from nlstree.config import CapsConfig, DatumConfig, RunConfig
from nlstree.errors import ValidationError


def _write_config(tmp_path, **overrides):
    defaults = dict(
        seed=11,
        n_cutoff=2,
        max_degree=3,
        tau=0.4,
        grid_points=3,
        datum=DatumConfig(source="random", support=1, decay=0.5, scale=0.1, l1_target=0.15),
        gap_times=(0.01, 0.03, 0.1),
        truncation_list=(2, 4),
    )
    defaults.update(overrides)
    cfg = RunConfig(**defaults).validate()
    path = tmp_path / "run.ini"
    cfg.to_file(path)
    return cfg, path


def test_config_round_trip(tmp_path):
    cfg, path = _write_config(
        tmp_path,
        omega=-1,
        s=0.5,
        caps=CapsConfig(tree_degree=5, eps_sum=1000),
        datum=DatumConfig(source="single_mode", amplitude=0.25, mode=1),
    )
    assert RunConfig.from_file(path) == cfg
    assert RunConfig.from_text(cfg.to_text()) == cfg


def test_config_partial_file_uses_defaults(tmp_path):
    path = tmp_path / "partial.ini"
    path.write_text("[equation]\nomega = -1\n")
    cfg = RunConfig.from_file(path)
    assert cfg.omega == -1
    assert cfg.max_degree == RunConfig().max_degree


def test_config_validation():
    with pytest.raises(ValidationError):
        RunConfig(omega=3).validate()
    with pytest.raises(ValidationError):
        RunConfig(datum=DatumConfig(source="nope")).validate()
    with pytest.raises(ValidationError):
        RunConfig.from_text("[series]\nmax_degree = frog\n")


def test_missing_config_exits_one(tmp_path, capsys):
    code = main(["solve", "--config", str(tmp_path / "absent.ini")])
    assert code == 1
    assert "kind=validation" in capsys.readouterr().err


def test_bad_value_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[equation]\nomega = 5\n")
    assert main(["solve", "--config", str(path)]) == 1


def test_budget_exceeded_exits_two(tmp_path, capsys):
    _, path = _write_config(tmp_path, max_degree=9)  # above the degree cap
    code = main(
        ["enumerate", "--config", str(path), "--out", str(tmp_path / "o"), "--cache", str(tmp_path / "c")]
    )
    assert code == 2
    assert "kind=budget" in capsys.readouterr().err


def test_enumerate_artifacts(tmp_path):
    _, path = _write_config(tmp_path, max_degree=2)
    out, cache = tmp_path / "o", tmp_path / "c"
    assert main(["enumerate", "--config", str(path), "--out", str(out), "--cache", str(cache)]) == 0
    lines = (cache / "trees_k2.txt").read_text().splitlines()
    assert len(lines) == 12
    counts = (out / "counts.csv").read_text().splitlines()
    assert counts[0] == "k,shapes,ornamented"
    assert counts[3] == "2,3,12"
    manifest = (out / "manifest.txt").read_text()
    assert manifest.startswith("nlstree version = ")
    assert "[equation]" in manifest


def test_solve_zero_datum(tmp_path):
    _, path = _write_config(tmp_path, datum=DatumConfig(source="zero"))
    out = tmp_path / "o"
    assert main(["solve", "--config", str(path), "--out", str(out), "--cache", str(tmp_path / "c")]) == 0
    rows = (out / "solution.csv").read_text().splitlines()
    assert rows == ["t,n,re,im,degree_tail_estimate"]


def test_solve_and_compare(tmp_path):
    _, path = _write_config(tmp_path)
    out = tmp_path / "o"
    cache = tmp_path / "c"
    assert main(["solve", "--config", str(path), "--out", str(out), "--cache", str(cache)]) == 0
    header = (out / "solution.csv").read_text().splitlines()[0]
    assert header == "t,n,re,im,degree_tail_estimate"
    assert main(["compare", "--config", str(path), "--out", str(out), "--cache", str(cache)]) == 0
    comparison = (out / "comparison.csv").read_text().splitlines()
    assert comparison[0] == "t,sup_diff"
    worst = max(float(r.split(",")[1]) for r in comparison[1:])
    assert worst <= 1e-8


def test_coeffs_artifacts(tmp_path):
    _, path = _write_config(tmp_path, max_degree=1)
    out = tmp_path / "o"
    assert main(["coeffs", "--config", str(path), "--out", str(out), "--cache", str(tmp_path / "c")]) == 0
    coeff_lines = (out / "coefficients.csv").read_text().splitlines()
    assert coeff_lines[0] == "tree_hash,assignment_hash,t,re,im"
    assert len(coeff_lines) > 1
    bound_lines = (out / "bounds.csv").read_text().splitlines()
    assert all(line.endswith(",1") for line in bound_lines[1:])


def test_diagnose_passes_and_writes_reports(tmp_path):
    _, path = _write_config(tmp_path, max_degree=4, datum=DatumConfig(source="random", support=2, l1_target=0.2), truncation_list=(2, 4, 8))
    out = tmp_path / "o"
    assert main(["diagnose", "--config", str(path), "--out", str(out), "--cache", str(tmp_path / "c")]) == 0
    for name in (
        "frozen_report.csv",
        "l1_identity.csv",
        "divisor_stats.csv",
        "smoothing_gap.csv",
        "truncation_limit.csv",
    ):
        assert (out / name).exists(), name
    frozen_header = (out / "frozen_report.csv").read_text().splitlines()[0]
    assert frozen_header == "tree,assignment_id,node_id,sigma,rho,label"


def test_reruns_are_byte_identical(tmp_path):
    _, path = _write_config(tmp_path)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    cache = tmp_path / "c"
    for out in (out1, out2):
        assert main(["solve", "--config", str(path), "--out", str(out), "--cache", str(cache)]) == 0
    assert (out1 / "solution.csv").read_bytes() == (out2 / "solution.csv").read_bytes()
    assert (out1 / "manifest.txt").read_bytes() == (out2 / "manifest.txt").read_bytes()
