import csv
import json
import re

import pytest

from perron_lab.cli import main
from perron_lab.experiments import (
    BAD_COLUMNS,
    ConfigError,
    ExperimentConfig,
    random_support,
    run_bad_experiment,
    run_good_experiment,
    run_verification_suites,
)


def write_cfg(tmp_path, **cfg):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return p


@pytest.mark.parametrize("raw,msg", [
    ({"experiment": "bad"}, "seed"),
    ({"experiment": "bad", "seed": 1, "colour": "red"}, "unknown"),
    ({"experiment": "nope", "seed": 1}, "experiment"),
    ({"experiment": "bad", "seed": -1}, "seed"),
    ({"experiment": "bad", "seed": 1, "delta_grid": [16, 8]}, "delta_grid"),
    ({"experiment": "good", "seed": 1, "p_list": [0.5]}, "p values"),
    ({"experiment": "bad", "seed": 1, "blocks": [2, 1]}, "blocks"),
    ({"experiment": "bad", "seed": 1, "h": "half"}, "invalid"),
])
def test_config_validation(raw, msg):
    with pytest.raises(ConfigError, match=msg):
        ExperimentConfig.from_dict(raw)


def test_seed_override_and_defaults():
    cfg = ExperimentConfig.from_dict({"experiment": "good"}, seed=5)
    assert cfg.seed == 5
    assert cfg.directions["kind"] == "lacunary"
    assert ExperimentConfig.from_dict({"experiment": "bad", "seed": 0}).directions["kind"] == "power"


def test_bad_refuses_unbounded_perron_factor():
    cfg = ExperimentConfig.from_dict({"experiment": "bad", "seed": 1, "directions": {"kind": "geometric", "base": 2}})
    with pytest.raises(ConfigError, match="Perron factor grows"):
        run_bad_experiment(cfg)


def test_good_refuses_non_lacunary():
    cfg = ExperimentConfig.from_dict({"experiment": "good", "seed": 1, "directions": {"kind": "power", "s": 1}})
    with pytest.raises(ConfigError, match="bad experiment"):
        run_good_experiment(cfg)


def test_bad_small_run_and_csv_columns(tmp_path):
    cfg = ExperimentConfig.from_dict({"experiment": "bad", "seed": 3, "blocks": [0, 1]})
    rep = run_bad_experiment(cfg)
    rows = rep.tables["bad"]
    assert len(rows) == 4
    assert all(r["criterion"] == "AC6" for r in rows)
    assert rows[0]["lambda"] == rows[0]["t0"] and rows[1]["lambda"] == rows[1]["t0"] / 2
    rep.write(tmp_path)
    text = (tmp_path / "metrics.csv").read_text()
    header = next(line for line in text.splitlines() if not line.startswith("#"))
    assert header.split(",") == list(BAD_COLUMNS)
    assert all(v["criterion"] in ("AC5", "AC6") and v["anchor"] for v in rep.verdicts)


def test_bad_partial_report_on_exhausted_grid():
    cfg = ExperimentConfig.from_dict({"experiment": "bad", "seed": 3, "blocks": [0, 1], "delta_grid": [0.5]})
    rep = run_bad_experiment(cfg)
    assert rep.failures and rep.failures[0]["reason"] == "delta grid exhausted"
    assert rep.exit_code == 2


def test_good_small_run_homogeneous_supports():
    cfg = ExperimentConfig.from_dict({"experiment": "good", "seed": 2, "rect_count": 10, "supports": [10, 50],
                                      "trials": 1, "p_list": [2]})
    rep = run_good_experiment(cfg)
    assert {r["family"] for r in rep.tables["good"]} == {"lacunary", "contrast"}
    assert all(v["criterion"] == "AC7" for v in rep.verdicts)


def test_random_support_is_seeded_and_sized():
    import numpy as np
    a = random_support(100, 0.1, np.random.default_rng(4))
    b = random_support(100, 0.1, np.random.default_rng(4))
    assert len(a) == 100 and len(a.as_set()) == 100
    assert np.array_equal(a.points, b.points)


def test_verification_suite_ids():
    cfg = ExperimentConfig.from_dict({"experiment": "transfer", "seed": 1, "K": 20})
    rep = run_verification_suites(cfg)
    assert [v["criterion"] for v in rep.verdicts] == ["AC8"]
    assert rep.passed


def test_cli_writes_deterministic_outputs(tmp_path, capsys):
    cfg = write_cfg(tmp_path, experiment="coboundary", seed=11, instances=30)
    assert main(["coboundary", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["coboundary", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    for name in ("report.json", "metrics.csv", "SCHEMA.md", "figures/coboundary.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert rep["status"] == "pass"
    assert all(v["criterion"].startswith("AC") for v in rep["verdicts"])
    out = capsys.readouterr().out
    assert "AC9" in out and "PASS" in out


def test_cli_seed_changes_output(tmp_path):
    cfg = write_cfg(tmp_path, experiment="coboundary", seed=11, instances=10)
    main(["coboundary", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["coboundary", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "12"])
    assert (tmp_path / "a" / "metrics.csv").read_bytes() != (tmp_path / "b" / "metrics.csv").read_bytes()


def test_svg_metadata_records_affine(tmp_path):
    cfg = write_cfg(tmp_path, experiment="lattice", seed=1, cases=5)
    main(["lattice", "--config", str(cfg), "--out", str(tmp_path)])
    svg = (tmp_path / "figures" / "density.svg").read_text()
    assert 'viewBox="0 0 1000 1000"' in svg
    meta = json.loads(re.search(r"<metadata>(.*)</metadata>", svg).group(1).replace("&quot;", '"'))
    assert set(meta["world_to_view"]) == {"ax", "bx", "ay", "by"}
    assert meta["world_to_view"]["ay"] < 0


@pytest.mark.parametrize("cfg", [
    {"experiment": "bad", "seed": 1, "directions": {"kind": "geometric", "base": 2}},
    {"experiment": "good", "seed": 1, "directions": {"kind": "power", "s": 1}},
    {"experiment": "good"},
    {"experiment": "lattice", "seed": 1, "bogus": 1},
])
def test_cli_config_errors_exit_1(tmp_path, cfg, capsys):
    p = write_cfg(tmp_path, **cfg)
    assert main([cfg["experiment"], "--config", str(p), "--out", str(tmp_path / "o")]) == 1
    assert "config error" in capsys.readouterr().err


def test_cli_mismatched_experiment_and_missing_file(tmp_path):
    p = write_cfg(tmp_path, experiment="lattice", seed=1)
    assert main(["transfer", "--config", str(p)]) == 1
    assert main(["transfer", "--config", str(tmp_path / "missing.json")]) == 1


def test_cli_partial_exit_2(tmp_path):
    p = write_cfg(tmp_path, experiment="trapezium", seed=1, cases=3, samples_per_case=10)
    code = main(["trapezium", "--config", str(p), "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "report.json").read_text())
    assert code == (0 if rep["status"] == "pass" else 2)
    with open(tmp_path / "metrics.csv") as fh:
        assert any("AC3" in row for row in csv.reader(fh))
