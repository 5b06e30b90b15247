import csv
import json

import numpy as np
import pytest

from willmore_lab import harness
from willmore_lab.grid import DiskGrid
from willmore_lab.harness import CSV_HEADER, Config, ConfigError, gap_experiment, main, parse_config_text


def _csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_config_parsing_and_validation():
    cfg = parse_config_text("# comment\ngrid.n = 65\nimmersion.t=0.1  # trailing\n\n")
    assert cfg == {"grid.n": "65", "immersion.t": "0.1"}
    with pytest.raises(ConfigError):
        parse_config_text("grid.n 65")
    with pytest.raises(ConfigError):
        Config({"grid.size": "65"})
    with pytest.raises(ConfigError):
        Config({"immersion.": "x"})
    c = Config({"probe.centers": "0,0;0.1,-0.2"})
    assert c.centers() == [(0.0, 0.0), (0.1, -0.2)]
    with pytest.raises(ConfigError):
        Config({"seed": str(2**64)}).seed()


def test_config_hash_ignores_output_dir():
    a = Config({"output.dir": "a", "run.workers": "3"})
    b = Config({"output.dir": "b"})
    assert a.hash("analyze") == b.hash("analyze")
    assert a.hash("analyze") != Config({"grid.n": "65"}).hash("analyze")


def test_catalog_command(tmp_path, capsys):
    assert main(["catalog", "--output", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert sum(1 for line in out.splitlines() if " -- " in line) == 6
    rows = _csv(tmp_path / "catalog.csv")
    assert tuple(rows[0]) == CSV_HEADER
    assert {r[1] for r in rows[1:]} == {"plane", "graph_bump", "sphere", "catenoid", "enneper", "clifford"}


def test_analyze_plane_all_zero(tmp_path):
    assert main(["analyze", "--immersion", "plane", "--grid", "65", "--output", str(tmp_path), "--check"]) == 0
    rows = _csv(tmp_path / "analyze.csv")
    vals = {r[6]: float(r[7]) for r in rows[1:]}
    for k in ("H_max", "K_max", "A_max", "h0_max", "energy", "lambda_max"):
        assert vals[k] == 0.0


def test_verify_identities_sphere(tmp_path):
    assert main(["verify-identities", "--immersion", "sphere", "--grid", "129", "--output", str(tmp_path),
                 "--check"]) == 0
    keys = {r[6] for r in _csv(tmp_path / "verify_identities.csv")[1:]}
    assert {"backimm", "sysRS_R", "sysRS_S", "rotation_law", "dilation_law"} <= keys
    doc = json.loads((tmp_path / "verify_identities.json").read_text())
    assert doc["config_hash"] and doc["timestamp"] and len(doc["rows"]) == len(keys)


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense.key = 1\n")
    assert main(["analyze", "--config", str(bad), "--output", str(tmp_path)]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["analyze", "--immersion", "torus", "--output", str(tmp_path)]) == 2
    assert main(["analyze", "--grid", "64", "--output", str(tmp_path)]) == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text("probe.rho = 2.0\n")
    assert main(["verify-identities", "--config", str(cfg), "--output", str(tmp_path)]) == 2


def test_check_failure_exit_one(tmp_path, monkeypatch):
    def fake(cfg):
        return [harness.Row("x", "y", None, None, None, None, "k", 1.0)], [("always fails", False, "")]

    monkeypatch.setitem(harness.HANDLERS, "catalog", fake)
    assert main(["catalog", "--output", str(tmp_path), "--check"]) == 1
    assert main(["catalog", "--output", str(tmp_path)]) == 0


def test_solver_failure_exit(tmp_path, monkeypatch):
    def fake(cfg):
        return [harness.Row("x", "y", 33, 0.5, 0.0, 0.0, "solver_residual", 1.0, "solver-failure")], []

    monkeypatch.setitem(harness.HANDLERS, "analyze", fake)
    assert main(["analyze", "--output", str(tmp_path)]) == harness.EXIT_SOLVER


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("WILLMORE_LAB_OUTPUT", str(tmp_path / "env"))
    assert main(["catalog"]) == 0
    assert (tmp_path / "env" / "catalog.csv").exists()


def test_probe_theorem1_parallel_equals_serial(tmp_path):
    base = "immersion.name = graph_bump\nimmersion.t = 0.05\ngrid.n = 65\nprobe.rho = 0.5,0.25\n" \
           "probe.centers = 0,0;0.2,0.1\n"
    (tmp_path / "s.cfg").write_text(base + "run.workers = 1\n")
    (tmp_path / "p.cfg").write_text(base + "run.workers = 4\n")
    assert main(["probe-theorem1", "--config", str(tmp_path / "s.cfg"), "--output", str(tmp_path / "s")]) == 0
    assert main(["probe-theorem1", "--config", str(tmp_path / "p.cfg"), "--output", str(tmp_path / "p")]) == 0
    a = (tmp_path / "s" / "probe_theorem1.csv").read_bytes()
    b = (tmp_path / "p" / "probe_theorem1.csv").read_bytes()
    assert a == b
    rows = _csv(tmp_path / "s" / "probe_theorem1.csv")[1:]
    assert len({(r[3], r[4], r[5]) for r in rows}) == 4


def test_perturbed_immersion_from_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("immersion.name = sphere\nimmersion.perturbation.amplitude = 0.01\ngrid.n = 65\nseed = 5\n")
    assert main(["analyze", "--config", str(cfg), "--output", str(tmp_path)]) == 0
    rows = _csv(tmp_path / "analyze.csv")[1:]
    assert rows[0][1] == "sphere+pert5"


def test_q_field_from_wimm(tmp_path):
    from willmore_lab.geometry import write_wimm
    from willmore_lab.willmore import Q_PRESETS, q_from_coeffs
    from conftest import surface

    _, cd = surface("sphere", 65)
    q = q_from_coeffs(cd, Q_PRESETS["linear"])
    write_wimm(tmp_path / "q.wimm", q)
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"grid.n = 65\ninhomogeneity.tag = conformal_q\ninhomogeneity.q = {tmp_path / 'q.wimm'}\n")
    assert main(["verify-identities", "--config", str(cfg), "--output", str(tmp_path / "o"), "--check"]) == 0


def test_wente_suite_small(tmp_path):
    cfg = tmp_path / "w.cfg"
    cfg.write_text("wente.pairs = 4\nwente.grids = 33,65\n")
    assert main(["wente-suite", "--config", str(cfg), "--output", str(tmp_path)]) == 0
    rows = _csv(tmp_path / "wente_suite.csv")[1:]
    assert sum(1 for r in rows if r[6] == "ratio") == 8
    assert any(r[6] == "relative_change_n33_n65" for r in rows)


def test_bump_pairs_are_seeded():
    g = DiskGrid(33)
    a1, b1 = harness.bump_pair(3, 0, g)
    a2, b2 = harness.bump_pair(3, 0, g)
    a3, _ = harness.bump_pair(4, 0, g)
    assert np.array_equal(a1, a2) and np.array_equal(b1, b2) and not np.array_equal(a1, a3)


def test_gap_experiment_plane_member():
    reps = gap_experiment((0.05, 0.0), grid=DiskGrid(65))
    plane = reps[1].values
    assert plane["t"] == 0.0
    for k, v in plane.items():
        if k != "gap_regime_indicator":
            assert v == 0.0, k
    assert plane["gap_regime_indicator"] == 1.0


def test_gap_experiment_gate_and_monotonicity():
    reps = gap_experiment((0.1, 0.05, 0.025), grid=DiskGrid(65))
    assert reps[0].status == "out-of-hypothesis" and reps[0].values["gap_regime_indicator"] == 0.0
    assert reps[1].status == "ok" and reps[1].values["gap_regime_indicator"] == 1.0
    summary = reps[-1].values
    assert summary["eps0_strictly_decreasing"] == 1.0 and summary["contraction_strictly_decreasing"] == 1.0


def test_gap_experiment_rejects_bad_family(monkeypatch):
    with pytest.raises(ConfigError):
        gap_experiment((0.05, 0.05), grid=DiskGrid(33))
    monkeypatch.setattr(harness, "energy", lambda cd: 0.5)
    with pytest.raises(ConfigError):
        gap_experiment((0.05, 0.025), grid=DiskGrid(33))


def test_gap_cli(tmp_path):
    cfg = tmp_path / "g.cfg"
    cfg.write_text("grid.n = 65\ngap.amplitudes = 0.05,0.025,0.0125\n")
    assert main(["gap-experiment", "--config", str(cfg), "--output", str(tmp_path), "--check"]) == 0
    text = (tmp_path / "gap_experiment.csv").read_text()
    assert "gap_regime_indicator" in text and "flat" not in text
