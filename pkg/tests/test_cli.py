import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from twophase.cli import main


def _read_csv(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [dict(zip(header, row)) for row in reader]
    return header, rows


def test_kernel1d_default_run(tmp_path):
    rc = main(["kernel1d", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = _read_csv(tmp_path / "kernel1d.csv")
    assert header == ["x1", "t", "u_quadrature", "u_closed_form", "abs_diff"]
    for row in rows:
        assert abs(float(row["u_quadrature"]) - 2.0 / 3.0) < 1e-10
        assert float(row["abs_diff"]) < 1e-10
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["tool"] == "twophase"
    assert manifest["subcommand"] == "kernel1d"
    assert "config" in manifest and "version" in manifest


def test_kernel1d_custom_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "medium": {"sigma_s": 4.0, "sigma_m": 1.0},
        "x1": [0.0],
        "t": [0.5, 2.0],
    }))
    rc = main(["kernel1d", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    _, rows = _read_csv(tmp_path / "kernel1d.csv")
    for row in rows:
        assert abs(float(row["u_closed_form"]) - 1.0 / 3.0) < 1e-12


def test_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"no_such_option": 1}))
    assert main(["kernel1d", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_malformed_json_rejected(tmp_path):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{not json")
    assert main(["kernel1d", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_config_root_must_be_object(tmp_path):
    cfg = tmp_path / "list.json"
    cfg.write_text("[1, 2]")
    assert main(["kernel1d", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_helicoid_seeded_runs_are_byte_identical(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_samples": 20000, "symmetry_samples": 2000}))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["helicoid", "--config", str(cfg), "--seed", "7",
                 "--out", str(out1)]) == 0
    assert main(["helicoid", "--config", str(cfg), "--seed", "7",
                 "--out", str(out2)]) == 0
    assert (out1 / "helicoid.json").read_bytes() == \
        (out2 / "helicoid.json").read_bytes()
    records = json.loads((out1 / "helicoid.json").read_text())
    assert all(set(r) >= {"test", "estimate", "stderr", "n", "seed", "pass"}
               for r in records)


def test_extract_curvature_sphere(tmp_path):
    rc = main(["extract-curvature", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = _read_csv(tmp_path / "extract_curvature.csv")
    assert header == ["lambda", "normal_derivative", "detrended",
                      "fit_constant", "sigma_kappa_estimate"]
    estimate = float(rows[0]["sigma_kappa_estimate"])
    assert abs(estimate - 2.0) < 0.02


def test_maxprinciple_json_report(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 10, "n": 16}))
    rc = main(["maxprinciple", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    rep = json.loads((tmp_path / "maxprinciple.json").read_text())
    assert rep["trials"] == 10
    assert rep["min_value"] >= -1e-10
    assert rep["lambda0_counterexample"]["min_interior"] < -0.4


def test_wkb_ray_table(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"surface": {"variant": "cylinder", "R": 2.0},
                               "order": 1, "n_points": 9}))
    rc = main(["wkb", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    header, rows = _read_csv(tmp_path / "wkb.csv")
    assert header[:2] == ["tau", "A0"]
    assert float(rows[0]["A0"]) == 1.0
    assert float(rows[0]["A1_plus"]) == 0.0


def test_simulate_and_transform(tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"t_grid": [0.01, 0.1], "h_fine": 5e-3}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    _, rows = _read_csv(tmp_path / "simulate.csv")
    assert all(abs(float(r["u"]) - 2.0 / 3.0) < 1e-4 for r in rows)

    cfg2 = tmp_path / "tr.json"
    cfg2.write_text(json.dumps({"lambdas": [100.0], "probes": [0.0, 0.2],
                                "t_end": 0.3, "h_fine": 2e-3}))
    assert main(["transform", "--config", str(cfg2), "--out", str(tmp_path)]) == 0
    _, rows = _read_csv(tmp_path / "transform.csv")
    assert all(float(r["diff"]) < 1e-3 for r in rows)


def test_graph_surface_spec_parses_but_is_unsupported_here(tmp_path):
    # the spec parses (reachable from config) and the run fails numerically:
    # barrier tables exist for the catalog surfaces only
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "surface": {"variant": "graph", "quadratic": [[1.0, 0.0], [0.0, 1.0]],
                    "box": [[-1.0, 1.0], [-1.0, 1.0]]},
        "order": 1, "n_points": 5}))
    rc = main(["wkb", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 1


def test_unknown_surface_variant(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"surface": {"variant": "torus"}}))
    assert main(["wkb", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_all_subcommand_runs_selected_criteria(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(
        {"criteria": ["interface-constant-1d", "maximum-principle"]}))
    rc = main(["all", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2
    report = json.loads((tmp_path / "acceptance.json").read_text())
    assert len(report) == 2
    assert all(r["pass"] for r in report)
