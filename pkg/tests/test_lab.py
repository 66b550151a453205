import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from torusnodal import cli, io
from torusnodal.eigenfunction import SMOOTH_E65, Eigenfunction
from torusnodal.errors import PreconditionError
from torusnodal.lab import (ExperimentConfig, ExperimentReport, parallel_map, plot_nodal_svg, random_ramana_tuples,
                            run, tightest_window)
from torusnodal.lattice import enumerate_circle
from torusnodal.nodal import extract_nodal_set

SVG = "{http://www.w3.org/2000/svg}"


def test_config_rejects_unknown_and_bad_values():
    with pytest.raises(PreconditionError, match="unknown"):
        ExperimentConfig.from_dict({"experiment": "lattice", "Nn": 5})
    with pytest.raises(PreconditionError):
        ExperimentConfig.from_dict({"experiment": "nope"})
    with pytest.raises(PreconditionError):
        ExperimentConfig.from_dict({"experiment": "widths", "cells_per_wavelength": 4})
    with pytest.raises(PreconditionError):
        ExperimentConfig.from_dict({"N": 5})


def test_config_energy_filter():
    cfg = ExperimentConfig("widths", energy_range=[1, 30], r2_min=12)
    assert cfg.energy_list() == [25]
    assert ExperimentConfig("widths").energy_list() == [25, 325, 1105, 4225, 5525]


def test_config_echoed(tmp_path):
    cfg = ExperimentConfig("lattice", N=30)
    run(cfg).write(tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["config"] == cfg.to_dict()
    assert doc["schema_version"] == io.SCHEMA_VERSION


def test_lattice_census_small():
    rep = run(ExperimentConfig("lattice", N=100))
    Es = [r["E"] for r in rep.records]
    brute = [E for E in range(1, 101) if any(a * a + b * b == E for a in range(11) for b in range(11))]
    assert Es == brute
    assert rep.passed and all(v["passed"] for v in rep.invariants.values() if v["hard"])
    assert rep.tables["lattice"][0][0] == "E"


def test_lattice_census_empty():
    rep = run(ExperimentConfig("lattice", N=0))
    assert rep.records == [] and rep.passed
    assert cli.main(["lattice", "--set", "N=0", "--out", "/tmp/torusnodal_empty"]) == 0


def test_tightest_window():
    c = enumerate_circle(65)
    pts = tightest_window(c, 2)
    d2 = (pts[0].a - pts[1].a) ** 2 + (pts[0].b - pts[1].b) ** 2
    assert d2 == 4


def test_random_tuples_deterministic():
    a = random_ramana_tuples(20, 1000, 3)
    b = random_ramana_tuples(20, 1000, 3)
    assert a == b
    assert all(2 <= len(p) <= 6 for _, p in a)


def test_parallel_map_matches_serial():
    items = list(range(7))
    assert parallel_map(abs, items, 1) == parallel_map(abs, items, 2)


def test_reports_reproducible(tmp_path):
    for exp, extra in (("lattice", {"N": 60}), ("appendix", {"samples": 41}),
                       ("widths", {"energies": [65, 325], "separated_energies": [29]}),
                       ("functheory", {"ensemble_size": 2, "doubling_functions": 1, "turan_cases": 3,
                                       "grid_n": 256, "equality_grid_n": 4096})):
        cfg = ExperimentConfig(exp, **extra)
        run(cfg).write(tmp_path / "a")
        run(cfg).write(tmp_path / "b")
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_jobs_do_not_change_report(tmp_path):
    cfg = ExperimentConfig("lattice", N=80)
    run(cfg).write(tmp_path / "a")
    run(cfg.replace(jobs=2)).write(tmp_path / "b")
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    a["config"].pop("jobs"), b["config"].pop("jobs")
    assert a == b


def test_svg_smooth65(tmp_path):
    phi = Eigenfunction.from_expression(SMOOTH_E65)
    curves = extract_nodal_set(phi, 16)
    p1 = plot_nodal_svg(phi, tmp_path / "a.svg")
    p2 = plot_nodal_svg(phi, tmp_path / "b.svg")
    assert p1.read_bytes() == p2.read_bytes()
    root = ET.parse(p1).getroot()
    paths = root.findall(f"{SVG}path")
    assert len(paths) == len(curves) > 0


def test_svg_empty():
    text = io.nodal_svg([], 1.0)
    root = ET.fromstring(text)
    assert root.findall(f"{SVG}path") == []


def test_svg_pieces_stay_in_domain():
    phi = Eigenfunction.from_sincos([("sin", 1.0, (3, 2))], convention="unit")
    curves = extract_nodal_set(phi, 16)
    for c in curves:
        for piece in io._subpaths(c.vertices, c.closed, 1.0):
            # at most one segment end may poke out of [0, 1]
            inside = np.all((piece >= -1e-12) & (piece <= 1 + 1e-12), axis=1)
            assert inside.sum() >= len(piece) - 2


def test_plot_experiment_singular_styling():
    rep = run(ExperimentConfig("plot", function="crossing65"))
    (name, text), = rep.svgs.items()
    assert "stroke-dasharray" in text
    assert rep.records[0]["singular_points"] == 32


def test_cli_exit_codes(tmp_path, monkeypatch):
    def fake(hard, passed):
        def runner(cfg):
            r = ExperimentReport(cfg.experiment, cfg.to_dict())
            r.check("x", passed, hard)
            return r
        return runner

    monkeypatch.setattr(cli, "run", fake(True, False))
    assert cli.main(["lattice", "--out", str(tmp_path / "h")]) == 1
    monkeypatch.setattr(cli, "run", fake(False, False))
    assert cli.main(["lattice", "--out", str(tmp_path / "s")]) == 0
    monkeypatch.setattr(cli, "run", fake(True, True))
    assert cli.main(["lattice", "--out", str(tmp_path / "ok")]) == 0


def test_cli_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "lattice", "N": 20}))
    assert cli.main(["lattice", "--config", str(cfg), "--seed", "4", "--out", str(tmp_path / "o")]) == 0
    doc = json.loads((tmp_path / "o" / "report.json").read_text())
    assert doc["config"]["N"] == 20 and doc["config"]["seed"] == 4
    assert cli.main(["widths", "--config", str(cfg)]) == 2
    assert cli.main(["lattice", "--set", "unknown=1"]) == 2


def test_csv_and_json_helpers(tmp_path):
    io.write_csv(tmp_path / "t.csv", ["a", "b"], [[1, 0.1], [2, True]])
    assert (tmp_path / "t.csv").read_text() == "a,b\n1,0.1\n2,1\n"
    assert json.loads(io.dumps({"x": np.float64(1.5), "n": float("nan"), "z": 1 + 2j})) == \
        {"x": 1.5, "n": "nan", "z": {"re": 1.0, "im": 2.0}}
