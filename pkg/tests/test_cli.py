from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from cohesilab.catalog import KINDS
from cohesilab.cli import main, worker_count
from cohesilab.config import StudyConfig
from cohesilab.errors import ValidationError
from cohesilab.io import read_dataset
from cohesilab.response import snap_back_state

from conftest import functions

SMALL = """
kinds = ["L12"]
ell = [10, 5]
threads = 1

[grid]
count = 16

[oracle]
n_nodes = 201
steps = 30
U_max = 0.12

[profiles]
alpha_star = [0.3, 0.7]
n_points = 21
"""


@pytest.fixture
def study(tmp_path):
    path = tmp_path / "study.toml"
    path.write_text(SMALL, encoding="utf-8")
    return path


def _run(study, tmp_path, *args):
    out = tmp_path / "out"
    return main([*args, "--config", str(study), "--out", str(out)]), out


def _tree(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_catalog_table(study, tmp_path, capsys):
    code, out = _run(study, tmp_path, "catalog", "--kinds", "all")
    assert code == 0
    ds = read_dataset(out / "catalog" / "catalog.json")
    assert ds.rows.shape[0] == len(KINDS)
    assert np.allclose(ds.column("cw"), 1.0, atol=1e-8)
    linear = ds.rows[list(KINDS).index("L12")]
    assert linear[ds.columns.index("delta_bar")] == pytest.approx(0.08)
    assert "L12" in capsys.readouterr().out


def test_respond_matches_linear_law(study, tmp_path):
    code, out = _run(study, tmp_path, "respond")
    assert code == 0
    for ell in ("10", "5"):
        folder = out / "respond" / "L12" / f"ell_{ell}"
        tsl = read_dataset(folder / f"L12_ell_{ell}_tsl.csv")
        delta, sigma = tsl.column("delta"), tsl.column("sigma")
        expected = 3.0 * (1.0 - delta / 0.08)
        assert np.all(np.abs(sigma - expected) <= 1e-3 * np.maximum(np.abs(expected), 1e-3))
        glob = read_dataset(folder / f"L12_ell_{ell}_global.json")
        assert glob.provenance["material"]["ell"] == float(ell)
        assert glob.provenance["kind"] == "L12"
        assert (folder / f"L12_ell_{ell}_global.svg").read_text().startswith("<svg")


def test_profiles_grouped(study, tmp_path):
    code, out = _run(study, tmp_path, "profiles", "--ell", "10")
    assert code == 0
    ds = read_dataset(out / "profiles" / "L12" / "ell_10" / "L12_ell_10_profiles.json")
    assert sorted(set(ds.column("alpha_star"))) == [0.3, 0.7]
    svg = (out / "profiles" / "L12" / "ell_10" / "L12_ell_10_profiles_alpha.svg").read_text()
    assert svg.count("<polyline") == 2


def test_oracle_linear_report(study, tmp_path):
    code, out = _run(study, tmp_path, "oracle", "--ell", "10")
    assert code == 0
    report = json.loads((out / "oracle" / "L12" / "ell_10" / "report.json").read_text())
    assert report["deviation"]["passed"]
    assert report["snap_back"] is None and not report["partial"]
    trace = read_dataset(out / "oracle" / "L12" / "ell_10" / "L12_ell_10_trace.csv")
    assert trace.rows.shape[0] == 30


def test_oracle_dugdale_reports_snap_back(study, tmp_path):
    code, out = _run(study, tmp_path, "oracle", "--kinds", "D1", "--ell", "10")
    report = json.loads((out / "oracle" / "D1" / "ell_10" / "report.json").read_text())
    sb = report["snap_back"]
    assert sb is not None
    ref = snap_back_state(functions("D1"))
    assert sb["U"] == pytest.approx(ref.U_crit, rel=1e-9)
    assert sb["alpha_star"] == pytest.approx(ref.alpha_crit, rel=1e-6)
    # the bar oracle is compared against the reference and reports a miss with exit 1
    assert code == (0 if report["deviation"]["passed"] else 1)


def test_sidecar_when_json_disabled(study, tmp_path):
    study.write_text(SMALL + "\n[emit]\njson = false\nsvg = false\n", encoding="utf-8")
    code, out = _run(study, tmp_path, "respond", "--ell", "10")
    assert code == 0
    folder = out / "respond" / "L12" / "ell_10"
    names = sorted(p.name for p in folder.iterdir())
    assert "L12_ell_10_global.provenance.json" in names
    assert not any(n.endswith(".svg") for n in names)
    assert json.loads((folder / "L12_ell_10_global.provenance.json").read_text())["kind"] == "L12"


def test_sweep_is_deterministic(study, tmp_path, monkeypatch):
    code_a, a = main(["sweep", "--config", str(study), "--out", str(tmp_path / "a")]), tmp_path / "a"
    monkeypatch.setenv("COHESILAB_THREADS", "2")
    study.write_text(SMALL.replace("threads = 1", "threads = 2"), encoding="utf-8")
    code_b, b = main(["sweep", "--config", str(study), "--out", str(tmp_path / "b")]), tmp_path / "b"
    assert code_a == code_b == 0
    ta, tb = _tree(a), _tree(b)
    assert ta.keys() == tb.keys()
    assert ta == tb
    assert "sweep/summary.csv" in ta


class TestExitCodes:
    def test_bad_config(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("ell = [-1]\n", encoding="utf-8")
        assert main(["catalog", "--config", str(path), "--out", str(tmp_path / "o")]) == 2

    def test_unparsable_config(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text("kinds = [\n", encoding="utf-8")
        assert main(["catalog", "--config", str(path)]) == 2
        assert "line" in capsys.readouterr().err

    def test_unknown_kind(self, study, tmp_path):
        assert _run(study, tmp_path, "catalog", "--kinds", "L12,Z9")[0] == 2

    def test_bad_internal_length(self, study, tmp_path):
        assert _run(study, tmp_path, "respond", "--ell", "ten")[0] == 2

    def test_bad_thread_variable(self, study, tmp_path, monkeypatch):
        monkeypatch.setenv("COHESILAB_THREADS", "many")
        assert _run(study, tmp_path, "respond")[0] == 2

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as info:
            main(["bake"])
        assert info.value.code == 2


class TestWorkers:
    def test_capped_by_environment(self, monkeypatch):
        monkeypatch.setenv("COHESILAB_THREADS", "3")
        assert worker_count(StudyConfig(threads=8), 10) == 3
        assert worker_count(StudyConfig(threads=8), 2) == 2

    def test_config_value(self, monkeypatch):
        monkeypatch.delenv("COHESILAB_THREADS", raising=False)
        assert worker_count(StudyConfig(threads=2), 10) == 2

    @pytest.mark.parametrize("value", ["0", "-1", "x"])
    def test_invalid(self, monkeypatch, value):
        monkeypatch.setenv("COHESILAB_THREADS", value)
        with pytest.raises(ValidationError):
            worker_count(StudyConfig(), 4)


def test_verify_linear_kind(study, tmp_path, capsys):
    code, out = _run(study, tmp_path, "verify", "--ell", "10")
    report = json.loads((out / "verify" / "report.json").read_text())
    assert code == 0 and report["passed"]
    assert report["counts"]["fail"] == 0 and report["counts"]["error"] == 0
    names = {c["name"] for c in report["checks"]}
    assert "oracle.mesh_convergence[L12]" in names
    text = capsys.readouterr().out
    assert text.rstrip().endswith(f"{len(names)}/{len(names)} checks passed")
    assert (out / "verify" / "report.txt").read_text().count("PASS") == len(names)
