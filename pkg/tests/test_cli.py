import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from fractal_spectra.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def test_build_level1(runner, tmp_path):
    res = runner.invoke(main, ["build", "--level", "1", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    assert "cone vertices: 18" in res.output
    audit = (tmp_path / "level1_d0_chain" / "curvature_audit.csv").read_text()
    lines = audit.strip().splitlines()[1:]
    cone_rows = [l for l in lines if l.split(",")[1] == "cone"]
    assert len(cone_rows) == 18
    assert (tmp_path / "level1_d0_chain" / "mesh.json").exists()
    assert (tmp_path / "level1_d0_chain" / "net.svg").exists()


def test_build_level0_gauss_bonnet(runner, tmp_path):
    res = runner.invoke(main, ["build", "--level", "0", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    audit = (tmp_path / "level0_d0_chain" / "curvature_audit.csv").read_text()
    total = sum(float(l.split(",")[2]) for l in audit.strip().splitlines()[1:])
    assert total == pytest.approx(4 * math.pi, abs=1e-8)


def test_build_depth_quadruples_triangles(runner, tmp_path):
    r0 = runner.invoke(main, ["build", "--level", "2", "--out", str(tmp_path)])
    r1 = runner.invoke(main, ["build", "--level", "2", "--depth", "1",
                              "--out", str(tmp_path)])
    assert r0.exit_code == 0 and r1.exit_code == 0
    n0 = len(json.loads((tmp_path / "level2_d0_chain" / "mesh.json").read_text())["triangles"])
    n1 = len(json.loads((tmp_path / "level2_d1_chain" / "mesh.json").read_text())["triangles"])
    assert n1 == 4 * n0


def test_spectrum_count_one(runner, tmp_path):
    res = runner.invoke(main, ["spectrum", "--level", "1", "--count", "1",
                               "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    lines = (tmp_path / "level1_d0_chain" / "spectrum.csv").read_text().strip().splitlines()
    assert len(lines) == 2
    idx, lam, res_ = lines[1].split(",")
    assert idx == "0"
    assert abs(float(lam)) <= 1e-8


def test_spectrum_cache_byte_identical(runner, tmp_path):
    args = ["spectrum", "--level", "1", "--count", "8", "--out", str(tmp_path)]
    r1 = runner.invoke(main, args)
    assert r1.exit_code == 0, r1.output
    first = (tmp_path / "level1_d0_chain" / "spectrum.csv").read_bytes()
    r2 = runner.invoke(main, args)
    assert r2.exit_code == 0
    second = (tmp_path / "level1_d0_chain" / "spectrum.csv").read_bytes()
    assert first == second
    # fresh (uncached) run reproduces the same bytes
    r3 = runner.invoke(main, args + ["--no-cache"])
    assert r3.exit_code == 0
    third = (tmp_path / "level1_d0_chain" / "spectrum.csv").read_bytes()
    assert first == third


def test_analyze_pipeline(runner, tmp_path):
    r1 = runner.invoke(main, ["spectrum", "--level", "2", "--count", "30",
                              "--out", str(tmp_path)])
    assert r1.exit_code == 0, r1.output
    r2 = runner.invoke(main, ["analyze", "--level", "2", "--count", "30",
                              "--out", str(tmp_path)])
    assert r2.exit_code == 0, r2.output
    outdir = tmp_path / "level2_d0_chain"
    for name in ("counting.svg", "difference.svg", "average.svg",
                 "multiplicities.svg", "multiplicity_stats.csv",
                 "clusters.csv", "motif.txt"):
        assert (outdir / name).exists(), name
    clusters = (outdir / "clusters.csv").read_text().strip().splitlines()
    assert clusters[1].split(",")[4] == "A1"  # constant mode labeled


def test_analyze_missing_spectrum_fails(runner, tmp_path):
    res = runner.invoke(main, ["analyze", "--level", "3", "--out", str(tmp_path)])
    assert res.exit_code != 0


def test_extrapolate_reference(runner, tmp_path):
    res = runner.invoke(main, ["extrapolate", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    rows = (tmp_path / "extrapolation.csv").read_text().strip().splitlines()
    header = rows[0].split(",")
    lim_idx = header.index("limit")
    by_range = {
        (int(r.split(",")[0]), int(r.split(",")[1])): r.split(",")[lim_idx]
        for r in rows[1:]
    }
    assert float(by_range[(1, 3)]) == pytest.approx(1.37, abs=0.1)
    assert float(by_range[(9, 11)]) == pytest.approx(8.26, abs=0.1)
    assert float(by_range[(25, 27)]) == pytest.approx(20.71, abs=0.1)


def test_extrapolate_too_few_levels(runner, tmp_path):
    res = runner.invoke(main, ["extrapolate", "--levels", "4,5", "--out", str(tmp_path)])
    assert res.exit_code != 0
    assert "skipped" in res.output


def test_render_eigenfunction(runner, tmp_path):
    res = runner.invoke(main, ["render", "--level", "1", "--eigenfunction", "1",
                               "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    assert (tmp_path / "level1_d0_chain" / "eigenfunction_1.svg").exists()


def test_end_to_end_determinism(runner, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        r = runner.invoke(main, ["spectrum", "--level", "1", "--count", "6",
                                 "--out", str(out), "--no-cache"])
        assert r.exit_code == 0, r.output
    fa = (out_a / "level1_d0_chain" / "spectrum.csv").read_bytes()
    fb = (out_b / "level1_d0_chain" / "spectrum.csv").read_bytes()
    assert fa == fb
