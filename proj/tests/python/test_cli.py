import json
import os
import subprocess

import pytest

CLI = os.environ.get("BEVLAB_CLI")

pytestmark = pytest.mark.skipif(not CLI, reason="BEVLAB_CLI is not set")


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds") / "ds"
    r = run("synth", "--seed", 2, "--frames", 4, "--out", out)
    assert r.returncode == 0, r.stderr
    return out


def test_synth_layout(dataset):
    for name in ("manifest.json", "poses.txt", "camera.txt", "scans/000003.pcb", "left/000000.pgm"):
        assert (dataset / name).exists()
    manifest = json.loads((dataset / "manifest.json").read_text())
    assert len(manifest["frames"]) == 4


def test_loss_check_report(tmp_path):
    report = tmp_path / "loss.json"
    r = run("loss-check", "--seed", 1, "--report", report)
    assert r.returncode == 0, r.stderr
    checks = json.loads(report.read_text())["checks"]
    assert checks and all(c["pass"] for c in checks)


def test_bev_gt_then_render(dataset, tmp_path):
    r = run("bev-gt", "--scans", dataset / "scans", "--poses", dataset / "poses.txt", "--camera",
            dataset / "camera.txt", "--out-sem", tmp_path / "sem.bevg", "--out-elev", tmp_path / "elev.bevg",
            "--out-partition", tmp_path / "part.bevg")
    assert r.returncode == 0, r.stderr
    r = run("render", "--grid", tmp_path / "sem.bevg", "--out", tmp_path / "sem.ppm")
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "sem.ppm").read_bytes().startswith(b"P6\n256 256\n255\n")
    assert not list(tmp_path.glob("*.tmp*"))


def test_exit_codes(tmp_path):
    assert run("--help").returncode == 0
    assert run("splat", "--bogus").returncode == 2
    assert run("render", "--grid", tmp_path / "missing.bevg", "--out", tmp_path / "x.ppm").returncode == 3
    assert not (tmp_path / "x.ppm").exists()
