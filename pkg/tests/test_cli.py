import json
import subprocess
import sys

import pytest

from manhattan.cli import main
from manhattan.env import make_env
from manhattan.render import WindowTooLarge, render_svg


def invoke(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "manhattan.cli", *argv],
        capture_output=True, text=True, timeout=300,
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_simulate_emits_period_two():
    code, out, _ = invoke("--seed", "1", "--budget", "1000000", "simulate")
    assert code == 0
    doc = json.loads(out)
    assert doc["absorption"] == "cycle"
    assert doc["period"] == 2
    assert doc["config"]["seed"] == 1


def test_srw_example_output():
    code, out, _ = invoke("srw", "--L", "2", "--n", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["survival"] == 0.5
    assert doc["survival_exact"] == "1/2"
    assert doc["lower_bound"] == pytest.approx(0.5, abs=1e-12)
    assert doc["upper_bound"] == pytest.approx(1.0, abs=1e-12)


def test_unknown_flag_exits_one():
    code, _, err = invoke("simulate", "--definitely-not-a-flag")
    assert code == 1
    assert "error" in err


def test_unwritable_output_exits_one(tmp_path):
    code, _, err = invoke("--seed", "2", "--out", str(tmp_path / "nope" / "out.json"),
                          "simulate")
    assert code == 1


def test_verify_suite_ok_exit_zero(tmp_path):
    out_path = tmp_path / "report.json"
    code, out, _ = invoke("--out", str(out_path), "verify", "--suite", "cellcensus")
    assert code == 0
    assert "cellcensus: ok" in out
    doc = json.loads(out_path.read_text())
    assert doc["ok"] is True
    assert doc["report"]["census"] == {"source": 2, "crossing": 12, "trap": 2}


def test_verify_falsified_suite_exit_two(tmp_path):
    # the tails suite is falsified by design at the pinned estimator scale
    out_path = tmp_path / "tails.json"
    code, out, _ = invoke("--workers", "2", "--out", str(out_path),
                          "verify", "--suite", "tails")
    assert code == 2
    assert "tails: FALSIFIED" in out
    doc = json.loads(out_path.read_text())
    assert doc["ok"] is False
    assert doc["report"]["monotone"] is True
    assert doc["report"]["beta_plain"] > doc["report"]["beta_band"][1]


def test_byte_identical_artifacts(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["--seed", "5", "--samples", "3000", "--format", "csv"]
    assert invoke(*args, "--out", str(a), "tail")[0] == 0
    assert invoke(*args, "--out", str(b), "tail")[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_classify_csv(tmp_path):
    out = tmp_path / "census.csv"
    code, _, _ = invoke("--seed", "9", "--window", "0:12,0:12",
                        "--format", "csv", "--out", str(out), "classify")
    assert code == 0
    text = out.read_text()
    assert text.startswith("# config ")
    assert "kind,count" in text


def test_components_command():
    code, out, _ = invoke("--seed", "3", "components", "--start", "0,0")
    assert code == 0
    doc = json.loads(out)
    assert doc["trap"] is not None
    assert doc["size"] >= 2


def test_env_var_default_seed():
    proc = subprocess.run(
        [sys.executable, "-m", "manhattan.cli", "simulate"],
        capture_output=True, text=True, timeout=120,
        env={"PATH": "/usr/bin:/bin", "MANHATTAN_SEED": "4242",
             "PYTHONPATH": "src"},
        cwd="/root/pkg",
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["config"]["seed"] == 4242


def test_srw_table_csv(tmp_path):
    out = tmp_path / "t.csv"
    code, _, _ = invoke("--out", str(out), "srw", "--L", "3", "--n", "4", "--table")
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[1] == "L,n,survival,lower_bound,upper_bound"
    assert len(lines) == 2 + 2 * 5  # L in {2,3} x n in 0..4


def test_main_callable_directly(tmp_path):
    # in-process path used by the determinism suite
    out = tmp_path / "x.json"
    assert main(["--seed", "4", "--out", str(out), "simulate"]) == 0
    assert json.loads(out.read_text())["period"] == 2


# ------------------------------------------------------------------ render

def trap_fixture_env():
    t = {-1: 1, 0: 1, 1: 1, 2: -1, 3: -1}
    return make_env(2, tables={0: dict(t), 1: dict(t)}, strict=True)


def test_render_trap_window_marks():
    svg = render_svg(trap_fixture_env(), ((-1, 4), (-1, 4)))
    assert svg.count('class="cell-trap"') == 1
    assert svg.count("<path d=\"M") >= 2  # the two trap arcs
    assert svg.count('class="vertex-inward"') == 2
    assert svg.count('class="vertex-outward"') == 2


def test_render_all_plus_no_marks():
    rng = range(-6, 7)
    env = make_env(2, tables={0: {y: 1 for y in rng}, 1: {x: 1 for x in rng}}, strict=True)
    svg = render_svg(env, ((-4, 5), (-4, 5)))
    assert 'class="cell-trap"' not in svg
    assert 'class="cell-source"' not in svg
    assert 'class="vertex-inward"' not in svg


def test_render_midedge_overlay_checkered():
    env = make_env(2, seed=12)
    svg = render_svg(env, ((0, 10), (0, 10)), show_midedge=True, show_sign_lines=True)
    assert 'class="midedge-vertex"' in svg
    assert 'stroke-dasharray' in svg


def test_render_deterministic_bytes():
    env = make_env(2, seed=77)
    a = render_svg(env, ((0, 9), (0, 9)), show_midedge=True)
    b = render_svg(env, ((0, 9), (0, 9)), show_midedge=True)
    assert a == b


def test_render_window_cap():
    env = make_env(2, seed=1)
    with pytest.raises(WindowTooLarge):
        render_svg(env, ((0, 500), (0, 500)))


def test_render_trajectory_overlay():
    env = make_env(2, seed=31337)
    from manhattan.walk import run
    out = run(env, (0, 0), 10**6, keep_prefix=100)
    lo = min(min(v) for v in out.trajectory_prefix) - 1
    hi = max(max(v) for v in out.trajectory_prefix) + 2
    svg = render_svg(env, ((lo, hi), (lo, hi)), trajectory=out.trajectory_prefix)
    assert 'class="trajectory"' in svg
