import json
import os
import subprocess
import sys

import numpy as np
import pytest

from solmarch.cli import build_parser, main
from solmarch.fileio import read_ppm

SRC = os.path.join(os.path.dirname(__file__), "..", "src")


def run_cli(args, env_extra=None):
    env = dict(os.environ, PYTHONPATH=SRC)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "solmarch", *args], capture_output=True, text=True, env=env
    )


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = np.array([[float(v) for v in line.split(",")] for line in fh])
    return header, rows


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------


def test_render_preset_writes_ppm(tmp_path, capsys):
    out = tmp_path / "img.ppm"
    code = main(["render", "--preset", "dragon-plane", "--h", "2",
                 "-w", "64", "-h", "48", "-o", str(out)])
    assert code == 0
    img = read_ppm(out)
    assert img.shape == (48, 64, 3)


def test_render_png_output(tmp_path):
    out = tmp_path / "img.png"
    code = main(["render", "--preset", "sphere-gallery", "-w", "32", "-h", "24",
                 "-o", str(out)])
    assert code == 0
    from PIL import Image

    with Image.open(out) as im:
        assert im.size == (32, 24)


def test_render_scene_file(tmp_path):
    doc = {
        "objects": [{"kind": "plane", "hole_spacing": None}],
        "camera": {"position": [0, 0, 2], "resolution": [16, 16]},
    }
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "img.ppm"
    assert main(["render", "--scene", str(path), "-o", str(out)]) == 0
    assert read_ppm(out).shape == (16, 16, 3)


def test_render_unknown_preset_exits_2(tmp_path):
    code = main(["render", "--preset", "nonsense", "-o", str(tmp_path / "x.ppm")])
    assert code == 2


def test_render_bad_scene_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"objects": [], "surprise": 1}')
    assert main(["render", "--scene", str(path), "-o", str(tmp_path / "x.ppm")]) == 2


def test_render_unwritable_output_exits_3(tmp_path):
    out = tmp_path / "no" / "such" / "dir" / "x.ppm"
    code = main(["render", "--preset", "dragon-plane", "-w", "4", "-h", "4", "-o", str(out)])
    assert code == 3


def test_render_camera_pose_override(tmp_path):
    out = tmp_path / "img.ppm"
    pose = "0,0,3," + "1,0,0,0,1,0,0,0,1"
    code = main(["render", "--preset", "dragon-plane", "-w", "8", "-h", "8",
                 "--camera-pose", pose, "-o", str(out)])
    assert code == 0


# ---------------------------------------------------------------------------
# geodesic
# ---------------------------------------------------------------------------


def test_geodesic_vertical_csv(tmp_path):
    out = tmp_path / "geo.csv"
    code = main(["geodesic", "--direction", "0,0,1", "--t-max", "2", "--dt", "1e-3",
                 "-o", str(out)])
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["t", "x", "y", "z", "px", "py", "speed2"]
    assert np.allclose(rows[-1], [2.0, 0.0, 0.0, 2.0, 0.0, 0.0, 1.0], atol=1e-12)


def test_geodesic_apex_and_conservation(tmp_path):
    out = tmp_path / "geo.csv"
    code = main(["geodesic", "--direction", "0,1,-1", "--t-max", "3", "-o", str(out)])
    assert code == 0
    _, rows = read_csv(out)
    assert abs(rows[:, 3].min() - (-np.log(2.0) / 2.0)) < 1e-6
    assert np.max(np.abs(rows[:, 4] - rows[0, 4])) < 1e-9
    assert np.max(np.abs(rows[:, 5] - rows[0, 5])) < 1e-9


def test_geodesic_zero_direction_exits_2(tmp_path):
    assert main(["geodesic", "--direction", "0,0,0", "-o", str(tmp_path / "x.csv")]) == 2


def test_geodesic_plot_figure(tmp_path):
    out = tmp_path / "geo.csv"
    fig = tmp_path / "geo.png"
    code = main(["geodesic", "--direction", "1,0,0", "--t-max", "1", "-o", str(out), "--plot"])
    assert code == 0
    assert fig.exists() and fig.stat().st_size > 0


def test_geodesic_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["geodesic", "--direction", "0.3,-0.4,0.2", "--t-max", "1.5",
                     "-o", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# sphere
# ---------------------------------------------------------------------------


def test_sphere_obj_counts(tmp_path):
    out = tmp_path / "sphere.obj"
    code = main(["sphere", "--radius", "1.0", "--n-theta", "6", "--n-phi", "8",
                 "-o", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    verts = [ln for ln in lines if ln.startswith("v ")]
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert len(verts) == 6 * 8 + 2
    assert len(faces) == 2 * 8 + 2 * 8 * (6 - 1)


def test_sphere_tiny_radius_bbox(tmp_path):
    out = tmp_path / "sphere.obj"
    assert main(["sphere", "--radius", "1e-6", "-o", str(out)]) == 0
    verts = np.array(
        [[float(v) for v in ln.split()[1:]] for ln in out.read_text().splitlines()
         if ln.startswith("v ")]
    )
    assert np.max(verts.max(axis=0) - verts.min(axis=0)) < 3e-6


def test_sphere_invalid_grid_exits_2(tmp_path):
    assert main(["sphere", "--radius", "1", "--n-theta", "1", "-o",
                 str(tmp_path / "x.obj")]) == 2


def test_sphere_obj_deterministic_with_plot(tmp_path):
    a, b = tmp_path / "a.obj", tmp_path / "b.obj"
    for out in (a, b):
        assert main(["sphere", "--radius", "0.5", "--n-theta", "4", "--n-phi", "4",
                     "-o", str(out), "--plot"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.png").exists()


# ---------------------------------------------------------------------------
# selftest / scenes / replay
# ---------------------------------------------------------------------------


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4 and "FAIL" not in out
    assert "conjugation" in out


def test_selftest_mutation_fails(capsys):
    assert main(["selftest", "--mutate"]) == 1
    out = capsys.readouterr().out
    assert "conservation" in out and "FAIL" in out


def test_scenes_list(capsys):
    assert main(["scenes", "list"]) == 0
    out = capsys.readouterr().out
    for name in ("dragon-plane", "sandwich", "lattice-balls", "lattice-pillars",
                 "sphere-gallery"):
        assert name in out


def test_replay_tape(tmp_path):
    tape = {
        "preset": "dragon-plane",
        "speed": 1.0,
        "steps": [
            {"move": [0, 0, 1], "dt": 0.5},
            {"turn": {"axis": "y", "angle": 0.25}},
            {"move": [0, 0, -1], "dt": 0.25},
        ],
    }
    tape_path = tmp_path / "tape.json"
    tape_path.write_text(json.dumps(tape))
    out = tmp_path / "states.csv"
    assert main(["replay", "--tape", str(tape_path), "-o", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[:4] == ["step", "x", "y", "z"]
    assert rows.shape == (4, 13)
    # local +z is the backward axis: the first move climbs from h=2 to 2.5
    assert abs(rows[1, 3] - 2.5) < 1e-9


def test_replay_bad_tape_exits_2(tmp_path):
    tape_path = tmp_path / "tape.json"
    tape_path.write_text('{"steps": [{"turn": {"axis": "w", "angle": 1}}]}')
    assert main(["replay", "--tape", str(tape_path), "-o", str(tmp_path / "x.csv")]) == 2


# ---------------------------------------------------------------------------
# help / flags round-trip
# ---------------------------------------------------------------------------


def test_every_flag_appears_in_help():
    parser = build_parser()
    sub = next(a for a in parser._actions if hasattr(a, "choices") and a.choices)
    for name, sp in sub.choices.items():
        help_text = sp.format_help()
        for action in sp._actions:
            for opt in action.option_strings:
                assert opt in help_text, f"{name}: {opt} missing from --help"


def test_render_help_via_subprocess():
    proc = run_cli(["render", "--help"])
    assert proc.returncode == 0
    for flag in ("--preset", "--scene", "--h", "-w", "-h", "-o", "--threads",
                 "--supersample", "--camera-pose"):
        assert flag in proc.stdout


def test_missing_subcommand_exits_2():
    proc = run_cli([])
    assert proc.returncode == 2
