"""Flat-array embedding interface for host programs (ABI: solmarch-embed/1).

Every call operates on plain float64 sequences so any host language can
drive the engine without binding to Python objects:

  observer pose     12 floats: x, y, z then the 3x3 frame, row-major
  ray               6 floats: position then velocity
  hit record        8 floats: hit, object_id, t, x, y, z, steps, wraps

The `serve` loop speaks line-delimited JSON over stdio; numbers survive the
trip exactly because both sides print shortest round-trip decimal.  Requests
look like {"id": 1, "fn": "observer_step", "args": {...}} and answers are
{"id": 1, "ok": true, "result": ...} or {"id": 1, "ok": false, "error": "..."}.

The same scene/camera/step code answers these calls and the CLI's render and
replay commands, so a host that drives this interface reproduces the native
results bit for bit.
"""

from __future__ import annotations

import base64
import json
import sys

import numpy as np

from . import lattice
from .geodesic import Observer, observer_step, rotate_observer
from .marcher import Camera, MarchParams, quantize
from .presets import build_preset
from .scene import compile_scene

ABI = "solmarch-embed/1"

_FUNCTIONS = (
    "hello",
    "observer_step",
    "rotate_observer",
    "teleport",
    "march_batch",
    "render_tile",
)

_scene_cache: dict = {}


def _compiled_preset(preset: str, h: float | None):
    key = (preset, h)
    if key not in _scene_cache:
        scene, cam = build_preset(preset, h=h)
        _scene_cache[key] = (compile_scene(scene), cam)
    return _scene_cache[key]


def _pose_to_observer(pose) -> Observer:
    pose = np.asarray(pose, dtype=float)
    if pose.shape != (12,):
        raise ValueError("observer pose must be 12 floats (position + row-major frame)")
    return Observer(pose[:3].copy(), pose[3:].reshape(3, 3).copy())


def _observer_to_pose(obs: Observer):
    return [float(v) for v in np.concatenate([obs.position, obs.frame.ravel()])]


def hello() -> dict:
    return {"abi": ABI, "functions": list(_FUNCTIONS)}


def embed_observer_step(pose, local_dir, speed: float, dt: float, ode_dt: float = 1e-3):
    obs = observer_step(_pose_to_observer(pose), np.asarray(local_dir, dtype=float), speed, dt, ode_dt)
    return _observer_to_pose(obs)


def embed_rotate_observer(pose, rotation):
    r = np.asarray(rotation, dtype=float).reshape(3, 3)
    return _observer_to_pose(rotate_observer(_pose_to_observer(pose), r))


def embed_teleport(pose_or_point):
    arr = np.asarray(pose_or_point, dtype=float)
    if arr.shape == (12,):
        point, word = lattice.teleport(arr[:3])
        out = np.concatenate([point, arr[3:]])  # pulled-back frame is unchanged
        return {"pose": [float(v) for v in out], "word": [word.n1, word.n2, word.n3]}
    point, word = lattice.teleport(arr)
    return {"pose": [float(v) for v in point], "word": [word.n1, word.n2, word.n3]}


def embed_march_batch(rays, preset: str, h: float | None = None):
    """March rays (flat N*6 floats) against a preset scene; returns N*8 floats."""
    from . import kernels
    from .geodesic import TangentState

    comp, _cam = _compiled_preset(preset, h)
    arr = np.asarray(rays, dtype=float).reshape(-1, 6)
    params = MarchParams()
    out = np.empty((arr.shape[0], 8))
    for i, row in enumerate(arr):
        hit, obj, t, x, y, z, _vx, _vy, _vz, steps, wraps, _blow = kernels.march_state(
            TangentState(row[:3], row[3:]), comp, params
        )
        out[i] = (1.0 if hit else 0.0, float(obj), t, x, y, z, float(steps), float(wraps))
    return [float(v) for v in out.ravel()]


def embed_render_tile(
    pose,
    preset: str,
    width: int,
    height: int,
    row0: int,
    row1: int,
    h: float | None = None,
    fov: float | None = None,
):
    """Render rows [row0, row1) at the given pose; returns base64 RGB bytes."""
    from . import kernels

    comp, preset_cam = _compiled_preset(preset, h)
    cam = Camera(
        _pose_to_observer(pose),
        preset_cam.fov if fov is None else float(fov),
        (int(width), int(height)),
    )
    img, _steps, _hits, _wraps = kernels.render_rows(cam, comp, MarchParams(), row0, row1)
    data = quantize(img).tobytes()
    return {"rows": [row0, row1], "rgb_base64": base64.b64encode(data).decode("ascii")}


_DISPATCH = {
    "hello": lambda **kw: hello(),
    "observer_step": embed_observer_step,
    "rotate_observer": embed_rotate_observer,
    "teleport": embed_teleport,
    "march_batch": embed_march_batch,
    "render_tile": embed_render_tile,
}


def serve(stdin=None, stdout=None) -> int:
    """Line-delimited JSON request loop; exits on EOF."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        req_id = None
        try:
            req = json.loads(line)
            req_id = req.get("id")
            fn = req["fn"]
            if fn not in _DISPATCH:
                raise ValueError(f"unknown function {fn!r}; see 'hello'")
            result = _DISPATCH[fn](**req.get("args", {}))
            payload = {"id": req_id, "ok": True, "result": result}
        except Exception as exc:  # report, keep serving
            payload = {"id": req_id, "ok": False, "error": f"{type(exc).__name__}: {exc}"}
        stdout.write(json.dumps(payload) + "\n")
        stdout.flush()
    return 0
