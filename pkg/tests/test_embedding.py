import io
import json

import numpy as np

from solmarch import embedding, lattice, marcher, scene
from solmarch import geodesic as geo
from solmarch.presets import build_preset


def identity_pose(position=(0.0, 0.0, 0.0)):
    return [*position, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]


def test_hello_lists_functions():
    info = embedding.hello()
    assert info["abi"] == "solmarch-embed/1"
    for fn in ("observer_step", "rotate_observer", "teleport", "march_batch", "render_tile"):
        assert fn in info["functions"]


def test_observer_step_matches_native():
    pose = identity_pose((0.1, -0.2, 0.3))
    out = embedding.embed_observer_step(pose, [0.2, -0.1, -1.0], 1.0, 0.4)
    obs = geo.observer_step(
        geo.Observer(np.array(pose[:3]), np.array(pose[3:]).reshape(3, 3)),
        np.array([0.2, -0.1, -1.0]), 1.0, 0.4,
    )
    native = [*obs.position, *obs.frame.ravel()]
    assert np.array_equal(np.array(out), np.array(native))


def test_rotate_observer_flat():
    r = [0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]
    out = embedding.embed_rotate_observer(identity_pose(), r)
    assert np.allclose(np.array(out[3:]).reshape(3, 3), np.array(r).reshape(3, 3), atol=0)


def test_teleport_flat_pose_keeps_frame():
    pose = identity_pose((0.0, 0.0, lattice.Z_PERIOD + 0.1))
    out = embedding.embed_teleport(pose)
    assert out["word"] == [0, 0, 1]
    assert abs(out["pose"][2] - 0.1) < 1e-12
    assert out["pose"][3:] == pose[3:]


def test_march_batch_matches_reference():
    sc, cam = build_preset("dragon-plane", h=2.0)
    comp = scene.compile_scene(sc)
    rays = []
    recs = []
    for direction in ([0, 0, -1.0], [0.3, 0.1, -1.0], [0, 0, 1.0]):
        v = np.array(direction, dtype=float)
        from solmarch import core

        v /= np.sqrt(core.metric_inner(cam.observer.position, v, v))
        ray = geo.TangentState(cam.observer.position.copy(), v)
        rays.extend([*ray.pos, *ray.vel])
        recs.append(marcher.march(ray, comp))
    out = np.array(embedding.embed_march_batch(rays, "dragon-plane", h=2.0)).reshape(-1, 8)
    for row, rec in zip(out, recs):
        assert bool(row[0]) == rec.hit
        assert int(row[1]) == rec.object_id
        assert abs(row[2] - rec.t) < 1e-12
        assert int(row[6]) == rec.steps


def test_render_tile_matches_full_render():
    sc, cam_full = build_preset("dragon-plane", h=2.0)
    cam = marcher.Camera(cam_full.observer, cam_full.fov, (24, 16))
    comp = scene.compile_scene(sc)
    full, _ = marcher.render(cam, comp)
    pose = identity_pose((0, 0, 2.0))
    import base64

    rows = []
    for r0, r1 in ((0, 5), (5, 11), (11, 16)):
        out = embedding.embed_render_tile(pose, "dragon-plane", 24, 16, r0, r1, h=2.0)
        data = np.frombuffer(base64.b64decode(out["rgb_base64"]), dtype=np.uint8)
        rows.append(data.reshape(r1 - r0, 24, 3))
    assert np.array_equal(np.concatenate(rows, axis=0), full)


def test_serve_loop():
    requests = "\n".join([
        json.dumps({"id": 1, "fn": "hello"}),
        json.dumps({"id": 2, "fn": "teleport", "args": {"pose_or_point": [0.0, 0.0, 1.2]}}),
        json.dumps({"id": 3, "fn": "frobnicate"}),
        "",
    ])
    stdout = io.StringIO()
    assert embedding.serve(io.StringIO(requests), stdout) == 0
    lines = [json.loads(line) for line in stdout.getvalue().splitlines()]
    assert lines[0]["ok"] and lines[0]["result"]["abi"] == "solmarch-embed/1"
    assert lines[1]["ok"] and lines[1]["result"]["word"] == [0, 0, 1]
    assert not lines[2]["ok"] and "frobnicate" in lines[2]["error"]


def test_serve_roundtrips_floats_exactly():
    x = 0.1 + 0.2  # not representable prettily; repr round-trips
    req = json.dumps({"id": 1, "fn": "teleport", "args": {"pose_or_point": [x, 0.0, 0.25]}})
    stdout = io.StringIO()
    embedding.serve(io.StringIO(req + "\n"), stdout)
    reply = json.loads(stdout.getvalue())
    assert reply["ok"]
    point, _ = lattice.teleport(np.array([x, 0.0, 0.25]))
    assert reply["result"]["pose"][0] == point[0]
