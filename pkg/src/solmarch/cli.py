"""Command-line interface.

Subcommands: render, geodesic, sphere, selftest, scenes, replay,
embed-server.  Exit codes: 0 success, 1 failed self-test, 2 bad input or
scene, 3 output I/O failure.  The SOLMARCH_THREADS environment variable (or
--threads) caps render parallelism; it must be applied before the compiled
kernels load, which is why the heavyweight imports live inside the command
handlers.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _parse_triple(text: str, name: str):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ValueError(f"{name} must be three comma-separated numbers, got {text!r}")
    return np.array([float(p) for p in parts])


def _parse_pose(text: str):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 12:
        raise ValueError("camera pose must be 12 comma-separated numbers (position + frame)")
    vals = np.array([float(p) for p in parts])
    return vals[:3], vals[3:].reshape(3, 3)


def _axis_rotation(axis: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        return np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "y":
        return np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]])
    if axis == "z":
        return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
    raise ValueError(f"turn axis must be x, y or z, got {axis!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solmarch",
        description="Sol geometry engine: intrinsic renders, geodesic reports, and meshes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    # render: -h is the image height here, so the automatic help flag is
    # disabled and --help re-added by hand; --h is the preset height parameter.
    render = sub.add_parser(
        "render",
        add_help=False,
        help="ray-march a preset or scene file to a PPM/PNG image",
    )
    render.add_argument("--help", action="help", help="show this help message and exit")
    src = render.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="preset name (see: solmarch scenes list)")
    src.add_argument("--scene", help="scene JSON file")
    render.add_argument("--h", dest="preset_h", type=float, default=None,
                        help="dragon-plane observer height")
    render.add_argument("-w", "--width", type=int, default=None, help="image width (pixels)")
    render.add_argument("-h", "--height", type=int, default=None, help="image height (pixels)")
    render.add_argument("-o", "--out", required=True, help="output image (.ppm or .png)")
    render.add_argument("--png", action="store_true", help="write PNG regardless of suffix")
    render.add_argument("--fov", type=float, default=None, help="vertical field of view (radians)")
    render.add_argument("--camera-pose", default=None,
                        help="override pose: 12 numbers, position then row-major frame")
    render.add_argument("--epsilon", type=float, default=None, help="hit tolerance")
    render.add_argument("--t-max", type=float, default=None, help="max arc length per ray")
    render.add_argument("--max-steps", type=int, default=None, help="max march steps per ray")
    render.add_argument("--ode-dt", type=float, default=None, help="integrator step")
    render.add_argument("--safety", type=float, default=None, help="step fraction in (0, 1]")
    render.add_argument("--supersample", type=int, choices=(1, 2), default=1,
                        help="2 renders a doubled grid and box-filters down")
    render.add_argument("--threads", type=int, default=None,
                        help="render thread count (default: SOLMARCH_THREADS or all cores)")

    geo = sub.add_parser("geodesic", help="integrate one geodesic to CSV (+ optional figure)")
    geo.add_argument("--origin", default="0,0,0", help="start point x,y,z")
    geo.add_argument("--direction", required=True, help="initial direction x,y,z (any scale)")
    geo.add_argument("--t-max", type=float, default=10.0, help="flow time")
    geo.add_argument("--dt", type=float, default=1e-3, help="integrator step")
    geo.add_argument("-o", "--out", required=True, help="output CSV path")
    geo.add_argument("--plot", nargs="?", const="", default=None, metavar="PNG",
                     help="also write a trajectory figure (default: CSV path with .png)")

    sph = sub.add_parser("sphere", help="sample a geodesic sphere to an OBJ mesh")
    sph.add_argument("--radius", type=float, required=True)
    sph.add_argument("--n-theta", type=int, default=16, help="latitude rings (poles excluded)")
    sph.add_argument("--n-phi", type=int, default=16, help="longitude samples per ring")
    sph.add_argument("--dt", type=float, default=1e-3, help="integrator step")
    sph.add_argument("-o", "--out", required=True, help="output OBJ path")
    sph.add_argument("--plot", nargs="?", const="", default=None, metavar="PNG",
                     help="also write a point-cloud figure")

    st = sub.add_parser("selftest", help="run built-in numerical health checks")
    st.add_argument("--mutate", action="store_true",
                    help="diagnostics hook: flip a sign in the vertical geodesic "
                         "equation to prove the conservation check fails")

    scenes = sub.add_parser("scenes", help="preset scene utilities")
    scenes_sub = scenes.add_subparsers(dest="scenes_command", required=True)
    scenes_sub.add_parser("list", help="list preset scenes")

    rep = sub.add_parser("replay", help="replay a navigation input tape to a state CSV")
    rep.add_argument("--tape", required=True, help="input tape JSON")
    rep.add_argument("-o", "--out", required=True, help="output CSV of observer states")

    sub.add_parser("embed-server", help="serve the flat-array embedding interface over stdio")

    return parser


def _resolve_scene_and_camera(args):
    from .marcher import Camera
    from .geodesic import Observer
    from .presets import build_preset
    from .scene import load_scene

    if args.preset:
        scene, cam = build_preset(args.preset, h=args.preset_h)
    else:
        if args.preset_h is not None:
            raise ValueError("--h only applies to --preset dragon-plane")
        scene, cam_doc = load_scene(args.scene)
        if cam_doc is None:
            cam = Camera(Observer.at((0.0, 0.0, 2.0)))
        else:
            cam = Camera(
                Observer.at(
                    tuple(cam_doc.get("position", (0.0, 0.0, 2.0))),
                    cam_doc.get("frame"),
                ),
                float(cam_doc.get("fov", np.pi / 2)),
                tuple(cam_doc.get("resolution", (256, 256))),
            )
    return scene, cam


def cmd_render(args) -> int:
    from .marcher import Camera, MarchParams, render
    from .geodesic import Observer
    from .fileio import write_png, write_ppm
    from .presets import PRESETS
    from .scene import SceneError

    try:
        if args.preset and args.preset not in PRESETS:
            return _fail(2, f"unknown preset {args.preset!r}; "
                            f"available: {', '.join(sorted(PRESETS))}")
        scene, cam = _resolve_scene_and_camera(args)
        w, h = cam.resolution
        w = args.width if args.width is not None else w
        h = args.height if args.height is not None else h
        fov = args.fov if args.fov is not None else cam.fov
        observer = cam.observer
        if args.camera_pose is not None:
            pos, frame = _parse_pose(args.camera_pose)
            observer = Observer(pos, frame)
        cam = Camera(observer, fov, (w, h))
        overrides = {
            k: v
            for k, v in (
                ("epsilon", args.epsilon),
                ("t_max", args.t_max),
                ("max_steps", args.max_steps),
                ("ode_dt", args.ode_dt),
                ("safety", args.safety),
            )
            if v is not None
        }
        params = MarchParams(**overrides)
    except (SceneError, KeyError, ValueError, OSError) as exc:
        return _fail(2, str(exc))

    img, diag = render(cam, scene, params, threads=args.threads, supersample=args.supersample)
    print(
        f"rays={diag.rays} mean_steps={diag.mean_steps:.2f} misses={diag.misses} "
        f"wraps={diag.wraps} wall={diag.wall_time:.2f}s",
        file=sys.stderr,
    )
    try:
        if args.png or args.out.lower().endswith(".png"):
            write_png(args.out, img)
        else:
            write_ppm(args.out, img)
    except OSError as exc:
        return _fail(3, f"cannot write {args.out}: {exc}")
    return 0


def cmd_geodesic(args) -> int:
    from .core import metric_inner
    from .fileio import write_csv
    from .geodesic import TangentState, flow_path

    try:
        origin = _parse_triple(args.origin, "origin")
        direction = _parse_triple(args.direction, "direction")
        if not np.any(direction != 0.0):
            return _fail(2, "direction must be nonzero")
        if args.t_max <= 0 or args.dt <= 0:
            return _fail(2, "t-max and dt must be positive")
        speed = float(np.sqrt(metric_inner(origin, direction, direction)))
        direction = direction / speed
    except ValueError as exc:
        return _fail(2, str(exc))

    ts, poss, vels = flow_path(TangentState(origin, direction), args.t_max, args.dt)
    z = poss[:, 2]
    px = np.exp(-2.0 * z) * vels[:, 0]
    py = np.exp(2.0 * z) * vels[:, 1]
    speed2 = px * vels[:, 0] + py * vels[:, 1] + vels[:, 2] ** 2
    rows = np.column_stack([ts, poss, px, py, speed2])
    try:
        write_csv(args.out, ["t", "x", "y", "z", "px", "py", "speed2"], rows)
        if args.plot is not None:
            from .figures import plot_geodesic

            target = args.plot or os.path.splitext(args.out)[0] + ".png"
            plot_geodesic(target, ts, poss, px, py, speed2)
    except OSError as exc:
        return _fail(3, f"cannot write output: {exc}")
    return 0


def cmd_sphere(args) -> int:
    from .fileio import write_obj
    from .geodesic import geodesic_sphere

    try:
        points, faces = geodesic_sphere(args.radius, args.n_theta, args.n_phi, args.dt)
    except ValueError as exc:
        return _fail(2, str(exc))
    try:
        write_obj(args.out, points, faces)
        if args.plot is not None:
            from .figures import plot_sphere

            target = args.plot or os.path.splitext(args.out)[0] + ".png"
            plot_sphere(target, points, args.radius)
    except OSError as exc:
        return _fail(3, f"cannot write output: {exc}")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(mutate=args.mutate)
    width = max(len(name) for name, _, _ in results)
    all_ok = True
    for name, ok, detail in results:
        all_ok &= ok
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return 0 if all_ok else 1


def cmd_scenes_list(_args) -> int:
    from .presets import PRESETS

    for name in sorted(PRESETS):
        print(f"{name:<16} {PRESETS[name][1]}")
    return 0


def cmd_replay(args) -> int:
    from .fileio import write_csv
    from .geodesic import Observer, observer_step, rotate_observer
    from .presets import build_preset
    from . import lattice

    try:
        with open(args.tape, "r", encoding="utf-8") as fh:
            tape = json.load(fh)
        preset = tape.get("preset", "dragon-plane")
        scene, cam = build_preset(preset, h=tape.get("h"))
        if "pose" in tape:
            pose = np.asarray(tape["pose"], dtype=float)
            obs = Observer(pose[:3].copy(), pose[3:].reshape(3, 3).copy())
        else:
            obs = cam.observer
        speed = float(tape.get("speed", 1.0))
        ode_dt = float(tape.get("ode_dt", 1e-3))
        steps = tape.get("steps", [])
    except (OSError, ValueError, KeyError) as exc:
        return _fail(2, f"bad tape: {exc}")

    rows = [[0, *obs.position, *obs.frame.ravel()]]
    for i, step in enumerate(steps, start=1):
        try:
            if "turn" in step:
                r = _axis_rotation(step["turn"]["axis"], float(step["turn"]["angle"]))
                obs = rotate_observer(obs, r)
            if "move" in step:
                local = np.asarray(step["move"], dtype=float)
                obs = observer_step(obs, local, speed, float(step.get("dt", 0.05)), ode_dt)
            if scene.quotient:
                reduced, _word = lattice.teleport(obs.position)
                obs = Observer(reduced, obs.frame)
        except (ValueError, KeyError) as exc:
            return _fail(2, f"bad tape step {i}: {exc}")
        rows.append([i, *obs.position, *obs.frame.ravel()])

    header = ["step", "x", "y", "z"] + [f"q{i}{j}" for i in range(3) for j in range(3)]
    try:
        write_csv(args.out, header, rows)
    except OSError as exc:
        return _fail(3, f"cannot write {args.out}: {exc}")
    return 0


def cmd_embed_server(_args) -> int:
    from .embedding import serve

    return serve()


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)

    # The thread cap must be in the environment before numba first loads.
    threads = os.environ.get("SOLMARCH_THREADS")
    if "--threads" in argv:
        idx = argv.index("--threads")
        if idx + 1 < len(argv):
            threads = argv[idx + 1]
    if threads:
        os.environ.setdefault("NUMBA_NUM_THREADS", threads)

    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "render": cmd_render,
        "geodesic": cmd_geodesic,
        "sphere": cmd_sphere,
        "selftest": cmd_selftest,
        "scenes": cmd_scenes_list,
        "replay": cmd_replay,
        "embed-server": cmd_embed_server,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
