"""Camera model, geodesic sphere tracing, shading, and image synthesis.

A ray is marched by alternating a distance query with a geodesic flow of
length safety * max(d, epsilon): the estimators never overestimate, so the
surface cannot be crossed by more than the epsilon floor.  On a quotient the
position is teleported into the fundamental domain before every query and
the step is additionally capped, keeping every reachable surface copy inside
the precomputed translate block.

`march` is the readable reference implementation; `render` dispatches whole
images to the compiled kernel (same algorithm, same constants) and is
deterministic: identical bytes for identical inputs regardless of thread
count, because pixels never share state.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import lattice
from .core import metric_inner, push_tangent
from .geodesic import FlowBlowupError, Observer, TangentState, flow
from .scene import (
    CompiledScene,
    Scene,
    compile_scene,
    scene_distance,
    surface_normal,
)

HOLE_BIAS_STEPS = 4.0  # pass-through advance beyond a perforated plane, in epsilons


@dataclass
class Camera:
    observer: Observer
    fov: float = np.pi / 2.0  # vertical field of view, radians
    resolution: tuple = (256, 256)

    def __post_init__(self):
        if not 0.0 < self.fov < np.pi:
            raise ValueError("fov must be in (0, pi)")
        w, h = self.resolution
        if w < 1 or h < 1:
            raise ValueError("resolution must be at least 1x1")


@dataclass
class MarchParams:
    epsilon: float = 1e-4
    t_max: float = 50.0
    max_steps: int = 512
    ode_dt: float = 1e-2
    safety: float = 0.9
    # Quotient-only step cap.  A step of length L from the reduced domain
    # (z in [0, 2 ln phi), |x|,|y| <= 1.31) moves at most e^{z_max}(e^L - 1)
    # in x, e^L - 1 in y, and L in z, so with L = 0.4 a single step cannot
    # reach any lattice copy outside the evaluated neighbor block for
    # desk-scale objects (radius <= 0.4 around points of the base cell).
    quotient_step_cap: float = 0.4

    def __post_init__(self):
        if min(self.epsilon, self.t_max, self.ode_dt, self.quotient_step_cap) <= 0.0:
            raise ValueError("march parameters must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if not 0.0 < self.safety <= 1.0:
            raise ValueError("safety must be in (0, 1]")


@dataclass
class HitRecord:
    hit: bool
    object_id: int
    t: float
    position: np.ndarray
    steps: int
    wrap_count: int
    velocity: np.ndarray
    blow_up: bool = False


@dataclass
class RenderDiagnostics:
    rays: int
    mean_steps: float
    misses: int
    wraps: int
    wall_time: float


def generate_ray(cam: Camera, pixel) -> TangentState:
    """Pinhole ray through a pixel center, at unit metric speed.

    Camera convention: frame columns are (right, up, backward); forward is
    -frame_z.  Pixel (0, 0) is the top-left corner; x grows rightward, y
    downward.
    """
    ix, iy = pixel
    w, h = cam.resolution
    if not (0 <= ix < w and 0 <= iy < h):
        raise ValueError(f"pixel {pixel} outside resolution {cam.resolution}")
    tanf = np.tan(0.5 * cam.fov)
    u = (2.0 * (ix + 0.5) / w - 1.0) * tanf * (w / h)
    v = (1.0 - 2.0 * (iy + 0.5) / h) * tanf
    local = np.array([u, v, -1.0])
    local /= np.sqrt(u * u + v * v + 1.0)
    obs = cam.observer
    vel = push_tangent(obs.position, obs.frame @ local)
    return TangentState(obs.position.copy(), vel)


def _z_band(pos, vel):
    """Reachable z-interval of the geodesic through (pos, vel).

    The conserved momenta confine z to the band where
    px^2 e^{2z} + py^2 e^{-2z} <= speed^2; outside it the vertical velocity
    would be imaginary.  Exact consequence of the flow's first integrals.
    """
    z = pos[2]
    px = np.exp(-2.0 * z) * vel[0]
    py = np.exp(2.0 * z) * vel[1]
    s2 = px * vel[0] + py * vel[1] + vel[2] * vel[2]
    if px == 0.0 and py == 0.0:
        return -np.inf, np.inf
    if px == 0.0:
        return 0.5 * np.log(py * py / s2), np.inf
    if py == 0.0:
        return -np.inf, 0.5 * np.log(s2 / (px * px))
    disc = np.sqrt(s2 * s2 - 4.0 * (px * px) * (py * py))
    w2_hi = (s2 + disc) / (2.0 * px * px)
    w2_lo = (2.0 * py * py) / (s2 + disc)
    return 0.5 * np.log(w2_lo), 0.5 * np.log(w2_hi)


def _planes_reachable(comp: CompiledScene, pos, vel, epsilon: float) -> bool:
    """False only when no plane can ever come within the hit tolerance."""
    z_lo, z_hi = _z_band(pos, vel)
    margin = 2.0 * epsilon
    for local in range(comp.plane_level.shape[0]):
        level = comp.plane_level[local]
        if z_lo > level + margin:
            continue
        if comp.plane_two_sided[local] and z_hi < level - margin:
            continue
        return True
    return False


def march(ray: TangentState, scene, params: MarchParams | None = None) -> HitRecord:
    """Sphere-trace a single ray; reference implementation of the render loop."""
    params = params or MarchParams()
    comp = scene if isinstance(scene, CompiledScene) else compile_scene(scene)
    pos = np.array(ray.pos, dtype=float)
    vel = np.array(ray.vel, dtype=float)
    t = 0.0
    steps = 0
    wraps = 0
    # Plane-only scenes admit an exact reachability prune from the conserved
    # momenta; curved estimators have no such band, and on a quotient every
    # level wraps.
    can_prune = not comp.quotient and comp.ball_radius.size == 0 and comp.tube_radius.size == 0
    prune_checked = False

    def miss(blow_up=False):
        return HitRecord(False, -1, min(t, params.t_max), pos, steps, wraps, vel, blow_up)

    while True:
        if comp.quotient:
            try:
                pos, vel, word = lattice.teleport_state(pos, vel)
            except ValueError:
                return miss(blow_up=True)
            if not word.is_identity:
                wraps += 1
        d, obj = scene_distance(pos, comp)
        if d < params.epsilon:
            if comp.obj_kind[obj] == 0:
                local = int(comp.obj_local[obj])
                spacing = comp.plane_spacing[local]
                if spacing > 0.0:
                    hx = np.mod(pos[0], spacing) - 0.5 * spacing
                    hy = np.mod(pos[1], spacing) - 0.5 * spacing
                    if hx * hx + hy * hy < comp.plane_hole_r[local] ** 2:
                        bias = HOLE_BIAS_STEPS * params.epsilon
                        try:
                            pos, vel = flow(TangentState(pos, vel), bias, params.ode_dt)
                        except FlowBlowupError:
                            return miss(blow_up=True)
                        t += bias
                        steps += 1
                        if steps > params.max_steps or t >= params.t_max:
                            return miss()
                        continue
            return HitRecord(True, int(obj), t, pos, steps, wraps, vel)
        remaining = params.t_max - t
        if remaining <= 0.0:
            return miss()
        if d >= remaining:
            # the estimator is a lower bound, so the surface is out of reach
            t = params.t_max
            return miss()
        if can_prune and not prune_checked:
            prune_checked = True
            if not _planes_reachable(comp, pos, vel, params.epsilon):
                t = params.t_max
                return miss()
        step = params.safety * max(d, params.epsilon)
        if comp.quotient:
            step = min(step, params.quotient_step_cap)
        step = min(step, remaining)
        try:
            pos, vel = flow(TangentState(pos, vel), step, params.ode_dt)
        except FlowBlowupError:
            return miss(blow_up=True)
        t += step
        steps += 1
        if steps > params.max_steps:
            return miss()


def shade(hit: HitRecord, ray: TangentState, scene) -> np.ndarray:
    """Headlamp Lambert shading with fog attenuation; misses get the background.

    The light direction is the reversed incoming velocity, so geodesic
    two-point connection is never needed.  Two-sided planes hit from below
    show their back color.
    """
    comp = scene if isinstance(scene, CompiledScene) else compile_scene(scene)
    if not hit.hit:
        return np.array(comp.background, dtype=float)
    pos = hit.position
    vel = hit.velocity
    n = surface_normal(pos, comp, hit.object_id)
    speed = np.sqrt(metric_inner(pos, vel, vel))
    light = -vel / speed
    lam = max(0.0, float(metric_inner(pos, n, light)))
    base = comp.obj_color[hit.object_id]
    if comp.obj_kind[hit.object_id] == 0 and n[2] < 0.0:
        base = comp.obj_back_color[hit.object_id]
    rgb = base * lam * np.exp(-comp.fog * hit.t)
    return np.clip(rgb, 0.0, 1.0)


def _render_reference(cam: Camera, comp: CompiledScene, params: MarchParams):
    """Per-pixel python render; kept for parity testing at tiny resolutions."""
    w, h = cam.resolution
    img = np.zeros((h, w, 3))
    steps = np.zeros((h, w), dtype=np.int32)
    hits = np.zeros((h, w), dtype=bool)
    wraps = np.zeros((h, w), dtype=np.int32)
    for iy in range(h):
        for ix in range(w):
            ray = generate_ray(cam, (ix, iy))
            rec = march(ray, comp, params)
            img[iy, ix] = shade(rec, ray, comp)
            steps[iy, ix] = rec.steps
            hits[iy, ix] = rec.hit
            wraps[iy, ix] = rec.wrap_count
    return img, steps, hits, wraps


def quantize(img: np.ndarray) -> np.ndarray:
    """Float RGB in [0, 1] to 8-bit, rounding half away from boundary drift."""
    return np.clip(np.rint(img * 255.0), 0.0, 255.0).astype(np.uint8)


def default_threads() -> int:
    env = os.environ.get("SOLMARCH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def render(
    cam: Camera,
    scene,
    params: MarchParams | None = None,
    threads: int | None = None,
    supersample: int = 1,
    use_kernel: bool = True,
):
    """Render the scene to an 8-bit RGB image plus diagnostics.

    Rows are traced concurrently by the compiled kernel; output bytes depend
    only on the inputs, never on the thread count.  supersample=2 renders a
    doubled grid and box-filters down (off by default).
    """
    params = params or MarchParams()
    comp = scene if isinstance(scene, CompiledScene) else compile_scene(scene)
    if supersample not in (1, 2):
        raise ValueError("supersample must be 1 or 2")
    w, h = cam.resolution
    t0 = time.perf_counter()
    if use_kernel:
        from . import kernels

        render_cam = cam
        if supersample == 2:
            render_cam = Camera(cam.observer, cam.fov, (2 * w, 2 * h))
        img, steps, hits, wraps_arr = kernels.render_image(render_cam, comp, params, threads)
        if supersample == 2:
            img = 0.25 * (img[0::2, 0::2] + img[1::2, 0::2] + img[0::2, 1::2] + img[1::2, 1::2])
            steps = steps[0::2, 0::2]
            hits = hits[0::2, 0::2]
            wraps_arr = wraps_arr[0::2, 0::2]
    else:
        img, steps, hits, wraps_arr = _render_reference(cam, comp, params)
    wall = time.perf_counter() - t0
    diag = RenderDiagnostics(
        rays=int(steps.size),
        mean_steps=float(np.sum(steps, dtype=np.int64)) / steps.size,
        misses=int(steps.size - np.sum(hits, dtype=np.int64)),
        wraps=int(np.sum(wraps_arr, dtype=np.int64)),
        wall_time=wall,
    )
    return quantize(img), diag
