"""Compiled per-ray render kernel (numba).

This is the fast path behind `marcher.render`: the same sphere-tracing loop as
the reference `marcher.march` / `marcher.shade`, restated as scalar arithmetic in
the identical operation order so the two paths agree (a dedicated parity test
keeps them honest).  Pixels are fully independent, so the row-parallel loop
is deterministic for any thread count.

One divergence from the reference path: a degenerate surface normal (never
observed on real scenes) cannot raise from inside the kernel, so the pixel
shades to black instead.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange, set_num_threads, config as numba_config

from . import geodesic as _flow_mod
from . import lattice as _lat
from . import scene as _scene_mod

PHI = float(_lat.PHI)
Z_PERIOD = float(_lat.Z_PERIOD)
CELL_NORM2 = float(_lat.CELL_NORM2)
MAX_Z_REDUCTION = int(_lat.MAX_Z_REDUCTION)
MAX_ABS_Z = float(_flow_mod.MAX_ABS_Z)
MAX_ABS_COORD = float(_flow_mod.MAX_ABS_COORD)
FD_STEP = float(_scene_mod.FD_STEP)
HOLE_BIAS_STEPS = 4.0


@njit(cache=True)
def _sheet(dx, dy, ezp, emzp, ezq, emzq):
    s = (dx * dx + (ezp - ezq) ** 2) / (2.0 * ezp * ezq)
    da = math.log1p(s + math.sqrt(s * (s + 2.0)))
    s = (dy * dy + (emzp - emzq) ** 2) / (2.0 * emzp * emzq)
    db = math.log1p(s + math.sqrt(s * (s + 2.0)))
    return max(da, db)


@njit(cache=True)
def _rk4_step(x, y, z, vx, vy, vz, dt):
    k1x, k1y, k1z = vx, vy, vz
    k1vx = 2.0 * vx * vz
    k1vy = -2.0 * vy * vz
    k1vz = math.exp(2.0 * z) * vy * vy - math.exp(-2.0 * z) * vx * vx

    hx, hy, hz = x + 0.5 * dt * k1x, y + 0.5 * dt * k1y, z + 0.5 * dt * k1z
    hvx, hvy, hvz = vx + 0.5 * dt * k1vx, vy + 0.5 * dt * k1vy, vz + 0.5 * dt * k1vz
    k2x, k2y, k2z = hvx, hvy, hvz
    k2vx = 2.0 * hvx * hvz
    k2vy = -2.0 * hvy * hvz
    k2vz = math.exp(2.0 * hz) * hvy * hvy - math.exp(-2.0 * hz) * hvx * hvx

    hx, hy, hz = x + 0.5 * dt * k2x, y + 0.5 * dt * k2y, z + 0.5 * dt * k2z
    hvx, hvy, hvz = vx + 0.5 * dt * k2vx, vy + 0.5 * dt * k2vy, vz + 0.5 * dt * k2vz
    k3x, k3y, k3z = hvx, hvy, hvz
    k3vx = 2.0 * hvx * hvz
    k3vy = -2.0 * hvy * hvz
    k3vz = math.exp(2.0 * hz) * hvy * hvy - math.exp(-2.0 * hz) * hvx * hvx

    hx, hy, hz = x + dt * k3x, y + dt * k3y, z + dt * k3z
    hvx, hvy, hvz = vx + dt * k3vx, vy + dt * k3vy, vz + dt * k3vz
    k4x, k4y, k4z = hvx, hvy, hvz
    k4vx = 2.0 * hvx * hvz
    k4vy = -2.0 * hvy * hvz
    k4vz = math.exp(2.0 * hz) * hvy * hvy - math.exp(-2.0 * hz) * hvx * hvx

    sixth = dt / 6.0
    return (
        x + sixth * (k1x + 2.0 * (k2x + k3x) + k4x),
        y + sixth * (k1y + 2.0 * (k2y + k3y) + k4y),
        z + sixth * (k1z + 2.0 * (k2z + k3z) + k4z),
        vx + sixth * (k1vx + 2.0 * (k2vx + k3vx) + k4vx),
        vy + sixth * (k1vy + 2.0 * (k2vy + k3vy) + k4vy),
        vz + sixth * (k1vz + 2.0 * (k2vz + k3vz) + k4vz),
    )


@njit(cache=True)
def _state_ok(x, y, z, vx, vy, vz):
    if not (
        math.isfinite(x)
        and math.isfinite(y)
        and math.isfinite(z)
        and math.isfinite(vx)
        and math.isfinite(vy)
        and math.isfinite(vz)
    ):
        return False
    if abs(z) > MAX_ABS_Z:
        return False
    m = MAX_ABS_COORD
    if abs(x) > m or abs(y) > m or abs(vx) > m or abs(vy) > m or abs(vz) > m:
        return False
    return True


@njit(cache=True)
def _flow(x, y, z, vx, vy, vz, t, dt):
    """Fixed-step RK4 over time t; returns state + ok flag."""
    n = int(t / dt)
    rem = t - n * dt
    if rem < 1e-15:
        rem = 0.0
    for i in range(n):
        x, y, z, vx, vy, vz = _rk4_step(x, y, z, vx, vy, vz, dt)
        if i % 16 == 15 and not _state_ok(x, y, z, vx, vy, vz):
            return x, y, z, vx, vy, vz, False
    if rem > 0.0:
        x, y, z, vx, vy, vz = _rk4_step(x, y, z, vx, vy, vz, rem)
    return x, y, z, vx, vy, vz, _state_ok(x, y, z, vx, vy, vz)


@njit(cache=True)
def _teleport(x, y, z, vx, vy):
    """Domain reduction; mirrors lattice.teleport_state.  Returns moved + ok."""
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)) or abs(z) >= 50.0:
        return x, y, z, vx, vy, False, False

    n3 = int(math.floor(z / Z_PERIOD))
    if n3 < -MAX_Z_REDUCTION:
        n3 = -MAX_Z_REDUCTION
    elif n3 > MAX_Z_REDUCTION:
        n3 = MAX_Z_REDUCTION
    if n3 != 0:
        scale = PHI ** (-2.0 * n3)
        x = x * scale
        y = y / scale
        z = z - n3 * Z_PERIOD
        while z < 0.0:
            n3 -= 1
            x = x * PHI * PHI
            y = y / (PHI * PHI)
            z = z + Z_PERIOD
        while z >= Z_PERIOD:
            n3 += 1
            x = x / (PHI * PHI)
            y = y * PHI * PHI
            z = z - Z_PERIOD

    m1 = 0
    m2 = 0
    for _ in range(4):
        a = (PHI * x - y) / CELL_NORM2
        b = (x + PHI * y) / CELL_NORM2
        k1 = int(math.floor(a + 0.5))
        k2 = int(math.floor(b + 0.5))
        if k1 == 0 and k2 == 0:
            break
        x -= k1 * PHI + k2
        y -= -k1 + k2 * PHI
        m1 += k1
        m2 += k2

    if n3 != 0:
        s = PHI ** (-2.0 * n3)
        vx = vx * s
        vy = vy / s
    moved = n3 != 0 or m1 != 0 or m2 != 0
    return x, y, z, vx, vy, moved, True


@njit(cache=True)
def _plane_distance(level, two_sided, quotient, z):
    if quotient:
        d = abs(z - level)
        d2 = abs(z - level - Z_PERIOD)
        if d2 < d:
            d = d2
        d3 = abs(z - level + Z_PERIOD)
        if d3 < d:
            d = d3
        return d
    d = z - level
    if two_sided:
        return abs(d)
    return d


@njit(cache=True)
def _ball_distance(centers, ez, emz, radius, x, y, z, exz, emxz):
    # centers: (T, 3) translates of one ball center
    best = np.inf
    for t in range(centers.shape[0]):
        d = _sheet(x - centers[t, 0], y - centers[t, 1], exz, emxz, ez[t], emz[t])
        if d < best:
            best = d
    return best - radius


@njit(cache=True)
def _tube_distance(
    samples, ez, emz, radius, bb_center, bb_ez, bb_emz, bb_extra, x, y, z, exz, emxz,
    init_bound=np.inf,
):
    # samples: (T, S, 3).  Translates whose bounding bound cannot beat the
    # running minimum (seeded with the caller's best candidate so far) are
    # skipped; results below the seed are exact, results at or above it are
    # never selected, so scene minima are unchanged by the pruning.
    best = init_bound + radius
    for t in range(samples.shape[0]):
        cheap = (
            _sheet(x - bb_center[t, 0], y - bb_center[t, 1], exz, emxz, bb_ez[t], bb_emz[t])
            - bb_extra
        )
        if cheap >= best:
            continue
        for s in range(samples.shape[1]):
            d = _sheet(x - samples[t, s, 0], y - samples[t, s, 1], exz, emxz, ez[t, s], emz[t, s])
            if d < best:
                best = d
    return best - radius


@njit(cache=True)
def _scene_distance(
    x, y, z, quotient,
    plane_level, plane_spacing, plane_hole_r, plane_two_sided, plane_ids,
    ball_centers, ball_ez, ball_emz, ball_radius, ball_ids,
    tube_samples, tube_ez, tube_emz, tube_radius,
    tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra, tube_ids,
):
    best = np.inf
    best_id = -1
    exz = math.exp(z)
    emxz = math.exp(-z)
    for pi in range(plane_level.shape[0]):
        d = _plane_distance(plane_level[pi], plane_two_sided[pi] != 0, quotient, z)
        if d < best:
            best = d
            best_id = plane_ids[pi]
    for bi in range(ball_radius.shape[0]):
        d = _ball_distance(
            ball_centers[bi], ball_ez[bi], ball_emz[bi], ball_radius[bi], x, y, z, exz, emxz
        )
        if d < best:
            best = d
            best_id = ball_ids[bi]
    for ui in range(tube_radius.shape[0]):
        d = _tube_distance(
            tube_samples[ui], tube_ez[ui], tube_emz[ui], tube_radius[ui],
            tube_bb_center[ui], tube_bb_ez[ui], tube_bb_emz[ui], tube_bb_extra[ui],
            x, y, z, exz, emxz, best,
        )
        if d < best:
            best = d
            best_id = tube_ids[ui]
    return best, best_id


@njit(cache=True)
def _object_distance(
    kind, local, x, y, z, quotient,
    plane_level, plane_two_sided,
    ball_centers, ball_ez, ball_emz, ball_radius,
    tube_samples, tube_ez, tube_emz, tube_radius,
    tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra,
):
    exz = math.exp(z)
    emxz = math.exp(-z)
    if kind == 0:
        return _plane_distance(plane_level[local], plane_two_sided[local] != 0, quotient, z)
    if kind == 1:
        return _ball_distance(
            ball_centers[local], ball_ez[local], ball_emz[local], ball_radius[local],
            x, y, z, exz, emxz,
        )
    return _tube_distance(
        tube_samples[local], tube_ez[local], tube_emz[local], tube_radius[local],
        tube_bb_center[local], tube_bb_ez[local], tube_bb_emz[local], tube_bb_extra[local],
        x, y, z, exz, emxz,
    )


@njit(cache=True)
def _surface_normal(
    kind, local, x, y, z, quotient,
    plane_level, plane_two_sided,
    ball_centers, ball_ez, ball_emz, ball_radius,
    tube_samples, tube_ez, tube_emz, tube_radius,
    tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra,
):
    if kind == 0:
        level = plane_level[local]
        side = z - level
        if quotient:
            k = math.floor((z - level) / Z_PERIOD + 0.5)
            side = z - level - k * Z_PERIOD
        if side >= 0.0:
            return 0.0, 0.0, 1.0
        return 0.0, 0.0, -1.0
    # central differences along the pushed orthonormal frame at (x, y, z)
    ax0 = math.exp(z)
    ax1 = math.exp(-z)
    g = np.empty(3)
    for i in range(3):
        if i == 0:
            dx, dy, dz = ax0, 0.0, 0.0
        elif i == 1:
            dx, dy, dz = 0.0, ax1, 0.0
        else:
            dx, dy, dz = 0.0, 0.0, 1.0
        fp = _object_distance(
            kind, local, x + FD_STEP * dx, y + FD_STEP * dy, z + FD_STEP * dz, quotient,
            plane_level, plane_two_sided,
            ball_centers, ball_ez, ball_emz, ball_radius,
            tube_samples, tube_ez, tube_emz, tube_radius,
            tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra,
        )
        fm = _object_distance(
            kind, local, x - FD_STEP * dx, y - FD_STEP * dy, z - FD_STEP * dz, quotient,
            plane_level, plane_two_sided,
            ball_centers, ball_ez, ball_emz, ball_radius,
            tube_samples, tube_ez, tube_emz, tube_radius,
            tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra,
        )
        g[i] = (fp - fm) / (2.0 * FD_STEP)
    norm = math.sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
    if norm < 1e-12:
        return 0.0, 0.0, 0.0  # degenerate; shades to black
    return (g[0] / norm) * ax0, (g[1] / norm) * ax1, g[2] / norm


@njit(cache=True)
def _planes_reachable(plane_level, plane_two_sided, x, y, z, vx, vy, vz, epsilon):
    """Mirrors marcher._planes_reachable: exact z-band prune for plane scenes."""
    px = math.exp(-2.0 * z) * vx
    py = math.exp(2.0 * z) * vy
    s2 = px * vx + py * vy + vz * vz
    if px == 0.0 and py == 0.0:
        z_lo = -np.inf
        z_hi = np.inf
    elif px == 0.0:
        z_lo = 0.5 * math.log(py * py / s2)
        z_hi = np.inf
    elif py == 0.0:
        z_lo = -np.inf
        z_hi = 0.5 * math.log(s2 / (px * px))
    else:
        disc = math.sqrt(s2 * s2 - 4.0 * (px * px) * (py * py))
        z_lo = 0.5 * math.log((2.0 * py * py) / (s2 + disc))
        z_hi = 0.5 * math.log((s2 + disc) / (2.0 * px * px))
    margin = 2.0 * epsilon
    for local in range(plane_level.shape[0]):
        level = plane_level[local]
        if z_lo > level + margin:
            continue
        if plane_two_sided[local] != 0 and z_hi < level - margin:
            continue
        return True
    return False


@njit(cache=True)
def _march(
    x, y, z, vx, vy, vz,
    quotient, epsilon, t_max, max_steps, ode_dt, safety, qcap,
    plane_level, plane_spacing, plane_hole_r, plane_two_sided, plane_ids,
    ball_centers, ball_ez, ball_emz, ball_radius, ball_ids,
    tube_samples, tube_ez, tube_emz, tube_radius,
    tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra, tube_ids,
    obj_kind, obj_local,
):
    t = 0.0
    steps = 0
    wraps = 0
    can_prune = (not quotient) and ball_radius.shape[0] == 0 and tube_radius.shape[0] == 0
    prune_checked = False
    while True:
        if quotient:
            x, y, z, vx, vy, moved, ok = _teleport(x, y, z, vx, vy)
            if not ok:
                return False, -1, min(t, t_max), x, y, z, vx, vy, vz, steps, wraps, True
            if moved:
                wraps += 1
        d, obj = _scene_distance(
            x, y, z, quotient,
            plane_level, plane_spacing, plane_hole_r, plane_two_sided, plane_ids,
            ball_centers, ball_ez, ball_emz, ball_radius, ball_ids,
            tube_samples, tube_ez, tube_emz, tube_radius,
            tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra, tube_ids,
        )
        if d < epsilon:
            if obj_kind[obj] == 0:
                local = obj_local[obj]
                spacing = plane_spacing[local]
                if spacing > 0.0:
                    hx = x % spacing - 0.5 * spacing
                    hy = y % spacing - 0.5 * spacing
                    if hx * hx + hy * hy < plane_hole_r[local] ** 2:
                        bias = HOLE_BIAS_STEPS * epsilon
                        x, y, z, vx, vy, vz, ok = _flow(x, y, z, vx, vy, vz, bias, ode_dt)
                        if not ok:
                            return False, -1, min(t, t_max), x, y, z, vx, vy, vz, steps, wraps, True
                        t += bias
                        steps += 1
                        if steps > max_steps or t >= t_max:
                            return False, -1, min(t, t_max), x, y, z, vx, vy, vz, steps, wraps, False
                        continue
            return True, obj, t, x, y, z, vx, vy, vz, steps, wraps, False
        remaining = t_max - t
        if remaining <= 0.0:
            return False, -1, t_max, x, y, z, vx, vy, vz, steps, wraps, False
        if d >= remaining:
            # the estimator is a lower bound, so the surface is out of reach
            return False, -1, t_max, x, y, z, vx, vy, vz, steps, wraps, False
        if can_prune and not prune_checked:
            prune_checked = True
            if not _planes_reachable(plane_level, plane_two_sided, x, y, z, vx, vy, vz, epsilon):
                return False, -1, t_max, x, y, z, vx, vy, vz, steps, wraps, False
        step = safety * max(d, epsilon)
        if quotient and step > qcap:
            step = qcap
        if step > remaining:
            step = remaining
        x, y, z, vx, vy, vz, ok = _flow(x, y, z, vx, vy, vz, step, ode_dt)
        if not ok:
            return False, -1, min(t, t_max), x, y, z, vx, vy, vz, steps, wraps, True
        t += step
        steps += 1
        if steps > max_steps:
            return False, -1, min(t, t_max), x, y, z, vx, vy, vz, steps, wraps, False


@njit(cache=True, parallel=True)
def _render(
    cam_x, cam_y, cam_z, frame, tanf, width, height, row0,
    quotient, fog, background,
    epsilon, t_max, max_steps, ode_dt, safety, qcap,
    obj_kind, obj_local, obj_color, obj_back_color,
    plane_level, plane_spacing, plane_hole_r, plane_two_sided, plane_ids,
    ball_centers, ball_ez, ball_emz, ball_radius, ball_ids,
    tube_samples, tube_ez, tube_emz, tube_radius,
    tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra, tube_ids,
    img, steps_out, hit_out, wraps_out,
):
    # Renders rows [row0, row0 + img.shape[0]) of the full height x width
    # frame; pixel values depend only on global coordinates, so tiles of the
    # same frame agree byte-for-byte with a full render.
    aspect = width / height
    for iy in prange(img.shape[0]):
        giy = iy + row0
        for ix in range(width):
            u = (2.0 * (ix + 0.5) / width - 1.0) * tanf * aspect
            v = (1.0 - 2.0 * (giy + 0.5) / height) * tanf
            nrm = math.sqrt(u * u + v * v + 1.0)
            lx = u / nrm
            ly = v / nrm
            lz = -1.0 / nrm
            wx = frame[0, 0] * lx + frame[0, 1] * ly + frame[0, 2] * lz
            wy = frame[1, 0] * lx + frame[1, 1] * ly + frame[1, 2] * lz
            wz = frame[2, 0] * lx + frame[2, 1] * ly + frame[2, 2] * lz
            vx = math.exp(cam_z) * wx
            vy = math.exp(-cam_z) * wy
            vz = wz

            hit, obj, t, hx, hy, hz, hvx, hvy, hvz, nsteps, nwraps, _blow = _march(
                cam_x, cam_y, cam_z, vx, vy, vz,
                quotient, epsilon, t_max, max_steps, ode_dt, safety, qcap,
                plane_level, plane_spacing, plane_hole_r, plane_two_sided, plane_ids,
                ball_centers, ball_ez, ball_emz, ball_radius, ball_ids,
                tube_samples, tube_ez, tube_emz, tube_radius,
                tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra, tube_ids,
                obj_kind, obj_local,
            )
            steps_out[iy, ix] = nsteps
            hit_out[iy, ix] = 1 if hit else 0
            wraps_out[iy, ix] = nwraps
            if not hit:
                img[iy, ix, 0] = background[0]
                img[iy, ix, 1] = background[1]
                img[iy, ix, 2] = background[2]
                continue
            nx, ny, nz = _surface_normal(
                obj_kind[obj], obj_local[obj], hx, hy, hz, quotient,
                plane_level, plane_two_sided,
                ball_centers, ball_ez, ball_emz, ball_radius,
                tube_samples, tube_ez, tube_emz, tube_radius,
                tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra,
            )
            speed = math.sqrt(
                math.exp(-2.0 * hz) * (hvx * hvx) + math.exp(2.0 * hz) * (hvy * hvy) + hvz * hvz
            )
            gx = -hvx / speed
            gy = -hvy / speed
            gz = -hvz / speed
            lam = (
                math.exp(-2.0 * hz) * (nx * gx) + math.exp(2.0 * hz) * (ny * gy) + nz * gz
            )
            if lam < 0.0:
                lam = 0.0
            atten = math.exp(-fog * t)
            for c in range(3):
                base = obj_color[obj, c]
                if obj_kind[obj] == 0 and nz < 0.0:
                    base = obj_back_color[obj, c]
                val = base * lam * atten
                if val < 0.0:
                    val = 0.0
                elif val > 1.0:
                    val = 1.0
                img[iy, ix, c] = val


def march_state(state, comp, params):
    """Run the compiled march on one ray; returns the same tuple as _march."""
    (
        quotient, fog, background, obj_kind, obj_local, obj_color, obj_back,
        plane_level, plane_spacing, plane_hole_r, plane_two_sided, plane_ids,
        ball_centers, ball_ez, ball_emz, ball_radius, ball_ids,
        tube_samples, tube_ez, tube_emz, tube_radius,
        tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra, tube_ids,
    ) = comp.kernel_args()
    pos = np.asarray(state.pos, dtype=float)
    vel = np.asarray(state.vel, dtype=float)
    return _march(
        pos[0], pos[1], pos[2], vel[0], vel[1], vel[2],
        bool(quotient), params.epsilon, params.t_max, params.max_steps,
        params.ode_dt, params.safety, params.quotient_step_cap,
        plane_level, plane_spacing, plane_hole_r, plane_two_sided, plane_ids,
        ball_centers, ball_ez, ball_emz, ball_radius, ball_ids,
        tube_samples, tube_ez, tube_emz, tube_radius,
        tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra, tube_ids,
        obj_kind, obj_local,
    )


def render_rows(cam, comp, params, row0: int, row1: int, threads=None):
    """Render rows [row0, row1) via the compiled kernel.

    Returns (img float (rows, w, 3), steps, hits, wraps).
    """
    from .marcher import default_threads

    n = threads if threads is not None else default_threads()
    n = max(1, min(int(n), numba_config.NUMBA_NUM_THREADS))
    set_num_threads(n)

    (
        quotient, fog, background, obj_kind, obj_local, obj_color, obj_back,
        plane_level, plane_spacing, plane_hole_r, plane_two_sided, plane_ids,
        ball_centers, ball_ez, ball_emz, ball_radius, ball_ids,
        tube_samples, tube_ez, tube_emz, tube_radius,
        tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra, tube_ids,
    ) = comp.kernel_args()
    w, h = cam.resolution
    if not 0 <= row0 < row1 <= h:
        raise ValueError(f"invalid row range [{row0}, {row1}) for height {h}")
    rows = row1 - row0
    img = np.zeros((rows, w, 3))
    steps = np.zeros((rows, w), dtype=np.int32)
    hits = np.zeros((rows, w), dtype=np.uint8)
    wraps = np.zeros((rows, w), dtype=np.int32)
    obs = cam.observer
    _render(
        obs.position[0], obs.position[1], obs.position[2],
        np.ascontiguousarray(obs.frame, dtype=float),
        float(np.tan(0.5 * cam.fov)), w, h, row0,
        bool(quotient), fog, background,
        params.epsilon, params.t_max, params.max_steps,
        params.ode_dt, params.safety, params.quotient_step_cap,
        obj_kind, obj_local, obj_color, obj_back,
        plane_level, plane_spacing, plane_hole_r, plane_two_sided, plane_ids,
        ball_centers, ball_ez, ball_emz, ball_radius, ball_ids,
        tube_samples, tube_ez, tube_emz, tube_radius,
        tube_bb_center, tube_bb_ez, tube_bb_emz, tube_bb_extra, tube_ids,
        img, steps, hits, wraps,
    )
    return img, steps, hits.astype(bool), wraps


def render_image(cam, comp, params, threads=None):
    """Render the full frame; returns (img float, steps, hits, wraps)."""
    return render_rows(cam, comp, params, 0, cam.resolution[1], threads)
