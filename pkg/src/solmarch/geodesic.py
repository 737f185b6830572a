"""Geodesic flow, conserved quantities, parallel transport, and navigation.

A unit-speed geodesic c(t) = (x, y, z)(t) satisfies

    x'' = 2 x' z',    y'' = -2 y' z',    z'' = -e^{-2z} x'^2 + e^{2z} y'^2,

the Euler-Lagrange system of the metric; e^{-2z} x', e^{2z} y' and the squared
speed are exact constants of motion and double as integrator diagnostics.

Orientation along a geodesic is carried by the frame matrix q, the transport
operator pulled back to the origin through left translation.  With
u = pulled-back velocity, q solves q' = -B(u) q for the antisymmetric B built
from (u_x, u_y), so q stays in SO(3); we re-orthonormalize periodically to
bound float drift.

Integration is fixed-step classical Runge-Kutta (RK4) throughout: the final
partial step is shortened, and the flow aborts with :class:`FlowBlowupError`
once coordinates leave the trustworthy float range (callers reduce into a
fundamental domain first when working on a quotient).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import inverse, metric_inner, mul, pull_tangent, push_tangent

# Blow-up guard: e^{+-2z} overflow protection and NaN containment.
MAX_ABS_Z = 50.0
MAX_ABS_COORD = 1e20

# Frame re-orthonormalization policy.
REORTHO_EVERY = 64
REORTHO_DRIFT = 1e-9


class FlowBlowupError(RuntimeError):
    """Raised when an integrated state leaves the trustworthy float range."""


class TangentState(NamedTuple):
    """Position and velocity (model components at the position)."""

    pos: np.ndarray
    vel: np.ndarray


class FirstIntegrals(NamedTuple):
    """Constants of motion of the geodesic flow."""

    px: np.ndarray
    py: np.ndarray
    speed2: np.ndarray


def geodesic_rhs(pos, vel):
    """Right-hand side of the geodesic system: returns (d pos, d vel)."""
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    z = pos[..., 2]
    vx, vy, vz = vel[..., 0], vel[..., 1], vel[..., 2]
    acc = np.stack(
        [
            2.0 * vx * vz,
            -2.0 * vy * vz,
            np.exp(2.0 * z) * vy * vy - np.exp(-2.0 * z) * vx * vx,
        ],
        axis=-1,
    )
    return vel, acc


def first_integrals(state: TangentState) -> FirstIntegrals:
    """Momenta conjugate to x and y plus squared speed; constant along geodesics."""
    pos = np.asarray(state.pos, dtype=float)
    vel = np.asarray(state.vel, dtype=float)
    z = pos[..., 2]
    return FirstIntegrals(
        np.exp(-2.0 * z) * vel[..., 0],
        np.exp(2.0 * z) * vel[..., 1],
        metric_inner(pos, vel, vel),
    )


def _check_state(pos, vel):
    bad = (
        not np.all(np.isfinite(pos))
        or not np.all(np.isfinite(vel))
        or np.any(np.abs(pos[..., 2]) > MAX_ABS_Z)
        or np.any(np.abs(pos) > MAX_ABS_COORD)
        or np.any(np.abs(vel) > MAX_ABS_COORD)
    )
    if bad:
        raise FlowBlowupError(
            "geodesic state left the trustworthy range "
            f"(|z| > {MAX_ABS_Z:g} or |component| > {MAX_ABS_COORD:g})"
        )


def _rk4_step(rhs, pos, vel, dt):
    k1p, k1v = rhs(pos, vel)
    k2p, k2v = rhs(pos + 0.5 * dt * k1p, vel + 0.5 * dt * k1v)
    k3p, k3v = rhs(pos + 0.5 * dt * k2p, vel + 0.5 * dt * k2v)
    k4p, k4v = rhs(pos + dt * k3p, vel + dt * k3v)
    sixth = dt / 6.0
    return (
        pos + sixth * (k1p + 2.0 * (k2p + k3p) + k4p),
        vel + sixth * (k1v + 2.0 * (k2v + k3v) + k4v),
    )


def _split_steps(t: float, dt: float):
    n = int(t / dt)
    rem = t - n * dt
    if rem < 1e-15:
        rem = 0.0
    return n, rem


def flow(state: TangentState, t: float, dt: float, rhs: Callable = geodesic_rhs) -> TangentState:
    """Integrate the geodesic system for time t with fixed RK4 step dt.

    `rhs` is an injection point for diagnostics (e.g. the self-test's
    sign-mutation check); production callers leave it alone.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t < 0.0:
        raise ValueError("t must be non-negative")
    pos = np.asarray(state.pos, dtype=float)
    vel = np.asarray(state.vel, dtype=float)
    _check_state(pos, vel)
    n, rem = _split_steps(t, dt)
    for i in range(n):
        pos, vel = _rk4_step(rhs, pos, vel, dt)
        if i % 16 == 15:
            _check_state(pos, vel)
    if rem > 0.0:
        pos, vel = _rk4_step(rhs, pos, vel, rem)
    _check_state(pos, vel)
    return TangentState(pos, vel)


def flow_path(state: TangentState, t: float, dt: float, rhs: Callable = geodesic_rhs):
    """Like :func:`flow` but records every step.

    Returns (times, positions, velocities) with leading axis of length
    n_steps + 1 (the initial state is row 0, the state at time t is last).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t < 0.0:
        raise ValueError("t must be non-negative")
    pos = np.asarray(state.pos, dtype=float)
    vel = np.asarray(state.vel, dtype=float)
    _check_state(pos, vel)
    n, rem = _split_steps(t, dt)
    count = n + (1 if rem > 0.0 else 0)
    ts = np.empty(count + 1)
    poss = np.empty((count + 1,) + pos.shape)
    vels = np.empty((count + 1,) + vel.shape)
    ts[0], poss[0], vels[0] = 0.0, pos, vel
    for i in range(n):
        pos, vel = _rk4_step(rhs, pos, vel, dt)
        if i % 16 == 15:
            _check_state(pos, vel)
        ts[i + 1], poss[i + 1], vels[i + 1] = (i + 1) * dt, pos, vel
    if rem > 0.0:
        pos, vel = _rk4_step(rhs, pos, vel, rem)
        ts[-1], poss[-1], vels[-1] = t, pos, vel
    _check_state(pos, vel)
    return ts, poss, vels


# ---------------------------------------------------------------------------
# Parallel transport pulled back to the origin.
# ---------------------------------------------------------------------------


def transport_rhs(u):
    """Antisymmetric generator B(u) of the pulled-back transport equation q' = -B q."""
    u = np.asarray(u, dtype=float)
    ux, uy = u[..., 0], u[..., 1]
    zero = np.zeros_like(ux)
    return np.stack(
        [
            np.stack([zero, zero, -ux], axis=-1),
            np.stack([zero, zero, uy], axis=-1),
            np.stack([ux, -uy, zero], axis=-1),
        ],
        axis=-2,
    )


def orthonormalize_frame(q):
    """Modified Gram-Schmidt on the columns of q; assumes q is near SO(3)."""
    q = np.array(q, dtype=float)
    for i in range(3):
        for j in range(i):
            q[:, i] -= (q[:, j] @ q[:, i]) * q[:, j]
        q[:, i] /= np.linalg.norm(q[:, i])
    return q


def frame_drift(q):
    """Max-norm deviation of q^T q from the identity."""
    return float(np.max(np.abs(q.T @ q - np.eye(3))))


def flow_with_transport(
    state: TangentState, q0, t: float, dt: float
) -> tuple[TangentState, np.ndarray]:
    """Co-integrate the geodesic and its transport frame with RK4.

    Returns the end state and the transported frame.  The frame is
    re-orthonormalized at most once per REORTHO_EVERY steps, or sooner when
    its orthogonality drift exceeds REORTHO_DRIFT.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t < 0.0:
        raise ValueError("t must be non-negative")
    pos = np.asarray(state.pos, dtype=float)
    vel = np.asarray(state.vel, dtype=float)
    q = np.array(q0, dtype=float)

    def rhs(p, v, m):
        dv_p, dv_v = geodesic_rhs(p, v)
        u = pull_tangent(p, v)
        return dv_p, dv_v, -transport_rhs(u) @ m

    def step(p, v, m, h):
        k1p, k1v, k1m = rhs(p, v, m)
        k2p, k2v, k2m = rhs(p + 0.5 * h * k1p, v + 0.5 * h * k1v, m + 0.5 * h * k1m)
        k3p, k3v, k3m = rhs(p + 0.5 * h * k2p, v + 0.5 * h * k2v, m + 0.5 * h * k2m)
        k4p, k4v, k4m = rhs(p + h * k3p, v + h * k3v, m + h * k3m)
        sixth = h / 6.0
        return (
            p + sixth * (k1p + 2.0 * (k2p + k3p) + k4p),
            v + sixth * (k1v + 2.0 * (k2v + k3v) + k4v),
            m + sixth * (k1m + 2.0 * (k2m + k3m) + k4m),
        )

    _check_state(pos, vel)
    n, rem = _split_steps(t, dt)
    for i in range(n):
        pos, vel, q = step(pos, vel, q, dt)
        if i % 16 == 15:
            _check_state(pos, vel)
        if i % REORTHO_EVERY == REORTHO_EVERY - 1 or frame_drift(q) > REORTHO_DRIFT:
            q = orthonormalize_frame(q)
    if rem > 0.0:
        pos, vel, q = step(pos, vel, q, rem)
    _check_state(pos, vel)
    if frame_drift(q) > REORTHO_DRIFT:
        q = orthonormalize_frame(q)
    return TangentState(pos, vel), q


# ---------------------------------------------------------------------------
# Observer: a group element plus a pulled-back orthonormal frame.  The frame
# columns are the camera axes (right, up, backward) expressed at the origin;
# the world-frame axes at the observer are their push-forwards.
# ---------------------------------------------------------------------------


@dataclass
class Observer:
    position: np.ndarray
    frame: np.ndarray

    @classmethod
    def at(cls, position=(0.0, 0.0, 0.0), frame=None) -> "Observer":
        f = np.eye(3) if frame is None else np.array(frame, dtype=float)
        return cls(np.asarray(position, dtype=float).copy(), f)

    def world_axis(self, local_dir) -> np.ndarray:
        """Push a camera-frame direction to a world tangent at the position."""
        return push_tangent(self.position, self.frame @ np.asarray(local_dir, dtype=float))


def observer_step(
    obs: Observer, local_dir, speed: float, dt: float, ode_dt: float = 1e-3
) -> Observer:
    """Move for time dt along the geodesic pointed to by `local_dir` in the frame.

    The frame is carried by parallel transport; `ode_dt` is the internal RK4
    step.  speed = 0 is the identity.
    """
    if speed < 0.0:
        raise ValueError("speed must be non-negative")
    if speed == 0.0:
        return obs
    d = np.asarray(local_dir, dtype=float)
    norm = np.linalg.norm(d)
    if norm == 0.0:
        raise ValueError("local_dir must be nonzero")
    vel = push_tangent(obs.position, obs.frame @ (d / norm)) * speed
    state, q = flow_with_transport(TangentState(obs.position, vel), obs.frame, dt, ode_dt)
    return Observer(state.pos, q)


def rotate_observer(obs: Observer, r) -> Observer:
    """Rotate the camera frame in place: frame <- frame @ r, position unchanged."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or np.max(np.abs(r.T @ r - np.eye(3))) > 1e-6 or np.linalg.det(r) < 0.0:
        raise ValueError("rotation must be a proper orthogonal 3x3 matrix")
    q = obs.frame @ r
    if frame_drift(q) > REORTHO_DRIFT:
        q = orthonormalize_frame(q)
    return Observer(obs.position.copy(), q)


# ---------------------------------------------------------------------------
# Geodesic spheres and two-point connection.
# ---------------------------------------------------------------------------


def sphere_grid_directions(n_theta: int, n_phi: int):
    """Unit directions on a (theta, phi) grid plus both poles.

    Rows: north pole, then n_theta rings of n_phi samples (theta strictly
    between the poles), then south pole.  Total n_theta * n_phi + 2.
    """
    if n_theta < 2 or n_phi < 2:
        raise ValueError("grid sizes must be at least 2")
    theta = np.pi * (np.arange(n_theta) + 1) / (n_theta + 1)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    ring = np.stack(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1
    ).reshape(-1, 3)
    north = np.array([[0.0, 0.0, 1.0]])
    south = np.array([[0.0, 0.0, -1.0]])
    return np.concatenate([north, ring, south], axis=0)


def sphere_grid_faces(n_theta: int, n_phi: int) -> np.ndarray:
    """Triangulation (0-based indices) matching :func:`sphere_grid_directions`."""
    faces = []
    ring = lambda i, j: 1 + i * n_phi + (j % n_phi)
    south = 1 + n_theta * n_phi
    for j in range(n_phi):
        faces.append((0, ring(0, j), ring(0, j + 1)))
    for i in range(n_theta - 1):
        for j in range(n_phi):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            faces.append((a, c, d))
            faces.append((a, d, b))
    for j in range(n_phi):
        faces.append((south, ring(n_theta - 1, j + 1), ring(n_theta - 1, j)))
    return np.array(faces, dtype=np.int64)


def geodesic_sphere(radius: float, n_theta: int, n_phi: int, dt: float = 1e-3):
    """Endpoint cloud of unit-speed geodesics from the origin, flowed for `radius`.

    Returns (points, faces): the sphere sample points (n_theta * n_phi + 2, 3)
    and the grid triangulation.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    dirs = sphere_grid_directions(n_theta, n_phi)
    origins = np.zeros_like(dirs)
    end = flow(TangentState(origins, dirs), radius, dt)
    return end.pos, sphere_grid_faces(n_theta, n_phi)


def connect(p, q, dt: float = 1e-3, tol: float = 1e-10, max_iter: int = 40) -> TangentState:
    """Shoot a geodesic from p reaching q at time 1 (Newton on the endpoint map).

    Best-effort helper for building tube spines between nearby points; the
    endpoint map is far from injective globally, so the Newton iteration is
    seeded with the straight-coordinate guess and only trusted at desk scale.
    The returned velocity's metric norm is the path length.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    v = push_tangent(p, mul(inverse(p), q))  # straight-coordinate initial guess

    def endpoint(vel):
        return flow(TangentState(p, vel), 1.0, dt).pos

    for _ in range(max_iter):
        err = endpoint(v) - q
        if np.max(np.abs(err)) < tol:
            return TangentState(p, v)
        jac = np.empty((3, 3))
        h = 1e-7 * max(1.0, float(np.max(np.abs(v))))
        for k in range(3):
            dv = np.zeros(3)
            dv[k] = h
            jac[:, k] = (endpoint(v + dv) - endpoint(v - dv)) / (2.0 * h)
        v = v - np.linalg.solve(jac, err)
    raise RuntimeError(f"geodesic connection did not converge for {p} -> {q}")
