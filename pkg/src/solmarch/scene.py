"""Scene description and distance estimators for geodesic sphere tracing.

Distance to a horizontal plane {z = c} is exact: vertical lines are
minimizing geodesics, so the signed distance from (x, y, z) is z - c.

No closed form is available for distance to a point, so balls and tubes use
a guaranteed *lower bound* instead: the maps (x, y, z) -> (x, e^z) and
(x, y, z) -> (y, e^{-z}) project onto copies of the hyperbolic half-plane
(the totally geodesic sheets {y = const} and {x = const}) and both are
1-Lipschitz, hence

    sheet_lower_bound(p, q) = max(d_H(proj_x p, proj_x q),
                                  d_H(proj_y p, proj_y q))

never exceeds the true distance.  Sphere tracing with such a bound can
stall but can never overshoot; surfaces render slightly inflated where the
bound is slack (it is exact on vertical pairs).

In quotient mode every ball/tube estimate is additionally taken over the
immediate block of neighboring lattice translates of the object, and the
marcher caps its step length, so wrap-around copies cannot be tunneled
through between teleports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import lattice
from .core import push_tangent
from .geodesic import TangentState, connect, flow

FD_STEP = 1e-4  # finite-difference step for surface normals

# Neighbor block used for quotient wrap-around: identity first, then the
# remaining (i, j, k) with planar exponents i, j and vertical exponent k.
_NEIGHBOR_OFFSETS = [(0, 0, 0)] + [
    (i, j, k)
    for k in (-1, 0, 1)
    for i in (-1, 0, 1)
    for j in (-1, 0, 1)
    if (i, j, k) != (0, 0, 0)
]


class SceneError(ValueError):
    """Invalid scene description."""


class DegenerateNormalError(RuntimeError):
    """The distance estimator had a vanishing gradient at a surface point."""

    def __init__(self, object_id: int):
        super().__init__(f"degenerate surface normal for object {object_id}")
        self.object_id = object_id


class DistanceEstimate(NamedTuple):
    value: float
    object_id: int


@dataclass(frozen=True)
class HorizontalPlane:
    """Plane {z = level}, optionally perforated by a square grid of circular holes.

    Hole centers sit at (spacing/2 + m*spacing, spacing/2 + n*spacing); a
    spacing of None means solid.
    """

    level: float = 0.0
    hole_spacing: float | None = 1.0
    hole_radius: float = 0.35
    color: tuple = (0.85, 0.40, 0.25)
    back_color: tuple = (0.80, 0.80, 0.80)
    two_sided: bool = True

    def __post_init__(self):
        if self.hole_spacing is not None:
            if self.hole_spacing <= 0.0:
                raise SceneError("hole_spacing must be positive")
            if not 0.0 < self.hole_radius < self.hole_spacing / 2.0:
                raise SceneError("hole_radius must be in (0, hole_spacing / 2)")


@dataclass(frozen=True)
class Ball:
    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 0.3
    color: tuple = (0.90, 0.85, 0.30)

    def __post_init__(self):
        if self.radius <= 0.0:
            raise SceneError("ball radius must be positive")


@dataclass(frozen=True)
class Tube:
    """Radius-r neighborhood of a sampled geodesic segment.

    `samples` are points along the connecting geodesic (precomputed by the
    flow); the estimator is the min of the ball bound over the samples, a
    valid lower bound of distance to the sampled polyline's r-neighborhood.
    """

    samples: tuple
    radius: float = 0.09
    color: tuple = (0.35, 0.65, 0.90)

    def __post_init__(self):
        if self.radius <= 0.0:
            raise SceneError("tube radius must be positive")
        if len(self.samples) < 2:
            raise SceneError("tube needs at least 2 samples")

    @classmethod
    def between(cls, p, q, radius=0.09, n_samples=24, color=(0.35, 0.65, 0.90), dt=1e-3):
        """Tube along the geodesic from p to q (two-point shooting at build time)."""
        state = connect(p, q, dt=dt)
        pts = [np.asarray(p, dtype=float)]
        for t in np.linspace(0.0, 1.0, n_samples)[1:-1]:
            pts.append(flow(state, float(t), dt).pos)
        pts.append(np.asarray(q, dtype=float))
        return cls(tuple(tuple(pt) for pt in pts), radius, color)

    @classmethod
    def along_generator(cls, index: int, radius=0.09, n_samples=24, color=(0.35, 0.65, 0.90)):
        """Tube from the origin to lattice generator 1, 2, or 3."""
        gens = {1: lattice.GAMMA1, 2: lattice.GAMMA2, 3: lattice.GAMMA3}
        if index not in gens:
            raise SceneError(f"generator index must be 1, 2 or 3, got {index}")
        return cls.between(np.zeros(3), gens[index], radius, n_samples, color)


@dataclass(frozen=True)
class Light:
    """Accepted for scene-file compatibility; the v1 shader is headlamp-only."""

    direction: tuple | None = None
    position: tuple | None = None
    intensity: float = 1.0


@dataclass(frozen=True)
class Scene:
    objects: tuple
    lights: tuple = ()
    background: tuple = (0.0, 0.0, 0.0)
    fog: float = 0.0
    quotient: bool = False
    lattice_generators: lattice.LatticeGenerators = field(default=lattice.GOLDEN_LATTICE)

    def __post_init__(self):
        if not self.objects:
            raise SceneError("a render scene needs at least one object")
        if self.fog < 0.0:
            raise SceneError("fog density must be non-negative")
        if self.quotient:
            for obj in self.objects:
                if isinstance(obj, HorizontalPlane) and obj.hole_spacing is not None:
                    raise SceneError(
                        "hole tilings are not lattice-periodic; "
                        "use solid planes in quotient scenes"
                    )


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def sdf_plane(p, level: float = 0.0):
    """Exact signed distance to the plane {z = level}."""
    p = np.asarray(p, dtype=float)
    return p[..., 2] - level


def _half_plane_dist(da, b1, b2):
    """Hyperbolic half-plane distance from squared horizontal offset da and heights."""
    s = (da + (b1 - b2) ** 2) / (2.0 * b1 * b2)
    return np.log1p(s + np.sqrt(s * (s + 2.0)))


def sheet_lower_bound(p, q):
    """Lower bound on the distance between p and q via the two sheet projections.

    Exact when p and q differ only in z; symmetric; 1-Lipschitz in each
    argument with respect to the true distance.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    ezp, ezq = np.exp(p[..., 2]), np.exp(q[..., 2])
    emzp, emzq = np.exp(-p[..., 2]), np.exp(-q[..., 2])
    dx = _half_plane_dist((p[..., 0] - q[..., 0]) ** 2, ezp, ezq)
    dy = _half_plane_dist((p[..., 1] - q[..., 1]) ** 2, emzp, emzq)
    return np.maximum(dx, dy)


def fake_sdf_ball(p, center, radius: float):
    """Lower bound on signed distance to the metric ball (center, radius)."""
    return sheet_lower_bound(p, center) - radius


def fake_sdf_tube(p, tube: Tube):
    """Lower bound on distance to the tube's sampled spine, minus its radius."""
    p = np.asarray(p, dtype=float)
    samples = np.asarray(tube.samples, dtype=float)
    d = sheet_lower_bound(p[..., None, :], samples)
    return np.min(d, axis=-1) - tube.radius


def plane_hole_test(p, plane: HorizontalPlane):
    """True iff p (assumed at the plane) falls inside a hole of the tiling."""
    if plane.hole_spacing is None:
        return np.zeros(np.shape(np.asarray(p)[..., 0]), dtype=bool) if np.ndim(p) > 1 else False
    p = np.asarray(p, dtype=float)
    s = plane.hole_spacing
    hx = np.mod(p[..., 0], s) - 0.5 * s
    hy = np.mod(p[..., 1], s) - 0.5 * s
    inside = hx * hx + hy * hy < plane.hole_radius**2
    return bool(inside) if inside.ndim == 0 else inside


# ---------------------------------------------------------------------------
# Compiled scenes: flat arrays shared by the reference marcher and the
# compiled render kernel, with quotient translates precomputed.
# ---------------------------------------------------------------------------


def _translate_points(points, offsets):
    """Apply lattice elements g1^i g2^j g3^k to points; returns (T, n, 3)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty((len(offsets), points.shape[0], 3))
    phi = lattice.PHI
    for t, (i, j, k) in enumerate(offsets):
        s = phi ** (2 * k)
        out[t, :, 0] = points[:, 0] * s + (i * phi + j)
        out[t, :, 1] = points[:, 1] / s + (-i + j * phi)
        out[t, :, 2] = points[:, 2] + k * lattice.Z_PERIOD
    return out


@dataclass
class CompiledScene:
    quotient: bool
    background: np.ndarray
    fog: float
    n_objects: int
    obj_kind: np.ndarray  # 0 plane, 1 ball, 2 tube
    obj_local: np.ndarray
    obj_color: np.ndarray
    obj_back_color: np.ndarray
    # planes
    plane_level: np.ndarray
    plane_spacing: np.ndarray  # 0 = solid
    plane_hole_r: np.ndarray
    plane_two_sided: np.ndarray
    plane_ids: np.ndarray
    # balls: translate axis T first so the identity translate is row 0
    ball_centers: np.ndarray  # (B, T, 3)
    ball_ez: np.ndarray
    ball_emz: np.ndarray
    ball_radius: np.ndarray
    ball_ids: np.ndarray
    # tubes, padded to a common sample count
    tube_samples: np.ndarray  # (U, T, S, 3)
    tube_ez: np.ndarray
    tube_emz: np.ndarray
    tube_radius: np.ndarray
    tube_bb_center: np.ndarray  # (U, T, 3)
    tube_bb_ez: np.ndarray
    tube_bb_emz: np.ndarray
    tube_bb_extra: np.ndarray  # (U,) spine spread around the mid sample
    tube_ids: np.ndarray

    def kernel_args(self):
        return (
            np.uint8(self.quotient),
            self.fog,
            self.background,
            self.obj_kind,
            self.obj_local,
            self.obj_color,
            self.obj_back_color,
            self.plane_level,
            self.plane_spacing,
            self.plane_hole_r,
            self.plane_two_sided,
            self.plane_ids,
            self.ball_centers,
            self.ball_ez,
            self.ball_emz,
            self.ball_radius,
            self.ball_ids,
            self.tube_samples,
            self.tube_ez,
            self.tube_emz,
            self.tube_radius,
            self.tube_bb_center,
            self.tube_bb_ez,
            self.tube_bb_emz,
            self.tube_bb_extra,
            self.tube_ids,
        )


def compile_scene(scene: Scene) -> CompiledScene:
    offsets = _NEIGHBOR_OFFSETS if scene.quotient else [(0, 0, 0)]
    planes = [(i, o) for i, o in enumerate(scene.objects) if isinstance(o, HorizontalPlane)]
    balls = [(i, o) for i, o in enumerate(scene.objects) if isinstance(o, Ball)]
    tubes = [(i, o) for i, o in enumerate(scene.objects) if isinstance(o, Tube)]
    if len(planes) + len(balls) + len(tubes) != len(scene.objects):
        raise SceneError("unknown object type in scene")

    n = len(scene.objects)
    obj_kind = np.zeros(n, dtype=np.int8)
    obj_local = np.zeros(n, dtype=np.int32)
    obj_color = np.zeros((n, 3))
    obj_back = np.zeros((n, 3))
    for lists, kind in ((planes, 0), (balls, 1), (tubes, 2)):
        for local, (gid, obj) in enumerate(lists):
            obj_kind[gid] = kind
            obj_local[gid] = local
            obj_color[gid] = obj.color
            obj_back[gid] = obj.back_color if kind == 0 else obj.color

    plane_level = np.array([o.level for _, o in planes], dtype=float)
    if scene.quotient:
        plane_level = plane_level - np.floor(plane_level / lattice.Z_PERIOD) * lattice.Z_PERIOD
    plane_spacing = np.array(
        [0.0 if o.hole_spacing is None else o.hole_spacing for _, o in planes], dtype=float
    )
    plane_hole_r = np.array([o.hole_radius for _, o in planes], dtype=float)
    plane_two_sided = np.array([1 if o.two_sided else 0 for _, o in planes], dtype=np.uint8)
    plane_ids = np.array([gid for gid, _ in planes], dtype=np.int32)

    T = len(offsets)
    B = len(balls)
    ball_centers = np.zeros((B, T, 3))
    ball_radius = np.zeros(B)
    for b, (gid, obj) in enumerate(balls):
        ball_centers[b] = _translate_points(obj.center, offsets)[:, 0, :]
        ball_radius[b] = obj.radius
    ball_ez = np.exp(ball_centers[..., 2])
    ball_emz = np.exp(-ball_centers[..., 2])
    ball_ids = np.array([gid for gid, _ in balls], dtype=np.int32)

    U = len(tubes)
    S = max((len(o.samples) for _, o in tubes), default=0)
    tube_samples = np.zeros((U, T, S, 3))
    tube_radius = np.zeros(U)
    tube_bb_center = np.zeros((U, T, 3))
    tube_bb_extra = np.zeros(U)
    for u, (gid, obj) in enumerate(tubes):
        pts = np.asarray(obj.samples, dtype=float)
        pts = np.vstack([pts, np.repeat(pts[-1:], S - len(pts), axis=0)])  # pad: min unaffected
        tube_samples[u] = _translate_points(pts, offsets)
        tube_radius[u] = obj.radius
        mid = pts[len(obj.samples) // 2]
        tube_bb_center[u] = _translate_points(mid, offsets)[:, 0, :]
        tube_bb_extra[u] = float(np.max(sheet_lower_bound(mid, pts)))
    tube_ez = np.exp(tube_samples[..., 2])
    tube_emz = np.exp(-tube_samples[..., 2])
    tube_bb_ez = np.exp(tube_bb_center[..., 2])
    tube_bb_emz = np.exp(-tube_bb_center[..., 2])
    tube_ids = np.array([gid for gid, _ in tubes], dtype=np.int32)

    return CompiledScene(
        quotient=scene.quotient,
        background=np.asarray(scene.background, dtype=float),
        fog=float(scene.fog),
        n_objects=n,
        obj_kind=obj_kind,
        obj_local=obj_local,
        obj_color=obj_color,
        obj_back_color=obj_back,
        plane_level=plane_level,
        plane_spacing=plane_spacing,
        plane_hole_r=plane_hole_r,
        plane_two_sided=plane_two_sided,
        plane_ids=plane_ids,
        ball_centers=ball_centers,
        ball_ez=ball_ez,
        ball_emz=ball_emz,
        ball_radius=ball_radius,
        ball_ids=ball_ids,
        tube_samples=tube_samples,
        tube_ez=tube_ez,
        tube_emz=tube_emz,
        tube_radius=tube_radius,
        tube_bb_center=tube_bb_center,
        tube_bb_ez=tube_bb_ez,
        tube_bb_emz=tube_bb_emz,
        tube_bb_extra=tube_bb_extra,
        tube_ids=tube_ids,
    )


def _plane_distance(comp: CompiledScene, local: int, x, y, z):
    level = comp.plane_level[local]
    if comp.quotient:
        d = abs(z - level)
        d = min(d, abs(z - level - lattice.Z_PERIOD), abs(z - level + lattice.Z_PERIOD))
        return d
    d = z - level
    return abs(d) if comp.plane_two_sided[local] else d


def _ball_distance(comp: CompiledScene, local: int, p):
    d = sheet_lower_bound(p, comp.ball_centers[local])
    return float(np.min(d)) - comp.ball_radius[local]


def _tube_distance(comp: CompiledScene, local: int, p):
    d = sheet_lower_bound(p[None, None, :], comp.tube_samples[local])
    return float(np.min(d)) - comp.tube_radius[local]


def _object_distance(comp: CompiledScene, object_id: int, p):
    kind = comp.obj_kind[object_id]
    local = int(comp.obj_local[object_id])
    if kind == 0:
        return _plane_distance(comp, local, p[0], p[1], p[2])
    if kind == 1:
        return _ball_distance(comp, local, p)
    return _tube_distance(comp, local, p)


def scene_distance(p, scene) -> DistanceEstimate:
    """Min over object estimators; returns the value and the argmin object id.

    In quotient mode p is expected pre-reduced (the marcher teleports before
    each evaluation) and estimators range over the neighbor translate block.
    """
    comp = scene if isinstance(scene, CompiledScene) else compile_scene(scene)
    p = np.asarray(p, dtype=float)
    best = np.inf
    best_id = -1
    # planes, then balls, then tubes: the same evaluation (and tie-break)
    # order as the compiled kernel
    for object_id in (*comp.plane_ids, *comp.ball_ids, *comp.tube_ids):
        d = _object_distance(comp, int(object_id), p)
        if d < best:
            best = d
            best_id = int(object_id)
    return DistanceEstimate(float(best), best_id)


def surface_normal(p, scene, object_id: int | None = None):
    """Outward metric-unit normal of the nearest (or given) object at p.

    Planes get the exact +-z axis by side; curved objects get central finite
    differences of their estimator along the pushed orthonormal frame at p,
    normalized in the metric.
    """
    comp = scene if isinstance(scene, CompiledScene) else compile_scene(scene)
    p = np.asarray(p, dtype=float)
    if object_id is None:
        object_id = scene_distance(p, comp).object_id
    kind = comp.obj_kind[object_id]
    if kind == 0:
        local = int(comp.obj_local[object_id])
        level = comp.plane_level[local]
        side = p[2] - level
        if comp.quotient:
            # nearest wrapped copy decides the side
            k = round((p[2] - level) / lattice.Z_PERIOD)
            side = p[2] - level - k * lattice.Z_PERIOD
        return np.array([0.0, 0.0, 1.0 if side >= 0.0 else -1.0])
    grads = np.empty(3)
    axes = np.empty((3, 3))
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        axes[i] = push_tangent(p, e)
        f_plus = _object_distance(comp, object_id, p + FD_STEP * axes[i])
        f_minus = _object_distance(comp, object_id, p - FD_STEP * axes[i])
        grads[i] = (f_plus - f_minus) / (2.0 * FD_STEP)
    norm = float(np.sqrt(np.sum(grads * grads)))
    if norm < 1e-12:
        raise DegenerateNormalError(int(object_id))
    return (grads / norm) @ axes


# ---------------------------------------------------------------------------
# JSON scene files
# ---------------------------------------------------------------------------

_TOP_FIELDS = {"objects", "lights", "background", "fog", "quotient", "camera"}
_PLANE_FIELDS = {"kind", "level", "hole_spacing", "hole_radius", "color", "back_color", "two_sided"}
_BALL_FIELDS = {"kind", "center", "radius", "color"}
_TUBE_FIELDS = {"kind", "endpoints", "generator", "radius", "n_samples", "color"}
_LIGHT_FIELDS = {"direction", "position", "intensity"}
_CAMERA_FIELDS = {"position", "frame", "fov", "resolution"}


def _reject_unknown(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise SceneError(f"unknown field(s) in {where}: {sorted(unknown)}")


def _rgb(v, where: str):
    arr = tuple(float(c) for c in v)
    if len(arr) != 3:
        raise SceneError(f"{where} must be an RGB triple")
    return arr


def _parse_object(d: dict, index: int):
    where = f"objects[{index}]"
    if not isinstance(d, dict) or "kind" not in d:
        raise SceneError(f"{where} must be an object with a 'kind'")
    kind = d["kind"]
    if kind == "plane":
        _reject_unknown(d, _PLANE_FIELDS, where)
        spacing = d.get("hole_spacing", None)
        return HorizontalPlane(
            level=float(d.get("level", 0.0)),
            hole_spacing=None if spacing is None else float(spacing),
            hole_radius=float(d.get("hole_radius", 0.35)),
            color=_rgb(d.get("color", (0.85, 0.40, 0.25)), where),
            back_color=_rgb(d.get("back_color", (0.80, 0.80, 0.80)), where),
            two_sided=bool(d.get("two_sided", True)),
        )
    if kind == "ball":
        _reject_unknown(d, _BALL_FIELDS, where)
        center = tuple(float(c) for c in d.get("center", (0.0, 0.0, 0.0)))
        if len(center) != 3:
            raise SceneError(f"{where}: center must be a coordinate triple")
        return Ball(
            center=center,
            radius=float(d.get("radius", 0.3)),
            color=_rgb(d.get("color", (0.90, 0.85, 0.30)), where),
        )
    if kind == "tube":
        _reject_unknown(d, _TUBE_FIELDS, where)
        radius = float(d.get("radius", 0.09))
        n_samples = int(d.get("n_samples", 24))
        color = _rgb(d.get("color", (0.35, 0.65, 0.90)), where)
        if ("endpoints" in d) == ("generator" in d):
            raise SceneError(f"{where}: give exactly one of 'endpoints' or 'generator'")
        if "generator" in d:
            return Tube.along_generator(int(d["generator"]), radius, n_samples, color)
        ends = d["endpoints"]
        if len(ends) != 2:
            raise SceneError(f"{where}: endpoints must be two coordinate triples")
        return Tube.between(ends[0], ends[1], radius, n_samples, color)
    raise SceneError(f"{where}: unknown kind {kind!r}")


def _parse_light(d: dict, index: int):
    where = f"lights[{index}]"
    _reject_unknown(d, _LIGHT_FIELDS, where)
    direction = d.get("direction")
    position = d.get("position")
    return Light(
        direction=None if direction is None else tuple(float(c) for c in direction),
        position=None if position is None else tuple(float(c) for c in position),
        intensity=float(d.get("intensity", 1.0)),
    )


def parse_scene(doc: dict):
    """Build (Scene, camera dict or None) from a parsed scene document."""
    if not isinstance(doc, dict):
        raise SceneError("scene document must be a JSON object")
    _reject_unknown(doc, _TOP_FIELDS, "scene")
    objects = tuple(_parse_object(o, i) for i, o in enumerate(doc.get("objects", [])))
    lights = tuple(_parse_light(light, i) for i, light in enumerate(doc.get("lights", [])))
    scene = Scene(
        objects=objects,
        lights=lights,
        background=_rgb(doc.get("background", (0.0, 0.0, 0.0)), "background"),
        fog=float(doc.get("fog", 0.0)),
        quotient=bool(doc.get("quotient", False)),
    )
    camera = doc.get("camera")
    if camera is not None:
        _reject_unknown(camera, _CAMERA_FIELDS, "camera")
    return scene, camera


def load_scene(path):
    """Parse a scene JSON file; see parse_scene."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SceneError(f"invalid JSON in {path}: {exc}") from exc
    return parse_scene(doc)
