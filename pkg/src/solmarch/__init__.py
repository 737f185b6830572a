"""Sol geometry engine: group arithmetic, geodesic flow, lattice quotients,
and an intrinsic ray-marching renderer with a CLI and embedding interface."""

from .core import (
    ORIGIN,
    apply_d8,
    inverse,
    metric_inner,
    metric_norm,
    mul,
    pull_tangent,
    push_tangent,
)
from .geodesic import (
    FlowBlowupError,
    Observer,
    TangentState,
    first_integrals,
    flow,
    flow_path,
    flow_with_transport,
    geodesic_rhs,
    geodesic_sphere,
    observer_step,
    rotate_observer,
    transport_rhs,
)
from .lattice import (
    GOLDEN_LATTICE,
    GammaWord,
    apply_word,
    conjugation_action,
    in_fundamental_domain,
    teleport,
)
from .marcher import Camera, HitRecord, MarchParams, generate_ray, march, render, shade
from .scene import (
    Ball,
    HorizontalPlane,
    Scene,
    SceneError,
    Tube,
    fake_sdf_ball,
    fake_sdf_tube,
    load_scene,
    plane_hole_test,
    scene_distance,
    sdf_plane,
    sheet_lower_bound,
    surface_normal,
)

__version__ = "0.1.0"
