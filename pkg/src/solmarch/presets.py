"""Built-in scenes: the views an explorer of this geometry should see first.

Each preset returns (Scene, Camera).  Frames follow the camera convention of
`march.generate_ray`: columns are (right, up, backward).
"""

from __future__ import annotations

import numpy as np

from .geodesic import Observer
from .marcher import Camera
from .scene import Ball, HorizontalPlane, Scene, Tube

# camera frame looking along +x with world +z up
_LOOK_X = np.array(
    [
        [0.0, 0.0, -1.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
    ]
)


def dragon_plane(h: float = 2.0, holes: bool = True, resolution=(256, 256)):
    """Hovering at height h, looking straight down at the tiled floor.

    Raising h rolls the floor up into a tube: more and more downward rays
    u-turn before reaching it, and the miss region renders as background.
    """
    if h <= 0.0:
        raise ValueError("h must be positive")
    plane = HorizontalPlane(
        level=0.0,
        hole_spacing=1.0 if holes else None,
        hole_radius=0.35,
        color=(0.85, 0.40, 0.25),
        back_color=(0.80, 0.80, 0.80),
    )
    scene = Scene(objects=(plane,), fog=0.08)
    cam = Camera(Observer.at((0.0, 0.0, h)), resolution=resolution)
    return scene, cam


def sandwich(resolution=(256, 256)):
    """Between the planes z = -1 and z = 1, looking horizontally along +x.

    The floor rolls into a tube in the lower field of view while the
    ceiling's underside sweeps around; both are perforated so the far sides
    show through.
    """
    floor = HorizontalPlane(level=-1.0, color=(0.85, 0.40, 0.25), back_color=(0.85, 0.85, 0.85))
    ceiling = HorizontalPlane(level=1.0, color=(0.30, 0.45, 0.80), back_color=(0.85, 0.85, 0.85))
    scene = Scene(objects=(floor, ceiling), fog=0.08)
    cam = Camera(Observer.at((0.0, 0.0, 0.0), _LOOK_X), resolution=resolution)
    return scene, cam


def lattice_balls(radius: float = 0.25, resolution=(256, 256)):
    """A single ball in the compact quotient: one object, infinitely many images."""
    ball = Ball(center=(0.0, 0.0, 0.0), radius=radius, color=(0.90, 0.85, 0.30))
    scene = Scene(objects=(ball,), fog=0.25, quotient=True)
    cam = Camera(Observer.at((0.0, 0.0, 0.48), _LOOK_X), resolution=resolution)
    return scene, cam


def lattice_pillars(radius: float = 0.09, resolution=(256, 256)):
    """Tubes along the three lattice generators, staking out the fundamental domain."""
    tubes = (
        Tube.along_generator(1, radius=radius, color=(0.85, 0.35, 0.30)),
        Tube.along_generator(2, radius=radius, color=(0.30, 0.70, 0.35)),
        Tube.along_generator(3, radius=radius, color=(0.35, 0.55, 0.90)),
    )
    scene = Scene(objects=tubes, fog=0.22, quotient=True)
    cam = Camera(Observer.at((0.685, 0.024, 0.45), _LOOK_X), resolution=resolution)
    return scene, cam


def sphere_gallery(resolution=(256, 256)):
    """Balls of assorted radii above a solid floor, seen from overhead."""
    floor = HorizontalPlane(level=0.0, hole_spacing=None, color=(0.35, 0.35, 0.40))
    balls = (
        Ball(center=(0.0, 0.0, 0.45), radius=0.40, color=(0.90, 0.80, 0.25)),
        Ball(center=(1.3, 0.0, 0.35), radius=0.30, color=(0.85, 0.35, 0.30)),
        Ball(center=(-1.3, 0.0, 0.35), radius=0.30, color=(0.30, 0.70, 0.40)),
        Ball(center=(0.0, 1.3, 0.30), radius=0.25, color=(0.35, 0.55, 0.90)),
        Ball(center=(0.0, -1.3, 0.30), radius=0.25, color=(0.75, 0.45, 0.85)),
    )
    scene = Scene(objects=(floor,) + balls, fog=0.10)
    cam = Camera(Observer.at((0.0, 0.0, 2.4)), resolution=resolution)
    return scene, cam


PRESETS = {
    "dragon-plane": (dragon_plane, "tiled floor seen from a height h (void grows with h)"),
    "sandwich": (sandwich, "observer between the planes z = -1 and z = 1"),
    "lattice-balls": (lattice_balls, "one ball in the compact quotient, seen many times"),
    "lattice-pillars": (lattice_pillars, "generator tubes staking out the fundamental domain"),
    "sphere-gallery": (sphere_gallery, "assorted balls above a solid floor"),
}


def build_preset(name: str, h: float | None = None, resolution=(256, 256)):
    """Construct a preset scene by name; h applies to dragon-plane only."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    builder = PRESETS[name][0]
    if name == "dragon-plane":
        return builder(h=2.0 if h is None else h, resolution=resolution)
    if h is not None:
        raise ValueError(f"preset {name!r} does not take an h parameter")
    return builder(resolution=resolution)
