"""Matplotlib report figures rendered to files alongside the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_geodesic(path, ts, positions, px, py, speed2) -> None:
    """Two-panel trajectory report: the 3D model path and invariant drift."""
    fig = plt.figure(figsize=(10, 4.2))
    ax = fig.add_subplot(1, 2, 1, projection="3d")
    ax.plot(positions[:, 0], positions[:, 1], positions[:, 2], lw=1.0, color="tab:blue")
    ax.scatter([positions[0, 0]], [positions[0, 1]], [positions[0, 2]], color="k", s=12)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    ax.set_title("model-coordinate path")

    ax2 = fig.add_subplot(1, 2, 2)
    for series, label in ((px, "p_x"), (py, "p_y"), (speed2, "speed^2")):
        ax2.plot(ts, series - series[0], lw=0.9, label=f"{label} drift")
    ax2.set_xlabel("t")
    ax2.set_ylabel("drift from initial value")
    ax2.legend(loc="best", fontsize=8)
    ax2.set_title("conserved quantities")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_sphere(path, points: np.ndarray, radius: float) -> None:
    """Scatter view of a geodesic sphere sample cloud, colored by height."""
    fig = plt.figure(figsize=(5.2, 4.6))
    ax = fig.add_subplot(projection="3d")
    sc = ax.scatter(
        points[:, 0], points[:, 1], points[:, 2], c=points[:, 2], cmap="viridis", s=6
    )
    fig.colorbar(sc, ax=ax, shrink=0.7, label="z")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    ax.set_title(f"geodesic sphere, radius {radius:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
