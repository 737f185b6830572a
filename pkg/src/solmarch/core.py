"""Sol group arithmetic, metric tensor, and the origin stabilizer.

The model space is R^3 with coordinates (x, y, z).  A point doubles as a
group element acting on the space by left translation

    (x1, y1, z1) * (x2, y2, z2) = (e^{z1} x2 + x1, e^{-z1} y2 + y1, z1 + z2)

and the line element is ds^2 = e^{-2z} dx^2 + e^{2z} dy^2 + dz^2, which makes
every left translation an isometry.  Tangent vectors are stored as model
components at an understood base point; the differential of left translation
by p is the constant diagonal map diag(e^{z_p}, e^{-z_p}, 1).

Everything here broadcasts: a point/tangent array has shape (..., 3) and
scalar results have shape (...,).  All functions are pure.
"""

from __future__ import annotations

import numpy as np

ORIGIN = np.zeros(3)


def mul(p, q):
    """Group product p * q (left translation of q by p)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    z1 = p[..., 2]
    return np.stack(
        [
            np.exp(z1) * q[..., 0] + p[..., 0],
            np.exp(-z1) * q[..., 1] + p[..., 1],
            z1 + q[..., 2],
        ],
        axis=-1,
    )


def inverse(p):
    """Group inverse: mul(p, inverse(p)) is the origin."""
    p = np.asarray(p, dtype=float)
    z = p[..., 2]
    return np.stack(
        [-np.exp(-z) * p[..., 0], -np.exp(z) * p[..., 1], -z],
        axis=-1,
    )


def push_tangent(p, v):
    """Differential of left translation by p, applied to a tangent at the origin.

    Overflow for very large |z| is the caller's concern; components are plain
    float64 products.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    z = p[..., 2]
    return np.stack(
        [np.exp(z) * v[..., 0], np.exp(-z) * v[..., 1], v[..., 2]],
        axis=-1,
    )


def pull_tangent(p, v):
    """Inverse of :func:`push_tangent`: carry a tangent at p back to the origin."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    z = p[..., 2]
    return np.stack(
        [np.exp(-z) * v[..., 0], np.exp(z) * v[..., 1], v[..., 2]],
        axis=-1,
    )


def metric_inner(p, v, w):
    """Riemannian inner product of tangents v, w at base point p."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    z = p[..., 2]
    # component products first, so the result is bitwise symmetric in (v, w)
    return (
        np.exp(-2.0 * z) * (v[..., 0] * w[..., 0])
        + np.exp(2.0 * z) * (v[..., 1] * w[..., 1])
        + v[..., 2] * w[..., 2]
    )


def metric_norm(p, v):
    """Metric length of a tangent v at p."""
    return np.sqrt(metric_inner(p, v, v))


def normalize_tangent(p, v):
    """Scale v to unit metric speed at p.  Raises on a zero vector."""
    n = metric_norm(p, v)
    if np.any(n == 0.0):
        raise ValueError("cannot normalize a zero tangent vector")
    return np.asarray(v, dtype=float) / n[..., None]


# ---------------------------------------------------------------------------
# Stabilizer of the origin: the order-8 dihedral group generated by the sign
# flips (x,y,z) -> (+-x, +-y, z) and the swap (x,y,z) -> (y, x, -z).  Each
# element is a signed permutation, so it acts identically on points and on
# tangent components, and preserves metric_inner.
# ---------------------------------------------------------------------------

D8_ORDER = 8

_SWAP = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])


def _d8_matrices():
    mats = np.empty((8, 3, 3))
    for k in range(8):
        sw, sx, sy = k >> 2 & 1, k >> 1 & 1, k & 1
        m = np.diag([-1.0 if sx else 1.0, -1.0 if sy else 1.0, 1.0])
        if sw:
            m = _SWAP @ m
        mats[k] = m
    return mats


D8_MATRICES = _d8_matrices()
D8_MATRICES.setflags(write=False)


def d8_matrix(index: int) -> np.ndarray:
    """The 3x3 signed-permutation matrix of stabilizer element `index` in [0, 8)."""
    if not 0 <= index < 8:
        raise ValueError(f"stabilizer index must be in [0, 8), got {index}")
    return D8_MATRICES[index]


def apply_d8(index: int, p):
    """Apply stabilizer element `index` to a point (or, identically, a tangent)."""
    m = d8_matrix(index)
    p = np.asarray(p, dtype=float)
    return np.einsum("ij,...j->...i", m, p)
