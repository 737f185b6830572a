"""The golden-ratio lattice, its fundamental domain, and domain reduction.

The lattice is generated by two commuting horizontal translations and one
vertical element,

    g1 = (phi, -1, 0),   g2 = (1, phi, 0),   g3 = (0, 0, 2 ln phi),

with phi the golden ratio.  The planar generators are Euclidean-orthogonal
with equal length sqrt(phi^2 + 1), so the planar fundamental cell is the
half-open centered square in the (g1, g2) basis and reduction is a single
coordinate rounding (a short correction loop guards float edge cases).
Conjugation by g3 acts on the planar lattice by the integer matrix
[[2, 1], [1, 1]]; `conjugation_action` recomputes this from the group law as
an internal consistency check.

The fundamental domain is D0 x [0, 2 ln phi) with D0 the centered planar
cell.  `teleport` reduces any point into the domain and returns the lattice
word that undoes the reduction: with word (n1, n2, n3),

    apply_word(w, p') = g1^n1 * g2^n2 * g3^n3 * p'

recovers the original point (vertical part innermost; the planar rounding is
computed at the reduced z-level and conjugated out through powers of the
integer matrix, so exponents are exact Python ints).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import inverse, mul

PHI = (1.0 + np.sqrt(5.0)) / 2.0
Z_PERIOD = 2.0 * np.log(PHI)
# Planar basis u1 = (phi, -1), u2 = (1, phi); |u1|^2 = |u2|^2 = phi + 2.
CELL_NORM2 = PHI + 2.0

GAMMA1 = np.array([PHI, -1.0, 0.0])
GAMMA2 = np.array([1.0, PHI, 0.0])
GAMMA3 = np.array([0.0, 0.0, Z_PERIOD])

CONJUGATION_MATRIX = np.array([[2, 1], [1, 1]], dtype=np.int64)

MAX_Z_REDUCTION = 64  # clamp on |n3|, bounds phi^{2 n3} growth


@dataclass(frozen=True)
class LatticeGenerators:
    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray
    phi: float


GOLDEN_LATTICE = LatticeGenerators(GAMMA1, GAMMA2, GAMMA3, PHI)


@dataclass(frozen=True)
class GammaWord:
    """Exponents (n1, n2, n3) of a lattice element g1^n1 g2^n2 g3^n3."""

    n1: int = 0
    n2: int = 0
    n3: int = 0

    @property
    def is_identity(self) -> bool:
        return self.n1 == 0 and self.n2 == 0 and self.n3 == 0


class LatticeConsistencyError(RuntimeError):
    """Internal check failed: a lattice computation left the integer grid."""


def planar_coords(p):
    """Coordinates (a, b) of the (x, y) part of p in the basis {u1, u2}."""
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0], p[..., 1]
    return (PHI * x - y) / CELL_NORM2, (x + PHI * y) / CELL_NORM2


def in_fundamental_domain(p) -> bool | np.ndarray:
    """True iff z is in [0, 2 ln phi) and the planar cell coords are in [-1/2, 1/2)."""
    p = np.asarray(p, dtype=float)
    a, b = planar_coords(p)
    z = p[..., 2]
    ok = (z >= 0.0) & (z < Z_PERIOD) & (a >= -0.5) & (a < 0.5) & (b >= -0.5) & (b < 0.5)
    return bool(ok) if ok.ndim == 0 else ok


def _mat_pow_2x2(m, k: int):
    """Exact integer power of a 2x2 unimodular matrix (Python ints)."""
    a, b, c, d = int(m[0][0]), int(m[0][1]), int(m[1][0]), int(m[1][1])
    if k < 0:
        # inverse of [[a,b],[c,d]] with det 1
        a, b, c, d = d, -b, -c, a
        k = -k
    ra, rb, rc, rd = 1, 0, 0, 1
    while k:
        if k & 1:
            ra, rb, rc, rd = ra * a + rb * c, ra * b + rb * d, rc * a + rd * c, rc * b + rd * d
        a, b, c, d = a * a + b * c, a * b + b * d, c * a + d * c, c * b + d * d
        k >>= 1
    return ra, rb, rc, rd


def teleport(p) -> tuple[np.ndarray, GammaWord]:
    """Reduce p into the fundamental domain; the word undoes the reduction.

    Vertical reduction first (a power of g3), then planar reduction by
    rounding the cell coordinates.  Raises ValueError outside the supported
    range (|z| < 50, finite coordinates).
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError("teleport expects a single point of shape (3,)")
    if not np.all(np.isfinite(p)) or abs(p[2]) >= 50.0:
        raise ValueError(f"teleport requires finite coordinates with |z| < 50, got {p}")

    n3 = int(np.floor(p[2] / Z_PERIOD))
    n3 = max(-MAX_Z_REDUCTION, min(MAX_Z_REDUCTION, n3))
    if n3 != 0:
        scale = PHI ** (-2 * n3)
        x, y, z = p[0] * scale, p[1] / scale, p[2] - n3 * Z_PERIOD
        # float guard: keep z inside the half-open interval
        while z < 0.0:
            n3 -= 1
            x, y, z = x * PHI * PHI, y / (PHI * PHI), z + Z_PERIOD
        while z >= Z_PERIOD:
            n3 += 1
            x, y, z = x / (PHI * PHI), y * PHI * PHI, z - Z_PERIOD
    else:
        x, y, z = p[0], p[1], p[2]

    m1 = m2 = 0
    for _ in range(4):
        a = (PHI * x - y) / CELL_NORM2
        b = (x + PHI * y) / CELL_NORM2
        k1 = int(np.floor(a + 0.5))
        k2 = int(np.floor(b + 0.5))
        if k1 == 0 and k2 == 0:
            break
        x -= k1 * PHI + k2
        y -= -k1 + k2 * PHI
        m1 += k1
        m2 += k2

    ra, rb, rc, rd = _mat_pow_2x2(CONJUGATION_MATRIX, n3)
    word = GammaWord(ra * m1 + rb * m2, rc * m1 + rd * m2, n3)
    return np.array([x, y, z]), word


def apply_word(word: GammaWord, p) -> np.ndarray:
    """Left-multiply p by g1^n1 g2^n2 g3^n3 (vertical part applied first)."""
    p = np.asarray(p, dtype=float)
    n3 = word.n3
    if n3 != 0:
        scale = PHI ** (2 * n3)
        q = np.stack(
            [p[..., 0] * scale, p[..., 1] / scale, p[..., 2] + n3 * Z_PERIOD], axis=-1
        )
    else:
        q = p.copy() if isinstance(p, np.ndarray) else p
    tx = word.n1 * PHI + word.n2
    ty = -word.n1 + word.n2 * PHI
    return np.stack([q[..., 0] + tx, q[..., 1] + ty, q[..., 2]], axis=-1)


def teleport_state(pos, vel) -> tuple[np.ndarray, np.ndarray, GammaWord]:
    """Teleport a position and carry the velocity through the same lattice element.

    The translating element's differential only depends on its z-part, so the
    velocity transform is diag(phi^{-2 n3}, phi^{2 n3}, 1).
    """
    pos2, word = teleport(pos)
    if word.n3 != 0:
        s = PHI ** (-2 * word.n3)
        vel = np.array([vel[0] * s, vel[1] / s, vel[2]])
    return pos2, np.asarray(vel, dtype=float), word


def conjugation_action() -> np.ndarray:
    """Integer matrix of conjugation by g3 on the planar lattice, from the group law.

    Computes g3 gi g3^{-1} with `mul` and reads off coefficients in the
    {g1, g2} basis; the result must be [[2, 1], [1, 1]] exactly.
    """
    cols = []
    for g in (GAMMA1, GAMMA2):
        c = mul(mul(GAMMA3, g), inverse(GAMMA3))
        a, b = planar_coords(c)
        if abs(c[2]) > 1e-12 or abs(a - round(a)) > 1e-9 or abs(b - round(b)) > 1e-9:
            raise LatticeConsistencyError(
                f"conjugate of {g} is not a planar lattice element: {c}"
            )
        cols.append((int(round(a)), int(round(b))))
    m = np.array([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]], dtype=np.int64)
    return m
