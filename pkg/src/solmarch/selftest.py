"""Built-in numerical health checks behind the `selftest` CLI command.

Each check exercises an exact mathematical identity (conserved momenta,
SO(3) preservation, lattice round trips, the conjugation matrix), so any
sign or formula regression in the integrator or lattice code trips it.  The
`mutate` flag deliberately flips a sign in the vertical geodesic equation to
demonstrate that the conservation check actually bites.
"""

from __future__ import annotations

import numpy as np

from . import lattice
from .core import metric_inner
from .geodesic import (
    FlowBlowupError,
    TangentState,
    first_integrals,
    flow,
    flow_with_transport,
    geodesic_rhs,
)


def _mutated_rhs(pos, vel):
    dpos, acc = geodesic_rhs(pos, vel)
    acc = np.array(acc)
    acc[..., 2] = -acc[..., 2]
    return dpos, acc


def _conservation_check(mutate: bool) -> tuple[bool, str]:
    rng = np.random.default_rng(20260808)
    n = 8
    pos = rng.uniform(-1.0, 1.0, size=(n, 3))
    vel = rng.normal(size=(n, 3))
    vel /= np.sqrt(metric_inner(pos, vel, vel))[:, None]
    state = TangentState(pos, vel)
    before = first_integrals(state)
    rhs = _mutated_rhs if mutate else geodesic_rhs
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            after = first_integrals(flow(state, 10.0, 1e-3, rhs=rhs))
    except FlowBlowupError as exc:
        return False, f"flow blew up: {exc}"
    drift = max(
        float(np.max(np.abs(after.px - before.px))),
        float(np.max(np.abs(after.py - before.py))),
        float(np.max(np.abs(after.speed2 - before.speed2))),
    )
    return drift < 1e-9, f"max drift {drift:.3e} (limit 1e-9)"


def _transport_check() -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(4):
        pos = rng.uniform(-0.5, 0.5, size=3)
        vel = rng.normal(size=3)
        vel /= np.sqrt(metric_inner(pos, vel, vel))
        _, q = flow_with_transport(TangentState(pos, vel), np.eye(3), 10.0, 1e-3)
        worst = max(worst, float(np.max(np.abs(q.T @ q - np.eye(3)))))
    return worst < 1e-8, f"max |Q^T Q - I| = {worst:.3e} (limit 1e-8)"


def _teleport_check() -> tuple[bool, str]:
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(500):
        p = np.array([rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-3, 3)])
        reduced, word = lattice.teleport(p)
        if not lattice.in_fundamental_domain(reduced):
            return False, f"teleport left {p} outside the fundamental domain"
        worst = max(worst, float(np.max(np.abs(lattice.apply_word(word, reduced) - p))))
    return worst < 1e-9, f"max round-trip error {worst:.3e} (limit 1e-9)"


def _conjugation_check() -> tuple[bool, str]:
    try:
        m = lattice.conjugation_action()
    except lattice.LatticeConsistencyError as exc:
        return False, str(exc)
    ok = np.array_equal(m, np.array([[2, 1], [1, 1]]))
    return ok, f"conjugation matrix {m.tolist()}"


def run_selftest(mutate: bool = False):
    """Run all checks; returns a list of (name, passed, detail)."""
    return [
        ("conservation", *_conservation_check(mutate)),
        ("transport-so3", *_transport_check()),
        ("teleport-roundtrip", *_teleport_check()),
        ("conjugation-action", *_conjugation_check()),
    ]
