import numpy as np
import pytest

from solmarch import core, lattice
from solmarch.geodesic import Observer

PHI = lattice.PHI


def test_generator_geometry():
    # planar generators are orthogonal with equal length, and commute exactly
    u1, u2 = lattice.GAMMA1[:2], lattice.GAMMA2[:2]
    assert u1 @ u2 == 0.0
    assert abs(u1 @ u1 - (PHI + 2.0)) < 1e-15
    assert np.array_equal(
        core.mul(lattice.GAMMA1, lattice.GAMMA2), core.mul(lattice.GAMMA2, lattice.GAMMA1)
    )


def test_planar_generators_act_as_stated_translations():
    rng = np.random.default_rng(0)
    p = rng.normal(size=3)
    g1p = core.mul(lattice.GAMMA1, p)
    assert np.array_equal(g1p, [p[0] + PHI, p[1] - 1.0, p[2]])
    g2p = core.mul(lattice.GAMMA2, p)
    assert np.array_equal(g2p, [p[0] + 1.0, p[1] + PHI, p[2]])


def test_in_fundamental_domain_examples():
    assert lattice.in_fundamental_domain([0.0, 0.0, 0.0])
    assert not lattice.in_fundamental_domain([0.0, 0.0, lattice.Z_PERIOD])
    assert not lattice.in_fundamental_domain([PHI, -1.0, 0.0])


def test_teleport_z_period_point():
    reduced, word = lattice.teleport(np.array([0.0, 0.0, lattice.Z_PERIOD]))
    assert np.max(np.abs(reduced)) < 1e-12
    assert (word.n1, word.n2, word.n3) == (0, 0, 1)


def test_teleport_gamma3_gamma1():
    p = core.mul(lattice.GAMMA3, lattice.GAMMA1)
    # golden-ratio identities: phi^3 = 2 phi + 1, phi^-2 = 2 - phi
    assert abs(p[0] - (2.0 * PHI + 1.0)) < 1e-12
    assert abs(p[1] + (2.0 - PHI)) < 1e-12
    reduced, word = lattice.teleport(p)
    assert np.max(np.abs(reduced)) < 1e-9
    # conjugating the planar part through the z-reduction gives g1^2 g2
    assert (word.n1, word.n2, word.n3) == (2, 1, 1)


def test_teleport_idempotent():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = np.array([rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-3, 3)])
        reduced, _ = lattice.teleport(p)
        again, word = lattice.teleport(reduced)
        assert word.is_identity
        assert np.array_equal(again, reduced)


def test_teleport_round_trip_bulk():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        p = np.array([rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-3, 3)])
        reduced, word = lattice.teleport(p)
        assert lattice.in_fundamental_domain(reduced)
        worst = max(worst, float(np.max(np.abs(lattice.apply_word(word, reduced) - p))))
    assert worst < 1e-9


def test_teleport_rejects_bad_input():
    with pytest.raises(ValueError):
        lattice.teleport(np.array([0.0, 0.0, 51.0]))
    with pytest.raises(ValueError):
        lattice.teleport(np.array([np.nan, 0.0, 0.0]))


def test_teleport_gamma_invariance():
    rng = np.random.default_rng(3)
    gens = [lattice.GAMMA1, lattice.GAMMA2, lattice.GAMMA3]
    for _ in range(50):
        p = np.array([rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1.5, 1.5)])
        base, _ = lattice.teleport(p)
        for g in gens:
            for q in (core.mul(g, p), core.mul(core.inverse(g), p)):
                other, _ = lattice.teleport(q)
                assert np.max(np.abs(other - base)) < 1e-9


def test_apply_word_examples():
    p = np.array([0.3, 0.4, 0.5])
    assert np.array_equal(lattice.apply_word(lattice.GammaWord(), p), p)
    out = lattice.apply_word(lattice.GammaWord(n1=1), np.zeros(3))
    assert np.array_equal(out, lattice.GAMMA1)


def test_conjugation_action_matrix():
    m = lattice.conjugation_action()
    assert m.tolist() == [[2, 1], [1, 1]]


def test_conjugation_golden_identities():
    c1 = core.mul(core.mul(lattice.GAMMA3, lattice.GAMMA1), core.inverse(lattice.GAMMA3))
    expect = 2.0 * lattice.GAMMA1 + lattice.GAMMA2  # planar z=0 elements add
    assert np.max(np.abs(c1 - expect)) < 1e-12
    c2 = core.mul(core.mul(lattice.GAMMA3, lattice.GAMMA2), core.inverse(lattice.GAMMA3))
    expect = lattice.GAMMA1 + lattice.GAMMA2
    assert np.max(np.abs(c2 - expect)) < 1e-12


def test_teleport_state_scales_velocity():
    pos = np.array([0.1, 0.2, lattice.Z_PERIOD + 0.3])
    vel = np.array([0.5, -0.4, 0.7])
    pos2, vel2, word = lattice.teleport_state(pos, vel)
    assert word.n3 == 1
    s = PHI ** (-2)
    assert np.allclose(vel2, [vel[0] * s, vel[1] / s, vel[2]], atol=0)
    # metric speed is preserved by the translation
    assert abs(core.metric_inner(pos2, vel2, vel2) - core.metric_inner(pos, vel, vel)) < 1e-12


def test_observer_frame_unchanged_by_teleport():
    # pulled-back frames are invariant under left translation: re-deriving the
    # frame through the isometry's differential returns the original columns
    rng = np.random.default_rng(4)
    q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    g = np.array([0.7, -0.3, 1.4])
    obs = Observer(g, q)
    reduced, word = lattice.teleport(obs.position)
    gamma_inv = core.inverse(lattice.apply_word(word, np.zeros(3)))
    rederived = np.empty((3, 3))
    for i in range(3):
        world = core.push_tangent(g, q[:, i])
        moved = core.push_tangent(gamma_inv, world)
        rederived[:, i] = core.pull_tangent(reduced, moved)
    assert np.max(np.abs(rederived - q)) < 1e-12
