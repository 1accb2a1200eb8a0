"""Canonical maps: Jacobians, actions, composition, inversion, flows."""

import numpy as np
import pytest

from fiokit.matrixcore import is_symplectic, symplectic_form
from fiokit.symplectic import (
    ComposedMap,
    FlowMap,
    IdentityMap,
    LinearMap,
    PhasePoint,
    class_b_report,
    compose,
    free_particle,
    hamiltonian_flow,
    harmonic_oscillator,
    invert,
    map_eval,
    pendulum_like,
)

RNG = np.random.default_rng(0x5EED)
PTS = RNG.uniform(-2.0, 2.0, size=(8, 2))


def test_identity_map():
    m = IdentityMap(1)
    img, F, S = m.evaluate(np.array([0.3, -0.7]))
    assert np.allclose(img, [0.3, -0.7])
    assert np.allclose(F, np.eye(2))
    assert S == 0.0


def test_free_flight_exact():
    m = hamiltonian_flow(free_particle(1), 0.5, d=1)
    img, F, S = m.evaluate(np.array([1.0, 0.7]))
    # q + t p, p unchanged; action = t p^2 / 2
    assert np.allclose(img, [1.0 + 0.5 * 0.7, 0.7], atol=1e-12)
    assert np.allclose(F, [[1.0, 0.5], [0.0, 1.0]], atol=1e-12)
    assert S == pytest.approx(0.5 * 0.7**2 / 2.0, abs=1e-12)


def test_harmonic_quarter_period_rotation():
    m = hamiltonian_flow(harmonic_oscillator(1, 1.0), np.pi / 2.0, d=1)
    img, F, _ = m.evaluate(np.array([1.0, 0.0]))
    assert np.allclose(img, [0.0, -1.0], atol=1e-10)
    assert np.allclose(F, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-10)


def test_linear_map_requires_symplectic():
    with pytest.raises(Exception):
        LinearMap(np.array([[2.0, 0.0], [0.0, 1.0]]))


def test_jacobians_symplectic_all_kinds():
    maps = [
        IdentityMap(1),
        LinearMap(np.array([[1.0, 0.4], [0.3, 1.12]])),
        hamiltonian_flow(free_particle(1), 0.8, d=1),
        hamiltonian_flow(harmonic_oscillator(1, 1.4), 0.6, d=1),
        hamiltonian_flow(pendulum_like(1, 0.9), 0.5, d=1),
    ]
    for m in maps:
        for z in PTS:
            _, F, _ = m.evaluate(z)
            ok, resid = is_symplectic(F, tol=1e-9)
            assert ok, (m, resid)


def _action_gradient_fd(m, z, h=1e-5):
    g = np.zeros(z.size)
    for j in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[j] += h
        zm[j] -= h
        g[j] = (m.evaluate(zp)[2] - m.evaluate(zm)[2]) / (2 * h)
    return g


def test_action_gradient_identity():
    d = 1
    maps = [
        IdentityMap(1),
        LinearMap(np.array([[1.0, 0.4], [0.3, 1.12]])),
        hamiltonian_flow(free_particle(1), 0.8, d=1),
        hamiltonian_flow(harmonic_oscillator(1, 1.4), 0.6, d=1),
    ]
    for m in maps:
        for z in PTS:
            img, F, _ = m.evaluate(z)
            expected = F[:d, :].T @ img[d:]
            expected[:d] -= z[d:]
            assert np.max(np.abs(_action_gradient_fd(m, z) - expected)) < 1e-6


def test_action_cocycle_constant():
    k1 = hamiltonian_flow(harmonic_oscillator(1, 1.3), 0.9, d=1)
    k2 = hamiltonian_flow(free_particle(1), 0.7, d=1)
    comp = compose(k2, k1)
    vals = []
    for z in PTS:
        img1, _, S1 = k1.evaluate(z)
        _, _, S2 = k2.evaluate(img1)
        _, _, Sc = comp.evaluate(z)
        vals.append(Sc - S1 - S2)
    assert np.max(vals) - np.min(vals) < 1e-9


def test_inverse_roundtrip_and_action():
    for m in (LinearMap(np.array([[1.0, 0.4], [0.3, 1.12]])),
              hamiltonian_flow(harmonic_oscillator(1, 1.1), 0.5, d=1)):
        mi = invert(m)
        for z in PTS:
            img, F, S = m.evaluate(z)
            back, Fi, Si = mi.evaluate(img)
            assert np.allclose(back, z, atol=1e-9)
            # inverse Jacobian: -J F^T J evaluated at the image point
            J = symplectic_form(1)
            assert np.allclose(Fi, -J @ F.T @ J, atol=1e-8)
            assert Si == pytest.approx(-S, abs=1e-9)


def test_composed_jacobian_chain_rule():
    k1 = LinearMap(np.array([[1.0, 0.4], [0.3, 1.12]]))
    k2 = hamiltonian_flow(harmonic_oscillator(1, 0.9), 0.4, d=1)
    comp = ComposedMap(k2, k1)
    z = np.array([0.2, -0.5])
    img1, F1, _ = k1.evaluate(z)
    _, F2, _ = k2.evaluate(img1)
    _, Fc, _ = comp.evaluate(z)
    assert np.allclose(Fc, F2 @ F1, atol=1e-12)


def test_flow_step_convergence():
    # fourth-order composition: quartering the step shrinks the flow error
    h = harmonic_oscillator(1, 1.0)
    z = np.array([0.8, -0.3])
    ref = hamiltonian_flow(h, 1.0, step=1e-5, d=1).evaluate(z)[0]
    e1 = np.max(np.abs(hamiltonian_flow(h, 1.0, step=0.04, d=1).evaluate(z)[0] - ref))
    e2 = np.max(np.abs(hamiltonian_flow(h, 1.0, step=0.01, d=1).evaluate(z)[0] - ref))
    assert e2 < e1 / 100.0


def test_pendulum_flow_energy_conserved():
    h = pendulum_like(1, 0.7)
    m = hamiltonian_flow(h, 2.0, step=1e-3, d=1)
    z = np.array([0.4, 0.9])
    img = m.evaluate(z)[0]
    assert h.value(img[:1], img[1:]) == pytest.approx(h.value(z[:1], z[1:]), abs=1e-9)


def test_phase_point_and_map_eval():
    pt = PhasePoint(q=np.array([0.5]), p=np.array([-0.2]))
    assert np.allclose(pt.z, [0.5, -0.2])
    img, F, S = map_eval(IdentityMap(1), pt)
    assert np.allclose(img.z, pt.z)


def test_class_b_report_linear():
    m = LinearMap(np.array([[1.0, 0.4], [0.3, 1.12]]))
    rep = class_b_report(m, region=([-2.0, -2.0], [2.0, 2.0]), samples=200, seed=7)
    assert rep.bilipschitz_violations == 0
    assert rep.c_lower > 0
    assert rep.C_upper >= rep.c_lower
