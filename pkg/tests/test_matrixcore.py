"""Complex symmetric matrix algebra: square roots, Gaussian values, W matrices."""

import numpy as np
import pytest

from fiokit.matrixcore import (
    ComplexSymMatrix,
    WidthMatrixError,
    gaussian_quadrature_oracle,
    gaussian_value,
    is_symplectic,
    lambda_of,
    principal_sqrt,
    random_instances,
    symplectic_form,
    w_identity_residual,
    w_matrix,
)


def test_constructor_rejects_asymmetric():
    with pytest.raises(Exception):
        ComplexSymMatrix(np.array([[1.0, 0.2], [0.3, 1.0]]))


def test_constructor_rejects_nonpositive_real_part():
    with pytest.raises(Exception):
        ComplexSymMatrix(np.array([[-1.0 + 1j]]))
    with pytest.raises(Exception):
        ComplexSymMatrix(np.array([[0.0 + 1j]]))


def test_cached_spectral_scalars():
    M = ComplexSymMatrix(np.array([[2.0, 0.5], [0.5, 1.0]]) + 0j)
    w = np.linalg.eigvalsh(M.m.real)
    assert M.lam == pytest.approx(w[0])
    assert M.gam == pytest.approx(w[-1])
    assert 0 < M.lam <= M.gam


def test_sqrt_diagonal():
    R = principal_sqrt(ComplexSymMatrix(4.0 * np.eye(2))).m
    assert np.allclose(R, 2.0 * np.eye(2), atol=1e-14)


def test_sqrt_purely_rotated():
    # sqrt of i: e^{i pi/4}
    R = principal_sqrt(ComplexSymMatrix(np.array([[1e-12 + 1j]]))).m
    assert R[0, 0] == pytest.approx(np.exp(1j * np.pi / 4), abs=1e-6)


def test_sqrt_property_random():
    for M in random_instances(3, 50, seed=0x5EED):
        R = principal_sqrt(M).m
        assert np.linalg.norm(R @ R - M.m) <= 1e-12 * np.linalg.norm(M.m)
        assert np.min(np.linalg.eigvalsh(R.real)) > 0


def _contour_sqrt(m, center, radius, nodes=4000):
    """Dunford-Taylor integral (2 pi i)^{-1} oint sqrt(z) (z - M)^{-1} dz
    on a circle in the right half plane enclosing the spectrum."""
    t = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    z = center + radius * np.exp(1j * t)
    dz = 1j * radius * np.exp(1j * t) * (2 * np.pi / nodes)
    acc = np.zeros_like(m)
    for zk, dzk in zip(z, dz):
        acc = acc + np.sqrt(zk) * np.linalg.inv(zk * np.eye(m.shape[0]) - m) * dzk
    return acc / (2j * np.pi)


def test_sqrt_matches_contour_integral():
    # independent oracle for the principal branch
    for m in (np.array([[2.0 + 1.0j]]),
              np.array([[1.5 + 0.5j, 0.2 - 0.1j], [0.2 - 0.1j, 2.5 - 0.8j]])):
        M = ComplexSymMatrix(m)
        w = np.linalg.eigvals(m)
        center = float(np.mean(w.real))
        # contour must stay strictly inside the right half plane, away from
        # the branch cut, while still enclosing the spectrum
        dev = float(np.max(np.abs(w - center)))
        radius = dev + 0.5 * (center - dev)
        assert 0 < radius < center
        oracle = _contour_sqrt(m, center, radius)
        assert np.linalg.norm(principal_sqrt(M).m - oracle) < 1e-10


def test_sqrt_continuity_along_path():
    # the root stays on the principal branch as the matrix moves in the cone
    m0 = np.array([[2.0 + 0.0j]])
    m1 = np.array([[0.5 + 3.0j]])
    prev = principal_sqrt(ComplexSymMatrix(m0)).m
    for t in np.linspace(0, 1, 50)[1:]:
        cur = principal_sqrt(ComplexSymMatrix((1 - t) * m0 + t * m1)).m
        assert np.linalg.norm(cur - prev) < 0.2
        prev = cur


def test_gaussian_value_known():
    assert gaussian_value(ComplexSymMatrix(2.0 * np.eye(1))) == pytest.approx(2**-0.5)
    assert gaussian_value(ComplexSymMatrix(np.eye(3))) == pytest.approx(1.0)


def test_gaussian_value_eps_independent():
    M = ComplexSymMatrix(np.array([[1.3 - 0.4j]]))
    assert gaussian_value(M, eps=1.0) == pytest.approx(gaussian_value(M, eps=0.25))


def test_gaussian_value_vs_quadrature():
    # [DERIVED] midpoint-quadrature oracle, three width matrices
    for m in (2.0 * np.eye(1), np.array([[1.2 + 0.7j]]),
              np.array([[2.0, 0.3], [0.3, 1.5]]) + 0j):
        M = ComplexSymMatrix(m)
        assert abs(gaussian_value(M) - gaussian_quadrature_oracle(M)) < 1e-8


def test_gaussian_value_dimension_mismatch():
    with pytest.raises(WidthMatrixError):
        gaussian_value(ComplexSymMatrix(np.eye(2)), d=3)


def test_symplectic_form_squares_to_minus_identity():
    J = symplectic_form(3)
    assert np.allclose(J @ J, -np.eye(6))


def test_is_symplectic():
    ok, resid = is_symplectic(symplectic_form(2))
    assert ok and resid < 1e-14
    bad = np.eye(4)
    bad[0, 0] = 2.0
    ok, resid = is_symplectic(bad)
    assert not ok and resid > 0.1


def test_lambda_is_symplectic():
    for m in (np.eye(1), np.array([[2.0 + 1.5j]]),
              np.array([[1.0 + 0.3j, 0.1], [0.1, 2.0 - 0.2j]])):
        L = lambda_of(ComplexSymMatrix(m))
        ok, resid = is_symplectic(L)
        assert ok, resid


def test_w_matrix_identity_case():
    W = w_matrix(np.eye(2), ComplexSymMatrix(np.eye(1)), ComplexSymMatrix(np.eye(1)))
    assert np.allclose(W, np.array([[-1j, -1j], [1.0, -1.0]]))
    assert np.linalg.det(W) == pytest.approx(2j)


def _random_symplectic(rng, d):
    # product of shears and the symplectic form: stays exactly symplectic
    F = np.eye(2 * d)
    for _ in range(4):
        S = np.zeros((2 * d, 2 * d))
        a = rng.standard_normal((d, d))
        sym = (a + a.T) / 2
        if rng.uniform() < 0.5:
            S[:d, d:] = sym
        else:
            S[d:, :d] = sym
        F = F @ (np.eye(2 * d) + S)
        if rng.uniform() < 0.3:
            F = F @ symplectic_form(d)
    return F


def test_w_identity_random():
    rng = np.random.default_rng(0x5EED)
    for _ in range(30):
        d = int(rng.integers(1, 3))
        F = _random_symplectic(rng, d)
        Tx = ComplexSymMatrix(np.eye(d) * (0.5 + rng.uniform())
                              + 1j * rng.uniform(-1, 1) * np.eye(d))
        Ty = ComplexSymMatrix(np.eye(d) * (0.5 + rng.uniform())
                              + 1j * rng.uniform(-1, 1) * np.eye(d))
        assert w_identity_residual(F, Tx, Ty) < 1e-10
        W = w_matrix(F, Tx, Ty)
        assert np.isfinite(np.linalg.cond(W))
