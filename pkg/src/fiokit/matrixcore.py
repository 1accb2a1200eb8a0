"""Complex symmetric width-matrix algebra.

Principal matrix square roots on the cone of complex symmetric matrices
with positive definite real part, Gaussian normalization constants, the
symplectic Lambda(Theta) factor and the 2d x 2d phase-gradient matrix
W(F; Theta_x, Theta_y), plus symplecticity checks.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "ComplexSymMatrix",
    "symplectic_form",
    "principal_sqrt",
    "gaussian_value",
    "is_symplectic",
    "lambda_of",
    "w_matrix",
    "w_identity_residual",
    "random_instances",
    "gaussian_quadrature_oracle",
    "WidthMatrixError",
]

# relative PD threshold for Re(Theta) eigenvalues
_PD_RTOL = 1e-13


class WidthMatrixError(ValueError):
    """Raised when a width matrix violates its cone constraints."""


class ComplexSymMatrix:
    """A d x d complex symmetric matrix whose real part is positive definite.

    The smallest/largest eigenvalues of the real part are computed at
    construction and cached as ``lam`` and ``gam``. Instances are immutable.
    """

    def __init__(self, entries):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise WidthMatrixError(f"expected a square matrix, got shape {m.shape}")
        if not np.array_equal(m, m.T):
            raise WidthMatrixError("matrix is not exactly symmetric")
        ev = np.linalg.eigvalsh(m.real)
        if ev[0] <= _PD_RTOL * max(ev[-1], 0.0) or ev[0] <= 0.0:
            raise WidthMatrixError(
                f"real part is not positive definite (min eigenvalue {ev[0]:.3e})"
            )
        self._m = m
        self._m.setflags(write=False)
        self.lam = float(ev[0])
        self.gam = float(ev[-1])

    @property
    def m(self) -> np.ndarray:
        return self._m

    @property
    def d(self) -> int:
        return self._m.shape[0]

    def conj(self) -> "ComplexSymMatrix":
        return ComplexSymMatrix(self._m.conj())

    def re_sqrt(self) -> np.ndarray:
        """(Re Theta)^{1/2} via real symmetric eigendecomposition."""
        ev, v = np.linalg.eigh(self._m.real)
        return (v * np.sqrt(ev)) @ v.T

    def re_inv_sqrt(self) -> np.ndarray:
        ev, v = np.linalg.eigh(self._m.real)
        return (v / np.sqrt(ev)) @ v.T

    def __repr__(self):
        return f"ComplexSymMatrix({self._m.tolist()})"


def symplectic_form(d: int) -> np.ndarray:
    """The standard symplectic form J = [[0, I], [-I, 0]] of size 2d."""
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = np.eye(d)
    J[d:, :d] = -np.eye(d)
    return J


def principal_sqrt(M: ComplexSymMatrix) -> ComplexSymMatrix:
    """Unique square root of M with positive definite real part.

    Computed by diagonalizing M and taking principal scalar square roots of
    the eigenvalues (all in the right half-plane); falls back to the Schur
    method if the eigenvector basis is too ill conditioned.
    """
    m = M.m
    w, v = np.linalg.eig(m)
    r = (v * np.sqrt(w)) @ np.linalg.inv(v)
    nrm = np.linalg.norm(m)
    if np.linalg.norm(r @ r - m) > 1e-13 * nrm:
        r = scipy.linalg.sqrtm(m)
    r = 0.5 * (r + r.T)  # symmetrize roundoff
    return ComplexSymMatrix(r)


def gaussian_value(M: ComplexSymMatrix, eps: float = 1.0, d: int | None = None) -> complex:
    """Normalized Gaussian integral (2 pi eps)^{-d/2} int exp(-M x.x / 2 eps) dx.

    The eps prefactor cancels the rescaling of the integral exactly, so the
    value is 1/det(M^{1/2}) independently of eps; the arguments are kept for
    interface symmetry with the quadrature oracle.
    """
    if d is not None and d != M.d:
        raise WidthMatrixError(f"dimension mismatch: d={d} but matrix is {M.d}x{M.d}")
    return 1.0 / complex(np.linalg.det(principal_sqrt(M).m))


def is_symplectic(F: np.ndarray, tol: float = 1e-10) -> tuple[bool, float]:
    """Check F^T J F = J; returns (flag, Frobenius residual)."""
    F = np.asarray(F)
    n = F.shape[-1]
    if F.shape[-2] != n or n % 2 != 0:
        raise ValueError(f"expected a 2d x 2d matrix, got shape {F.shape}")
    J = symplectic_form(n // 2)
    residual = float(np.linalg.norm(F.T @ J @ F - J))
    return residual <= tol, residual


def lambda_of(Theta: ComplexSymMatrix) -> np.ndarray:
    """The real symplectic matrix [[R^{1/2}, 0], [R^{-1/2} Im Theta, R^{-1/2}]]
    with R = Re Theta."""
    d = Theta.d
    rs = Theta.re_sqrt()
    ris = Theta.re_inv_sqrt()
    out = np.zeros((2 * d, 2 * d))
    out[:d, :d] = rs
    out[d:, :d] = ris @ Theta.m.imag
    out[d:, d:] = ris
    return out


def w_matrix(F: np.ndarray, Theta_x: ComplexSymMatrix, Theta_y: ComplexSymMatrix) -> np.ndarray:
    """Phase-gradient block matrix [[C^T - i A^T Tx, -i Ty], [D^T - i B^T Tx, -I]].

    F decomposes into d x d blocks [[A, B], [C, D]]; for symplectic F the
    result is invertible.
    """
    F = np.asarray(F)
    n = F.shape[0]
    if F.shape != (n, n) or n % 2 != 0:
        raise ValueError(f"expected a 2d x 2d matrix, got shape {F.shape}")
    d = n // 2
    A, B = F[:d, :d], F[:d, d:]
    C, D = F[d:, :d], F[d:, d:]
    tx, ty = Theta_x.m, Theta_y.m
    out = np.zeros((n, n), dtype=complex)
    out[:d, :d] = C.T - 1j * A.T @ tx
    out[:d, d:] = -1j * ty
    out[d:, :d] = D.T - 1j * B.T @ tx
    out[d:, d:] = -np.eye(d)
    return out


def w_identity_residual(F: np.ndarray, Theta_x: ComplexSymMatrix, Theta_y: ComplexSymMatrix) -> float:
    """Residual of W (Re Theta_xy)^{-1} W^* against the two-square-sum form.

    The right-hand side is Lam(conj Ty)^T Lam(conj Ty) + (Lam(Tx) F)^T (Lam(Tx) F);
    the identity certifies invertibility of W for symplectic F.
    """
    d = Theta_x.d
    W = w_matrix(F, Theta_x, Theta_y)
    re_xy = np.zeros((2 * d, 2 * d))
    re_xy[:d, :d] = Theta_x.m.real
    re_xy[d:, d:] = Theta_y.m.real
    lhs = W @ np.linalg.inv(re_xy) @ W.conj().T
    ly = lambda_of(Theta_y.conj())
    lxf = lambda_of(Theta_x) @ np.asarray(F)
    rhs = ly.T @ ly + lxf.T @ lxf
    return float(np.linalg.norm(lhs - rhs))

def random_instances(d: int, count: int, seed: int = 0x5EED):
    """Random complex symmetric matrices with positive definite real part.

    Real part A A^T + mu I (well separated from singular), imaginary part a
    random symmetric matrix of comparable scale.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        A = rng.standard_normal((d, d))
        re = A @ A.T + (0.1 + rng.uniform()) * np.eye(d)
        B = rng.standard_normal((d, d))
        im = (B + B.T) / 2.0 * rng.uniform(0.0, 2.0)
        out.append(ComplexSymMatrix(re + 1j * im))
    return out


def gaussian_quadrature_oracle(M: ComplexSymMatrix, eps: float = 1.0) -> complex:
    """(2 pi eps)^{-d/2} integral of exp(-M z.z / 2 eps) by brute midpoint rule.

    Independent of the square-root route; box and spacing chosen from the
    real-part spectrum so truncation and aliasing sit below 1e-12.
    """
    d = M.d
    lam = float(np.min(np.linalg.eigvalsh(M.m.real)))
    gam = float(np.max(np.linalg.eigvalsh(M.m.real)))
    L = 8.6 * np.sqrt(eps / lam)
    h = 0.05 * np.sqrt(eps / gam)
    n = int(np.ceil(2 * L / h))
    axis = -L + (np.arange(n) + 0.5) * (2 * L / n)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    z = np.stack([m.ravel() for m in mesh], axis=-1)
    q = np.einsum("ni,ij,nj->n", z, M.m, z)
    val = np.sum(np.exp(-q / (2.0 * eps))) * (2 * L / n) ** d
    return complex(val / (2.0 * np.pi * eps) ** (d / 2.0))
