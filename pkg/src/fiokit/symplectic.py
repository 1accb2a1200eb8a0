"""Canonical transformations of phase space with Jacobians and actions.

A map evaluation returns the triple (image, Jacobian, action). The Jacobian
follows the transposed-derivative block layout

    F = [[X_q^T, X_p^T], [Xi_q^T, Xi_p^T]]

so that F acts on column tangent vectors (dq, dp). Actions are fixed so that
the identity map has action 0; composites and inverses inherit the cocycle
relations and are therefore only canonical up to an additive constant.

Hamiltonian flows are integrated on demand: a 4th-order Yoshida composition
of Stormer-Verlet for separable Hamiltonians, implicit midpoint otherwise.
The variational equation is advanced with the exact tangent of each
sub-step, so numerical Jacobians are symplectic to roundoff; the action is
accumulated by composite Simpson quadrature of p . dX/dt - h along the
numerical trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .matrixcore import is_symplectic, symplectic_form

__all__ = [
    "PhasePoint",
    "CanonicalMap",
    "IdentityMap",
    "LinearMap",
    "FlowMap",
    "ComposedMap",
    "SubquadraticHamiltonian",
    "free_particle",
    "harmonic_oscillator",
    "pendulum_like",
    "map_eval",
    "hamiltonian_flow",
    "compose",
    "invert",
    "class_b_report",
]


@dataclass(frozen=True)
class PhasePoint:
    """A point (q, p) of phase space, q and p real d-vectors."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "p", np.atleast_1d(np.asarray(self.p, dtype=float)))
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have matching shapes")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p))):
            raise ValueError("phase point has non-finite entries")

    @property
    def d(self) -> int:
        return self.q.shape[-1]

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.q, self.p], axis=-1)

    @staticmethod
    def from_z(z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        d = z.shape[-1] // 2
        return PhasePoint(z[..., :d], z[..., d:])


class CanonicalMap:
    """Base class; subclasses implement ``evaluate`` on batched points.

    ``evaluate(z)`` takes z of shape (..., 2d) and returns
    (image (..., 2d), jacobian (..., 2d, 2d), action (...)).
    """

    kind = "abstract"
    d: int

    def evaluate(self, z: np.ndarray):
        raise NotImplementedError

    def __call__(self, z):
        return self.evaluate(np.asarray(z, dtype=float))

    def image(self, z):
        return self.evaluate(np.asarray(z, dtype=float))[0]

    def invert(self) -> "CanonicalMap":
        raise NotImplementedError(f"map of kind '{self.kind}' has no implemented inverse")


class IdentityMap(CanonicalMap):
    kind = "identity"

    def __init__(self, d: int):
        self.d = d

    def evaluate(self, z):
        n = 2 * self.d
        F = np.broadcast_to(np.eye(n), z.shape[:-1] + (n, n)).copy()
        return z.copy(), F, np.zeros(z.shape[:-1])

    def invert(self):
        return self


class LinearMap(CanonicalMap):
    """Linear canonical map z -> F0 z with quadratic action.

    The action solves the gradient constraints exactly:
    S = q.(A^T C)q/2 + q.(A^T D - I)p + p.(B^T D)p/2 for blocks [[A,B],[C,D]].
    """

    kind = "linear"

    def __init__(self, F0):
        F0 = np.asarray(F0, dtype=float)
        ok, res = is_symplectic(F0, tol=1e-10)
        if not ok:
            raise ValueError(f"matrix is not symplectic (residual {res:.3e})")
        self.d = F0.shape[0] // 2
        self.F0 = F0
        d = self.d
        A, B = F0[:d, :d], F0[:d, d:]
        C, D = F0[d:, :d], F0[d:, d:]
        # coefficient blocks of the quadratic action
        self._Sqq = 0.5 * (A.T @ C + (A.T @ C).T)
        self._Sqp = A.T @ D - np.eye(d)
        self._Spp = 0.5 * (B.T @ D + (B.T @ D).T)

    def evaluate(self, z):
        d = self.d
        image = z @ self.F0.T
        F = np.broadcast_to(self.F0, z.shape[:-1] + self.F0.shape).copy()
        q, p = z[..., :d], z[..., d:]
        S = (
            0.5 * np.einsum("...i,ij,...j->...", q, self._Sqq, q)
            + np.einsum("...i,ij,...j->...", q, self._Sqp, p)
            + 0.5 * np.einsum("...i,ij,...j->...", p, self._Spp, p)
        )
        return image, F, S

    def invert(self):
        J = symplectic_form(self.d)
        return LinearMap(-J @ self.F0.T @ J)


@dataclass
class SubquadraticHamiltonian:
    """A Hamiltonian h(q, p) with batched gradient and Hessian callbacks.

    For separable h = T(p) + V(q) supply ``t_grad``/``t_hess`` and
    ``v_grad``/``v_hess`` (enables the splitting integrator); otherwise only
    ``grad``/``hess`` and the implicit midpoint stepper is used. The Hessian
    bound is user-declared and only spot-checked by sampling.
    """

    value: Callable  # (q, p) -> (...) real
    grad: Callable | None = None  # (q, p) -> (dq (...,d), dp (...,d))
    hess: Callable | None = None  # (q, p) -> (..., 2d, 2d)
    t_grad: Callable | None = None  # p -> (...,d)
    t_hess: Callable | None = None  # p -> (...,d,d)
    v_grad: Callable | None = None  # q -> (...,d)
    v_hess: Callable | None = None  # q -> (...,d,d)
    hessian_bound: float = np.inf
    name: str = "hamiltonian"

    @property
    def separable(self) -> bool:
        return self.t_grad is not None and self.v_grad is not None


def free_particle(d: int = 1) -> SubquadraticHamiltonian:
    """h = |p|^2 / 2."""
    return SubquadraticHamiltonian(
        value=lambda q, p: 0.5 * np.sum(p * p, axis=-1),
        t_grad=lambda p: p,
        t_hess=lambda p: np.broadcast_to(np.eye(d), p.shape + (d,)).copy(),
        v_grad=lambda q: np.zeros_like(q),
        v_hess=lambda q: np.zeros(q.shape + (d,)),
        hessian_bound=1.0,
        name="free",
    )


def harmonic_oscillator(d: int = 1, omega: float = 1.0) -> SubquadraticHamiltonian:
    """h = (|p|^2 + omega^2 |q|^2) / 2."""
    w2 = omega * omega
    return SubquadraticHamiltonian(
        value=lambda q, p: 0.5 * (np.sum(p * p, axis=-1) + w2 * np.sum(q * q, axis=-1)),
        t_grad=lambda p: p,
        t_hess=lambda p: np.broadcast_to(np.eye(d), p.shape + (d,)).copy(),
        v_grad=lambda q: w2 * q,
        v_hess=lambda q: np.broadcast_to(w2 * np.eye(d), q.shape + (d,)).copy(),
        hessian_bound=max(1.0, w2),
        name="harmonic",
    )


def pendulum_like(d: int = 1, a: float = 0.5) -> SubquadraticHamiltonian:
    """h = |p|^2/2 + a * sum cos(q); bounded potential Hessian."""
    return SubquadraticHamiltonian(
        value=lambda q, p: 0.5 * np.sum(p * p, axis=-1) + a * np.sum(np.cos(q), axis=-1),
        t_grad=lambda p: p,
        t_hess=lambda p: np.broadcast_to(np.eye(d), p.shape + (d,)).copy(),
        v_grad=lambda q: -a * np.sin(q),
        v_hess=lambda q: _diag_embed(-a * np.cos(q)),
        hessian_bound=max(1.0, abs(a)),
        name="pendulum",
    )


def _diag_embed(v):
    out = np.zeros(v.shape + (v.shape[-1],))
    idx = np.arange(v.shape[-1])
    out[..., idx, idx] = v
    return out


# Yoshida 4th-order composition coefficients for a 2nd-order base step
_YOSH_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSH_W0 = 1.0 - 2.0 * _YOSH_W1
_YOSHIDA = (_YOSH_W1, _YOSH_W0, _YOSH_W1)


class FlowMap(CanonicalMap):
    """Time-t Hamiltonian flow of a subquadratic Hamiltonian.

    Each evaluation re-integrates trajectory, variational equation and
    action; no mutable state is kept between calls.
    """

    kind = "hamiltonian-flow"

    def __init__(self, h: SubquadraticHamiltonian, t: float, step: float, d: int = 1):
        if step <= 0:
            raise ValueError("step must be positive")
        if abs(t) / step > 1e7:
            raise ValueError("too many integration steps requested")
        self.h = h
        self.t = float(t)
        self.step = float(step)
        self.d = d

    def evaluate(self, z):
        d = self.d
        q, p = z[..., :d].copy(), z[..., d:].copy()
        n2 = 2 * d
        F = np.broadcast_to(np.eye(n2), z.shape[:-1] + (n2, n2)).copy()
        if self.t == 0.0:
            return z.copy(), F, np.zeros(z.shape[:-1])
        nsteps = max(2, int(np.ceil(abs(self.t) / self.step)))
        if nsteps % 2:
            nsteps += 1
        dt = self.t / nsteps
        # Lagrangian samples at the step endpoints for Simpson quadrature
        lag = np.empty((nsteps + 1,) + z.shape[:-1])
        lag[0] = self._lagrangian(q, p)
        for k in range(nsteps):
            if self.h.separable:
                q, p, F = self._yoshida_step(q, p, F, dt)
            else:
                q, p, F = self._midpoint_step(q, p, F, dt)
            if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
                raise FloatingPointError("flow integration produced non-finite values")
            lag[k + 1] = self._lagrangian(q, p)
        S = _simpson(lag, dt)
        return np.concatenate([q, p], axis=-1), F, S

    def _lagrangian(self, q, p):
        # p . dX/dt - h with dX/dt = dh/dp
        if self.h.separable:
            dp = self.h.t_grad(p)
        else:
            dp = self.h.grad(q, p)[1]
        return np.sum(p * dp, axis=-1) - self.h.value(q, p)

    def _yoshida_step(self, q, p, F, dt):
        for w in _YOSHIDA:
            q, p, F = self._verlet(q, p, F, w * dt)
        return q, p, F

    def _verlet(self, q, p, F, dt):
        d = self.d
        h = self.h
        # half kick
        p = p - 0.5 * dt * h.v_grad(q)
        Vh = h.v_hess(q)
        F = F.copy()
        F[..., d:, :] -= 0.5 * dt * np.einsum("...ij,...jk->...ik", Vh, F[..., :d, :])
        # drift
        q = q + dt * h.t_grad(p)
        Th = h.t_hess(p)
        F[..., :d, :] += dt * np.einsum("...ij,...jk->...ik", Th, F[..., d:, :])
        # half kick
        p = p - 0.5 * dt * h.v_grad(q)
        Vh = h.v_hess(q)
        F[..., d:, :] -= 0.5 * dt * np.einsum("...ij,...jk->...ik", Vh, F[..., :d, :])
        return q, p, F

    def _midpoint_step(self, q, p, F, dt):
        d = self.d
        h = self.h
        z = np.concatenate([q, p], axis=-1)
        J = symplectic_form(d)
        # fixed-point iteration for the midpoint
        zm = z.copy()
        for _ in range(100):
            qm, pm = zm[..., :d], zm[..., d:]
            gq, gp = h.grad(qm, pm)
            rhs = np.concatenate([gp, -gq], axis=-1)  # J grad h
            z_new = z + 0.5 * dt * rhs
            delta = np.max(np.abs(z_new - zm))
            zm = z_new
            if delta < 1e-15:
                break
        else:
            raise FloatingPointError("implicit midpoint iteration failed to converge")
        z1 = 2.0 * zm - z
        H = h.hess(zm[..., :d], zm[..., d:])
        JH = np.einsum("ij,...jk->...ik", J, H)
        eye = np.eye(2 * d)
        Ac = eye - 0.5 * dt * JH
        Bc = eye + 0.5 * dt * JH
        T = np.linalg.solve(Ac, Bc)  # Cayley tangent map, symplectic
        F = np.einsum("...ij,...jk->...ik", T, F)
        return z1[..., :d], z1[..., d:], F

    def invert(self):
        return FlowMap(self.h, -self.t, self.step, self.d)


class ComposedMap(CanonicalMap):
    kind = "composite"

    def __init__(self, outer: CanonicalMap, inner: CanonicalMap):
        if outer.d != inner.d:
            raise ValueError("cannot compose maps of different dimension")
        self.outer = outer
        self.inner = inner
        self.d = inner.d

    def evaluate(self, z):
        z1, F1, S1 = self.inner.evaluate(z)
        z2, F2, S2 = self.outer.evaluate(z1)
        F = np.einsum("...ij,...jk->...ik", F2, F1)
        return z2, F, S2 + S1

    def invert(self):
        return ComposedMap(self.inner.invert(), self.outer.invert())


class InverseMap(CanonicalMap):
    """Pointwise inverse of a map, solved by damped Newton iteration.

    Used only for map kinds without a structural inverse; the Jacobian is
    -J (F o kappa^{-1})^T J and the action -S o kappa^{-1}.
    """

    kind = "inverse"

    def __init__(self, base: CanonicalMap):
        self.base = base
        self.d = base.d

    def evaluate(self, z):
        w = z.copy()
        for _ in range(200):
            img, F, _ = self.base.evaluate(w)
            res = img - z
            if np.max(np.abs(res)) < 1e-13:
                break
            step = np.linalg.solve(F, res[..., None])[..., 0]
            w = w - step
        _, F, S = self.base.evaluate(w)
        J = symplectic_form(self.d)
        Finv = -np.einsum("ij,...kj,kl->...il", J, F, J)
        return w, Finv, -S


def map_eval(kappa: CanonicalMap, z: PhasePoint):
    """Evaluate a canonical map at a single phase point.

    Returns (image PhasePoint, jacobian 2d x 2d, action scalar).
    """
    img, F, S = kappa.evaluate(z.z)
    return PhasePoint.from_z(img), F, float(S)


def hamiltonian_flow(h: SubquadraticHamiltonian, t: float, step: float = 1e-3, d: int = 1) -> CanonicalMap:
    if not h.separable and (h.grad is None or h.hess is None):
        raise ValueError("non-separable Hamiltonian needs grad and hess callbacks")
    return FlowMap(h, t, step, d)


def compose(outer: CanonicalMap, inner: CanonicalMap) -> CanonicalMap:
    if isinstance(outer, IdentityMap):
        return inner
    if isinstance(inner, IdentityMap):
        return outer
    return ComposedMap(outer, inner)


def invert(kappa: CanonicalMap) -> CanonicalMap:
    return kappa.invert()


@dataclass
class ClassBReport:
    M0: float
    M1: float
    c_lower: float
    C_upper: float
    bilipschitz_violations: int = 0
    pairs_tested: int = 0


def class_b_report(kappa: CanonicalMap, region, samples: int = 200, seed: int = 0) -> ClassBReport:
    """Sampled class-B constants of a map over a box region of phase space.

    region is (lo, hi) with lo, hi arrays of length 2d. M0 is the max sampled
    operator norm of the Jacobian, M1 a finite-difference estimate of its
    first derivative; the biLipschitz inequality with constants
    (1/M0(inverse), M0) is checked on sampled pairs. All figures are lower
    estimates, not certified global bounds.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    lo = np.asarray(region[0], dtype=float)
    hi = np.asarray(region[1], dtype=float)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(samples, lo.size))
    _, F, _ = kappa.evaluate(pts)
    M0 = float(np.max(np.linalg.norm(F, ord=2, axis=(-2, -1))))

    fd = 1e-5 * max(1.0, float(np.max(np.abs(pts))))
    dmax = 0.0
    for j in range(lo.size):
        e = np.zeros(lo.size)
        e[j] = fd
        _, Fp, _ = kappa.evaluate(pts + e)
        _, Fm, _ = kappa.evaluate(pts - e)
        dmax = max(dmax, float(np.max(np.linalg.norm((Fp - Fm) / (2 * fd), ord=2, axis=(-2, -1)))))

    _, Finv, _ = kappa.invert().evaluate(kappa.evaluate(pts)[0])
    M0_inv = float(np.max(np.linalg.norm(Finv, ord=2, axis=(-2, -1))))
    c_lower, C_upper = 1.0 / M0_inv, M0

    pairs = rng.uniform(lo, hi, size=(2, samples, lo.size))
    za, zb = pairs
    ia, ib = kappa.evaluate(za)[0], kappa.evaluate(zb)[0]
    dist_in = np.linalg.norm(zb - za, axis=-1)
    dist_out = np.linalg.norm(ib - ia, axis=-1)
    slack = 1e-9
    bad = np.sum(
        (dist_out < c_lower * dist_in * (1 - slack) - slack)
        | (dist_out > C_upper * dist_in * (1 + slack) + slack)
    )
    return ClassBReport(M0, dmax, c_lower, C_upper, int(bad), samples)


def _simpson(samples: np.ndarray, dt: float):
    """Composite Simpson along axis 0 (even number of panels)."""
    n = samples.shape[0] - 1
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return np.tensordot(w, samples, axes=(0, 0)) * (dt / 3.0)
