"""Coherent states, the eps-scaled FBI transform and its inverse.

Phase conventions follow the coherent-state kernel

    g(y) = (det Re Theta)^{1/4} (pi eps)^{-d/4}
           exp(i p.(y-q)/eps) exp(-Theta (y-q).(y-q) / 2 eps)

so the forward transform uses conj(Theta) and exp(-i p.(y-q)/eps). The
transforms are plain weighted sums over the grids; the resolution rule below
guards against aliasing and is enforced (violations raise, never alias
silently).
"""

from __future__ import annotations

import numpy as np

from .grids import GridFunction, GridLayout, PhaseSpaceField, ResolutionError
from .matrixcore import ComplexSymMatrix

__all__ = [
    "coherent_state",
    "fbi_forward",
    "fbi_inverse",
    "scale_op",
    "scale_field",
    "required_spacing",
    "check_resolution",
    "auto_grid",
    "auto_phase_space_grid",
    "momentum_band",
]

_Q_CHUNK = 256  # q-nodes processed per block to bound transform memory


def required_spacing(eps: float, gamma: float, p_max: float) -> float:
    """Aliasing guard: spacing <= min(sqrt(eps/gamma)/4, pi eps/(4 (p_max+1)))."""
    return min(np.sqrt(eps / gamma) / 4.0, np.pi * eps / (4.0 * (abs(p_max) + 1.0)))


def check_resolution(layout: GridLayout, eps: float, gamma: float, p_max: float):
    h = float(np.max(layout.spacing))
    h_req = required_spacing(eps, gamma, p_max)
    if h > h_req:
        raise ResolutionError(
            f"grid spacing {h:.4g} exceeds resolution rule {h_req:.4g} "
            f"(eps={eps}, gamma={gamma}, p_max={p_max})"
        )


def _state_norm_const(eps: float, Theta: ComplexSymMatrix) -> float:
    d = Theta.d
    return float(np.linalg.det(Theta.m.real) ** 0.25 / (np.pi * eps) ** (d / 4.0))


def _gaussian_envelope(eps, theta_m, dy):
    """exp(-Theta (dy).(dy) / 2 eps) for dy of shape (..., d)."""
    quad = np.einsum("...i,ij,...j->...", dy, theta_m, dy)
    return np.exp(-quad / (2.0 * eps))


def coherent_state(eps, Theta: ComplexSymMatrix, q, p, layout: GridLayout) -> GridFunction:
    """Normalized Gaussian wave packet centered at (q, p) on the given grid."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    check_resolution(layout, eps, Theta.gam, float(np.max(np.abs(p))))
    y = layout.points()
    dy = y - q
    vals = (
        _state_norm_const(eps, Theta)
        * np.exp(1j * (dy @ p) / eps)
        * _gaussian_envelope(eps, Theta.m, dy)
    )
    return GridFunction(layout, vals)


def fbi_forward(
    eps: float, Theta: ComplexSymMatrix, phi: GridFunction, qgrid: GridLayout, pgrid: GridLayout
) -> PhaseSpaceField:
    """FBI transform (2 pi eps)^{-d/2} <g_{q,p} | phi> on the product grid."""
    d = phi.layout.d
    p_max = float(np.max(np.abs(np.concatenate([pgrid.lo, pgrid.hi]))))
    check_resolution(phi.layout, eps, Theta.gam, p_max)
    y = phi.layout.points()
    qpts = qgrid.points()
    ppts = pgrid.points()
    pref = _state_norm_const(eps, Theta) * phi.layout.weight / (2.0 * np.pi * eps) ** (d / 2.0)
    # conj(g)(y) = e^{-i p.(y-q)/eps} e^{-conj(Theta) (y-q)^2 / 2eps}
    E = np.exp(-1j * (ppts @ y.T) / eps)  # (Np, Ny)
    theta_c = Theta.m.conj()
    out = np.empty((qgrid.size, pgrid.size), dtype=complex)
    for a in range(0, qgrid.size, _Q_CHUNK):
        qs = qpts[a : a + _Q_CHUNK]
        win = _gaussian_envelope(eps, theta_c, y[None, :, :] - qs[:, None, :])  # (nq, Ny)
        core = (win * phi.values[None, :]) @ E.T  # (nq, Np)
        out[a : a + _Q_CHUNK] = core * np.exp(1j * (qs @ ppts.T) / eps)
    return PhaseSpaceField(qgrid, pgrid, pref * out)


def fbi_inverse(
    eps: float, Theta: ComplexSymMatrix, Phi: PhaseSpaceField, layout: GridLayout
) -> GridFunction:
    """Inverse FBI transform: coherent-state superposition of a field."""
    d = layout.d
    p_max = float(np.max(np.abs(np.concatenate([Phi.pgrid.lo, Phi.pgrid.hi]))))
    check_resolution(layout, eps, Theta.gam, p_max)
    y = layout.points()
    qpts = Phi.qgrid.points()
    ppts = Phi.pgrid.points()
    pref = _state_norm_const(eps, Theta) * Phi.weight / (2.0 * np.pi * eps) ** (d / 2.0)
    E = np.exp(1j * (ppts @ y.T) / eps)  # (Np, Ny)
    out = np.zeros(layout.size, dtype=complex)
    for a in range(0, Phi.qgrid.size, _Q_CHUNK):
        qs = qpts[a : a + _Q_CHUNK]
        blk = Phi.values[a : a + _Q_CHUNK] * np.exp(-1j * (qs @ ppts.T) / eps)  # (nq, Np)
        core = blk @ E  # (nq, Ny)
        win = _gaussian_envelope(eps, Theta.m, y[None, :, :] - qs[:, None, :])
        out += np.sum(core * win, axis=0)
    return GridFunction(layout, pref * out)


def scale_op(eps: float, direction: str, f: GridFunction) -> GridFunction:
    """Unitary scaling T f(y) = eps^{d/4} f(sqrt(eps) y) (or its adjoint).

    Interpolation-free: the output lives on the rescaled grid whose nodes
    are the preimages of the input nodes.
    """
    d = f.layout.d
    s = np.sqrt(eps)
    if direction == "forward":
        return GridFunction(f.layout.scaled(1.0 / s), eps ** (d / 4.0) * f.values)
    if direction == "adjoint":
        return GridFunction(f.layout.scaled(s), eps ** (-d / 4.0) * f.values)
    raise ValueError(f"unknown direction {direction!r}")


def scale_field(eps: float, direction: str, F: PhaseSpaceField) -> PhaseSpaceField:
    """The 2d-dimensional scaling acting on phase-space fields."""
    d = F.d
    s = np.sqrt(eps)
    if direction == "forward":
        return PhaseSpaceField(F.qgrid.scaled(1.0 / s), F.pgrid.scaled(1.0 / s), eps ** (d / 2.0) * F.values)
    if direction == "adjoint":
        return PhaseSpaceField(F.qgrid.scaled(s), F.pgrid.scaled(s), eps ** (-d / 2.0) * F.values)
    raise ValueError(f"unknown direction {direction!r}")


def momentum_band(phi: GridFunction, eps: float, tail: float = 1e-14) -> tuple[float, float]:
    """Essential eps-momentum range of a 1-d grid function via its FFT.

    Returns (p_lo, p_hi) such that frequencies outside carry at most ``tail``
    of the spectral mass; momenta are eps * angular frequency.
    """
    if phi.layout.d != 1:
        raise ValueError("momentum_band implemented for d=1")
    h = float(phi.layout.spacing[0])
    spec = np.fft.fft(phi.values)
    k = 2.0 * np.pi * np.fft.fftfreq(phi.layout.n, h)
    order = np.argsort(k)
    k, mass = k[order], np.abs(spec[order]) ** 2
    total = float(np.sum(mass))
    if total == 0.0:
        return 0.0, 0.0
    csum = np.cumsum(mass) / total
    ilo = int(np.searchsorted(csum, tail / 2))
    ihi = int(np.searchsorted(csum, 1.0 - tail / 2))
    ihi = min(ihi, k.size - 1)
    return eps * float(k[ilo]), eps * float(k[ihi])


def auto_grid(
    eps: float,
    Theta: ComplexSymMatrix,
    support_radius: float,
    p_max: float,
    safety: float = 1.5,
) -> GridLayout:
    """Grid layout satisfying the resolution rule with a safety factor.

    The box extends ``support_radius`` plus a tail margin 10 sqrt(eps/lam)
    beyond the origin-centered region of interest.
    """
    margin = 8.0 * np.sqrt(eps / Theta.lam)
    L = support_radius + margin
    h = required_spacing(eps, Theta.gam, p_max) / safety
    n = int(np.ceil(2.0 * L / h))
    d = Theta.d
    return GridLayout(np.full(d, -L), np.full(d, L), n)


def auto_phase_space_grid(
    eps: float,
    Theta: ComplexSymMatrix,
    q_radius: float,
    p_band: tuple[float, float],
    safety: float = 1.5,
) -> tuple[GridLayout, GridLayout]:
    """Phase-space (q, p) layouts covering the essential FBI support.

    q spacing resolves the coherent-state width sqrt(eps/gamma); p spacing
    keeps the alias period of the p-sum beyond twice the Gaussian tail
    margin (h_p <= pi sqrt(eps lam) / 8).
    """
    d = Theta.d
    qmargin = 8.0 * np.sqrt(eps / Theta.lam)
    Lq = q_radius + qmargin
    hq = np.sqrt(eps / Theta.gam) / (4.0 * safety)
    nq = int(np.ceil(2.0 * Lq / hq))
    qgrid = GridLayout(np.full(d, -Lq), np.full(d, Lq), nq)

    pmargin = 8.0 * np.sqrt(eps * Theta.gam)
    plo, phi_ = min(p_band) - pmargin, max(p_band) + pmargin
    hp = np.pi * np.sqrt(eps * Theta.lam) / (8.0 * safety)
    np_ = int(np.ceil((phi_ - plo) / hp))
    pgrid = GridLayout(np.full(d, plo), np.full(d, phi_), np_)
    return qgrid, pgrid
