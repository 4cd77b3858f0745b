"""Quantum Fisher information of one-parameter state families.

Three engines compute the same number by different routes:

``"matrix"``
    ``F = sum_{k,l} 2 |<k|d rho|l>|^2 / (lam_k + lam_l)`` over eigenpairs whose
    eigenvalue sum exceeds ``tol``. Default; copes with rank deficiency.
``"spectral"``
    The three-term spectral form (classical, pure-state and mixed
    correction) with eigenvector derivatives from first-order perturbation
    theory. Needs a non-degenerate spectrum.
``"sld"``
    Builds the symmetric logarithmic derivative ``L`` and returns
    ``Tr[rho L^2]``.

Everything below works on a single matrix or on a stack ``(..., 4, 4)``;
the ``*_batch`` functions return plain value arrays for the sweep engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .channel import ChannelParams, alpha_arrays
from .errors import NumericError, ValidationError
from .teleport import (
    InputState,
    ftp_matrix,
    raw_bob_matrix,
    stp_matrix,
)

ENGINES = ("matrix", "spectral", "sld")
DERIVATIVES = ("analytic", "fd")
SUPPORT_TOL = 1e-12
GAP_TOL = 1e-8
FD_STEP = 1e-5
THETA_DOMAIN = (-math.pi, 2 * math.pi)


class DegenerateSpectrumError(NumericError):
    """The three-term spectral engine met (near-)equal eigenvalues; use ``engine="matrix"``."""


@dataclass(frozen=True)
class DensityFamily:
    """``evaluator(xi)`` returns a 4x4 density matrix for ``xi`` in ``domain``."""

    evaluator: Callable[[float], np.ndarray]
    domain: tuple[float, float] = (-math.inf, math.inf)

    def __call__(self, xi):
        lo, hi = self.domain
        if not lo <= xi <= hi:
            raise ValidationError(f"xi = {xi} outside family domain {self.domain}")
        return np.asarray(self.evaluator(xi), dtype=complex)


@dataclass(frozen=True)
class QfiResult:
    """A QFI value with its breakdown.

    For ``"spectral"`` the three terms are the classical, pure-state and mixed
    correction parts and add up to ``value``. The other engines report the
    diagonal (classical) eigenbasis contribution in ``term_classical`` and
    the coherence contribution in ``term_pure``; ``term_mixed`` is zero.
    """

    value: float
    term_classical: float
    term_pure: float
    term_mixed: float
    engine: str


# ---- derivatives ----

def rho_derivative_fd(f: DensityFamily, xi: float, h: float = FD_STEP, richardson: bool = False) -> np.ndarray:
    """Central difference of ``f`` at ``xi``; ``richardson`` adds the 2h stencil (4th order)."""
    lo, hi = f.domain
    if not (lo <= xi - 2 * h and xi + 2 * h <= hi):
        raise ValidationError(f"[xi - 2h, xi + 2h] around {xi} leaves domain {f.domain}")
    d1 = (f(xi + h) - f(xi - h)) / (2 * h)
    if richardson:
        d2 = (f(xi + 2 * h) - f(xi - 2 * h)) / (4 * h)
        d1 = (4 * d1 - d2) / 3
    return linalg.symmetrize(d1)


def _dtrig(theta):
    """Derivatives of cos^2, sin^2 and cos*sin with respect to theta."""
    s2t = np.sin(2 * theta)
    return -s2t, s2t, np.cos(2 * theta)


def raw_bob_derivative(protocol: str, alphas, theta, phi, parameter: str = "theta") -> np.ndarray:
    """Exact derivative of the un-normalized closed-form Bob state."""
    a1, a2, a3, a4, a5 = alphas
    c = np.cos(theta)
    s = np.sin(theta)
    if parameter == "theta":
        dc2, ds2, dcs = _dtrig(theta)
        ph_f = np.exp(0.5j * np.asarray(phi))
        ph_s = np.exp(-0.5j * np.asarray(phi))
    elif parameter == "phi":
        dc2 = ds2 = 0.0 * np.asarray(theta)
        dcs = c * s
        ph_f = 0.5j * np.exp(0.5j * np.asarray(phi))
        ph_s = -0.5j * np.exp(-0.5j * np.asarray(phi))
    else:
        raise ValidationError(f"parameter must be 'theta' or 'phi', got {parameter!r}")

    if protocol == "ftp":
        db1 = (a1 + a5) ** 2 * ds2 + (a2 + a4) ** 2 * dc2
        db2 = (a3 + np.conj(a3)) ** 2 * dcs * ph_f
        db3 = 0.0 * db1
        db4 = (a2 + a5) ** 2 * dc2 + (a1 + a4) ** 2 * ds2
        return ftp_matrix(db1, db2, db3, db4)
    if protocol == "stp":
        dg1 = dc2 * a1**2 + ds2 * a4**2
        dg2 = dc2 * a1 * a2 + ds2 * a4 * a5
        dg3 = dc2 * a2**2 + ds2 * a5**2
        dg4 = dcs * ph_s * np.abs(a3) ** 2
        return stp_matrix(dg1, dg2, dg3, dg4)
    raise ValidationError(f"protocol must be 'ftp' or 'stp', got {protocol!r}")


def bob_state_and_derivative(protocol, alphas, theta, phi, parameter="theta", normalized=True):
    """Closed-form Bob state(s) and their exact derivative, stacked like ``alphas``.

    With ``normalized`` the quotient rule runs through the trace:
    ``(R/T)' = R'/T - R T'/T^2``.
    """
    raw = raw_bob_matrix(protocol, alphas, theta, phi)
    draw = raw_bob_derivative(protocol, alphas, theta, phi, parameter)
    if not normalized:
        return raw, draw
    tr = np.real(np.trace(raw, axis1=-2, axis2=-1))
    if np.any(tr <= linalg.TRACE_FLOOR):
        raise NumericError(f"raw trace {np.min(tr):.3e} below floor; Bob state is degenerate")
    dtr = np.real(np.trace(draw, axis1=-2, axis2=-1))
    t = tr[..., None, None]
    dt = dtr[..., None, None]
    return raw / t, draw / t - raw * dt / t**2


def rho_derivative_analytic(protocol: str, p: ChannelParams, s: InputState, normalized: bool = True) -> np.ndarray:
    """Exact theta-derivative of the (trace-normalized) closed-form Bob state."""
    alphas = alpha_arrays(p.n, p.nbar, p.delta, p.tau)[:5]
    return bob_state_and_derivative(protocol, alphas, s.theta, s.phi, "theta", normalized)[1]


def bob_family(protocol: str, p: ChannelParams, phi: float, normalized: bool = True) -> DensityFamily:
    """Closed-form Bob state as a function of theta at fixed channel and phi.

    The closed forms are trigonometric polynomials in theta, so the family
    is evaluated past [0, pi] to let difference stencils straddle the ends.
    """
    alphas = alpha_arrays(p.n, p.nbar, p.delta, p.tau)[:5]

    def evaluate(theta):
        raw = raw_bob_matrix(protocol, alphas, theta, phi)
        if not normalized:
            return raw
        return raw / np.real(np.trace(raw))

    return DensityFamily(evaluate, THETA_DOMAIN)


# ---- engines ----

def _check_pair(rho, drho):
    rho = linalg.as_matrix(rho, batch=True)
    drho = linalg.as_matrix(drho, batch=True)
    if rho.shape != drho.shape:
        raise ValidationError(f"rho {rho.shape} and drho {drho.shape} differ in shape")
    herr = linalg.hermiticity_error(drho)
    if herr > linalg.HERMITIAN_TOL:
        raise ValidationError(f"drho is not Hermitian (max deviation {herr:.3e})")
    return rho, drho


def _eigenframe(rho, drho):
    dec = linalg.eigh(rho)
    v = dec.eigenvectors
    d = linalg.dagger(v) @ drho @ v
    return dec.eigenvalues, d


def _matrix_terms(rho, drho, tol):
    lam, d = _eigenframe(rho, drho)
    sums = lam[..., :, None] + lam[..., None, :]
    keep = sums > tol
    weight = np.where(keep, 2.0 / np.where(keep, sums, 1.0), 0.0)
    contrib = weight * np.abs(d) ** 2
    diag = np.einsum("...kk->...", contrib)
    total = np.sum(contrib, axis=(-2, -1))
    return total, diag, total - diag


def qfi_matrix_form_batch(rho, drho, tol: float = SUPPORT_TOL) -> np.ndarray:
    rho, drho = _check_pair(rho, drho)
    return _matrix_terms(rho, drho, tol)[0]


def qfi_matrix_form(rho, drho, tol: float = SUPPORT_TOL) -> QfiResult:
    rho, drho = _check_pair(rho, drho)
    total, diag, off = _matrix_terms(rho, drho, tol)
    return QfiResult(float(total), float(diag), float(off), 0.0, "matrix")


def _spectral_terms(rho, drho, tol, gap_tol):
    lam, d = _eigenframe(rho, drho)
    gaps = lam[..., 1:] - lam[..., :-1]
    if gaps.size and np.min(gaps) <= gap_tol:
        raise DegenerateSpectrumError(
            f"eigenvalue gap {np.min(gaps):.3e} <= {gap_tol:g}; the spectral form needs a "
            "non-degenerate spectrum, use engine='matrix'"
        )
    dlam = np.real(np.einsum("...kk->...k", d))
    pos = lam > tol
    classical = np.sum(np.where(pos, dlam**2 / np.where(pos, lam, 1.0), 0.0), axis=-1)

    # <psi_k | d psi_l> = D_kl / (lam_l - lam_k) for k != l, zero on the diagonal
    n = lam.shape[-1]
    off = ~np.eye(n, dtype=bool)
    denom = lam[..., None, :] - lam[..., :, None]
    overlap = np.where(off, d / np.where(off, denom, 1.0), 0.0)
    ov2 = np.abs(overlap) ** 2

    # <d psi_k | d psi_k> = sum_l |<psi_l | d psi_k>|^2 (column k of overlap)
    pure = 4.0 * np.sum(lam * np.sum(ov2, axis=-2), axis=-1)

    sums = lam[..., :, None] + lam[..., None, :]
    keep = off & (sums > tol)
    prod = lam[..., :, None] * lam[..., None, :]
    mixed = -np.sum(np.where(keep, 8.0 * prod / np.where(keep, sums, 1.0), 0.0) * ov2, axis=(-2, -1))
    return classical + pure + mixed, classical, pure, mixed


def qfi_spectral(rho, drho, tol: float = SUPPORT_TOL, gap_tol: float = GAP_TOL) -> QfiResult:
    rho, drho = _check_pair(rho, drho)
    total, c, p, m = _spectral_terms(rho, drho, tol, gap_tol)
    return QfiResult(float(total), float(c), float(p), float(m), "spectral")


def qfi_spectral_batch(rho, drho, tol: float = SUPPORT_TOL, gap_tol: float = GAP_TOL) -> np.ndarray:
    rho, drho = _check_pair(rho, drho)
    return _spectral_terms(rho, drho, tol, gap_tol)[0]


def sld_operator(rho, drho, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Solve ``drho = (L rho + rho L) / 2`` on the support of ``rho``."""
    rho, drho = _check_pair(rho, drho)
    dec = linalg.eigh(rho)
    v = dec.eigenvectors
    lam = dec.eigenvalues
    d = linalg.dagger(v) @ drho @ v
    sums = lam[..., :, None] + lam[..., None, :]
    keep = sums > tol
    l_eig = np.where(keep, 2.0 * d / np.where(keep, sums, 1.0), 0.0)
    return v @ l_eig @ linalg.dagger(v)


def _sld_value(rho, drho, tol):
    lmat = sld_operator(rho, drho, tol)
    return np.real(np.trace(rho @ lmat @ lmat, axis1=-2, axis2=-1)), lmat


def qfi_sld(rho, drho, tol: float = SUPPORT_TOL) -> QfiResult:
    rho, drho = _check_pair(rho, drho)
    value, lmat = _sld_value(rho, drho, tol)
    # split Tr[rho L^2] into the part from L's eigenbasis diagonal and the rest
    lam, _ = _eigenframe(rho, drho)
    v = linalg.eigh(rho).eigenvectors
    l_eig = linalg.dagger(v) @ lmat @ v
    diag = float(np.real(np.sum(lam * np.abs(np.diagonal(l_eig)) ** 2)))
    return QfiResult(float(value), diag, float(value) - diag, 0.0, "sld")


def qfi_sld_batch(rho, drho, tol: float = SUPPORT_TOL) -> np.ndarray:
    rho, drho = _check_pair(rho, drho)
    return _sld_value(rho, drho, tol)[0]


_BATCH = {
    "matrix": qfi_matrix_form_batch,
    "spectral": qfi_spectral_batch,
    "sld": qfi_sld_batch,
}
_SINGLE = {
    "matrix": qfi_matrix_form,
    "spectral": qfi_spectral,
    "sld": qfi_sld,
}


def qfi(rho, drho, engine: str = "matrix", tol: float = SUPPORT_TOL) -> QfiResult:
    if engine not in _SINGLE:
        raise ValidationError(f"engine must be one of {ENGINES}, got {engine!r}")
    return _SINGLE[engine](rho, drho, tol)


def qfi_batch(rho, drho, engine: str = "matrix", tol: float = SUPPORT_TOL) -> np.ndarray:
    if engine not in _BATCH:
        raise ValidationError(f"engine must be one of {ENGINES}, got {engine!r}")
    return _BATCH[engine](rho, drho, tol)


# ---- teleported QFI ----

def teleported_state_and_derivative(
    protocol, alphas, theta, phi, derivative="analytic", parameter="theta",
    normalized=True, h=FD_STEP, richardson=True,
):
    """Bob state(s) and derivative(s) with respect to ``parameter``, stacked over ``alphas``."""
    if derivative == "analytic":
        return bob_state_and_derivative(protocol, alphas, theta, phi, parameter, normalized)
    if derivative != "fd":
        raise ValidationError(f"derivative must be one of {DERIVATIVES}, got {derivative!r}")

    def evaluate(x):
        th, ph = (x, phi) if parameter == "theta" else (theta, x)
        raw = raw_bob_matrix(protocol, alphas, th, ph)
        if not normalized:
            return raw
        return raw / np.real(np.trace(raw, axis1=-2, axis2=-1))[..., None, None]

    x0 = theta if parameter == "theta" else phi
    rho = evaluate(x0)
    d1 = (evaluate(x0 + h) - evaluate(x0 - h)) / (2 * h)
    if richardson:
        d2 = (evaluate(x0 + 2 * h) - evaluate(x0 - 2 * h)) / (4 * h)
        d1 = (4 * d1 - d2) / 3
    return rho, linalg.symmetrize(d1)


def teleported_qfi_grid(
    protocol, n, nbar, delta, tau, theta, phi, engine="matrix", derivative="analytic",
    parameter="theta", normalized=True,
) -> np.ndarray:
    """QFI of Bob's state over a grid of ``tau`` values at fixed channel knobs."""
    alphas = alpha_arrays(n, nbar, delta, tau)[:5]
    rho, drho = teleported_state_and_derivative(
        protocol, alphas, theta, phi, derivative, parameter, normalized
    )
    return qfi_batch(rho, drho, engine)


def teleported_qfi(
    protocol: str, p: ChannelParams, s: InputState, engine: str = "matrix",
    derivative: str = "analytic", parameter: str = "theta", normalized: bool = True,
) -> float:
    """QFI with respect to ``theta`` (or ``phi``) carried by Bob's closed-form state."""
    return float(
        teleported_qfi_grid(
            protocol, p.n, p.nbar, p.delta, p.tau, s.theta, s.phi, engine, derivative,
            parameter, normalized,
        )
    )
