"""Dense kernel for 2x2 and 4x4 complex Hermitian matrices.

Matrices are plain ``numpy`` complex arrays. Every public function checks
the shape, never mutates its arguments and returns fresh arrays, so the
functions can be called from several threads at once.

The eigensolver is a cyclic complex Jacobi method written to work on a
whole stack of matrices ``(..., d, d)`` at once. Each matrix in the stack
is frozen as soon as it converges, which makes the result for one matrix
independent of whatever else happens to be in the batch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError

DIMS = (2, 4)
HERMITIAN_TOL = 1e-10
OFFDIAG_TOL = 1e-14
MAX_SWEEPS = 100
PHASE_TOL = 1e-12
TRACE_FLOOR = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_matrix(m, batch: bool = False) -> np.ndarray:
    """Coerce ``m`` to a complex array and validate its shape and entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim < 2 or (not batch and a.ndim != 2):
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[-1] != a.shape[-2] or a.shape[-1] not in DIMS:
        raise ValidationError(f"matrix dimension must be 2 or 4, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix contains NaN or Inf entries")
    return a


def dagger(m) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(m), -1, -2))


def mat_mul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def trace(m) -> complex:
    return complex(np.trace(as_matrix(m)))


def hermiticity_error(m) -> float:
    """Largest ``|m_ij - conj(m_ji)|`` over the matrix (or the whole stack)."""
    a = np.asarray(m)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - dagger(a))))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(as_matrix(m, batch=True)) <= tol


def symmetrize(m) -> np.ndarray:
    """Return ``(m + m^dagger) / 2``. Only called where documented."""
    a = np.asarray(m, dtype=complex)
    return 0.5 * (a + dagger(a))


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues in ascending order and matching orthonormal columns.

    For a stacked input the arrays carry the same leading batch axes.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues[..., None, :]) @ dagger(v)


def _offdiag_norm(a: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    mask = ~np.eye(d, dtype=bool)
    return np.max(np.abs(a[..., mask]), axis=-1)


def _rotate(a, v, p, q, active):
    """One complex Jacobi rotation annihilating ``a[..., p, q]`` where active."""
    apq = a[..., p, q]
    g = np.abs(apq)
    go = active & (g > 0.0)
    if not np.any(go):
        return a, v
    safe_g = np.where(go, g, 1.0)
    phase = np.where(go, apq / safe_g, 1.0)
    app = a[..., p, p].real
    aqq = a[..., q, q].real
    theta = (aqq - app) / (2.0 * safe_g)
    t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    c = np.where(go, c, 1.0)
    s = np.where(go, s, 0.0)

    # J has J_pp = J_qq = c, J_pq = s e^{i phi}, J_qp = -s e^{-i phi}; A <- J^dag A J
    sp = (s * phase)[..., None]
    sm = (s * np.conj(phase))[..., None]
    cc = c[..., None]

    a = a.copy()
    col_p = a[..., :, p].copy()
    col_q = a[..., :, q].copy()
    a[..., :, p] = cc * col_p - sm * col_q
    a[..., :, q] = sp * col_p + cc * col_q
    row_p = a[..., p, :].copy()
    row_q = a[..., q, :].copy()
    a[..., p, :] = cc * row_p - np.conj(sm) * row_q
    a[..., q, :] = np.conj(sp) * row_p + cc * row_q
    new_pq = np.where(go, 0.0, a[..., p, q])
    a[..., p, q] = new_pq
    a[..., q, p] = np.conj(new_pq)
    a[..., p, p] = a[..., p, p].real
    a[..., q, q] = a[..., q, q].real

    v = v.copy()
    vp = v[..., :, p].copy()
    vq = v[..., :, q].copy()
    v[..., :, p] = cc * vp - sm * vq
    v[..., :, q] = sp * vp + cc * vq
    return a, v


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest component (lowest index on ties) is real >= 0."""
    mags = np.abs(vecs)
    top = np.max(mags, axis=-2, keepdims=True)
    pivot = np.argmax(mags >= top - PHASE_TOL, axis=-2)
    comp = np.take_along_axis(vecs, pivot[..., None, :], axis=-2)
    cmag = np.abs(comp)
    factor = np.where(cmag > 0.0, np.conj(comp) / np.where(cmag > 0.0, cmag, 1.0), 1.0)
    return vecs * factor


def eigh(m, tol: float = OFFDIAG_TOL, max_sweeps: int = MAX_SWEEPS) -> SpectralDecomp:
    """Eigendecomposition of a Hermitian matrix or a stack of them.

    Cyclic Jacobi: sweeps over the upper triangle in row order until the
    largest off-diagonal magnitude drops below ``tol`` times the matrix
    scale (at least 1). Raises ``ValidationError`` for non-Hermitian input
    and ``NumericError`` (carrying the residual) if ``max_sweeps`` is hit.
    """
    a = as_matrix(m, batch=True)
    herr = hermiticity_error(a)
    if herr > HERMITIAN_TOL:
        raise ValidationError(f"matrix is not Hermitian (max deviation {herr:.3e})")
    batch_shape = a.shape[:-2]
    d = a.shape[-1]
    a = symmetrize(a).reshape((-1, d, d))
    v = np.broadcast_to(np.eye(d, dtype=complex), a.shape).copy()
    scale = np.maximum(1.0, np.max(np.abs(a), axis=(-2, -1)))
    pairs = [(p, q) for p in range(d - 1) for q in range(p + 1, d)]

    sweeps = 0
    active = _offdiag_norm(a) >= tol * scale
    while np.any(active):
        if sweeps >= max_sweeps:
            residual = float(np.max(_offdiag_norm(a)))
            raise NumericError(
                f"Jacobi did not converge in {max_sweeps} sweeps", residual=residual
            )
        for p, q in pairs:
            a, v = _rotate(a, v, p, q, active)
        sweeps += 1
        active = active & (_offdiag_norm(a) >= tol * scale)

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    v = _fix_phases(v)
    return SpectralDecomp(
        eigenvalues=w.reshape(batch_shape + (d,)),
        eigenvectors=v.reshape(batch_shape + (d, d)),
        sweeps=sweeps,
    )


def expectation(psi, m) -> complex:
    """``psi^dagger m psi`` for a unit-norm state vector."""
    a = as_matrix(m)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (a.shape[0],):
        raise ValidationError(f"state of shape {psi.shape} does not fit a {a.shape} matrix")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"state vector is not normalized (norm^2 = {norm!r})")
    return complex(np.vdot(psi, a @ psi))


def normalize_trace(m) -> tuple[np.ndarray, float]:
    """Return ``(m / Tr m, Tr m)``; refuses traces at or below 1e-12."""
    a = as_matrix(m)
    tr = np.trace(a)
    if abs(tr.imag) > HERMITIAN_TOL * max(1.0, abs(tr.real)):
        raise ValidationError(f"trace is not real: {tr!r}")
    if not tr.real > TRACE_FLOOR:
        raise NumericError(f"trace {tr.real:.3e} below floor {TRACE_FLOOR:g}; degenerate state")
    return a / tr.real, float(tr.real)


def is_psd(m, tol: float = 1e-9) -> bool:
    return bool(np.min(eigh(m).eigenvalues) >= -tol)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, np.conj(psi))
