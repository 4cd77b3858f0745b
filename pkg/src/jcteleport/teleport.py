"""Two-qubit teleportation through the projected channel.

Two protocol variants are covered:

* ``"ftp"``: one shared copy of the channel. Bob's state is an X-shaped
  matrix with four coefficients.
* ``"stp"``: two shared copies. Bob's state is diagonal apart from one
  corner coherence, again with four coefficients.

Both closed forms are kept verbatim, including their known defects, and
then trace-normalized; the raw trace is kept alongside. For ``"ftp"`` there is
also a brute-force route that pushes the input through the Bell-measurement
outcome distribution and the Pauli correction channel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .channel import ChannelParams, alpha_set, channel_state
from .errors import NumericError, ValidationError

PROTOCOLS = ("ftp", "stp")
CONSTRUCTIONS = ("closed", "oracle")
CHANNEL_MODES = ("hermitian", "literal")
BELL_LABELS = ("0", "x", "y", "z")


@dataclass(frozen=True)
class InputState:
    """Angles of ``cos(theta)|00> + exp(-i phi/2) sin(theta)|11>``."""

    theta: float = math.pi / 4
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (0.0 <= theta <= math.pi):
            raise ValidationError(f"theta must lie in [0, pi], got {theta}")
        if not (0.0 <= phi <= 2 * math.pi):
            raise ValidationError(f"phi must lie in [0, 2pi], got {phi}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)


def state_vector(theta, phi) -> np.ndarray:
    """Unvalidated, broadcasting version of :func:`input_state_vector`."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast(theta, phi).shape
    psi = np.zeros(shape + (4,), dtype=complex)
    psi[..., 0] = np.cos(theta)
    psi[..., 3] = np.exp(-0.5j * phi) * np.sin(theta)
    return psi


def input_state_vector(s: InputState) -> np.ndarray:
    psi = state_vector(s.theta, s.phi)
    norm = np.vdot(psi, psi).real
    assert abs(norm - 1.0) <= 1e-14, norm
    return psi


def bell_projectors() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(E0, Ex, Ey, Ez)`` = projectors onto ``psi-, phi-, phi+, psi+``."""
    r = 1.0 / math.sqrt(2.0)
    psi_minus = np.array([0, r, -r, 0], dtype=complex)
    psi_plus = np.array([0, r, r, 0], dtype=complex)
    phi_minus = np.array([r, 0, 0, -r], dtype=complex)
    phi_plus = np.array([r, 0, 0, r], dtype=complex)
    return tuple(linalg.projector(v) for v in (psi_minus, phi_minus, phi_plus, psi_plus))


def qubit_embedding(rho_s) -> np.ndarray:
    # |n>,|n+1> -> field qubit |0>,|1>; |g>,|e> -> atom qubit |0>,|1>.
    # With field as the first factor the channel basis order is already
    # |00>,|01>,|10>,|11>, so the map is the identity on entries.
    return np.array(linalg.as_matrix(rho_s), copy=True)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint Bell-outcome probabilities ``p[i, j]``, ``i, j`` over ``0, x, y, z``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (4, 4):
            raise ValidationError(f"outcome table must be 4x4, got {p.shape}")
        if np.min(p) < -1e-14:
            raise ValidationError(f"negative outcome probability {np.min(p):.3e}")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError(f"outcome probabilities sum to {p.sum()!r}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "p", p)


def bell_marginals(rho_ac) -> np.ndarray:
    rho = linalg.as_matrix(rho_ac)
    return np.array([np.trace(e @ rho).real for e in bell_projectors()])


def outcome_distribution(rho_ac) -> OutcomeDistribution:
    m = bell_marginals(rho_ac)
    if np.min(m) < -1e-12:
        raise NumericError(f"negative Bell marginal {np.min(m):.3e}")
    m = np.clip(m, 0.0, None)
    return OutcomeDistribution(np.outer(m, m))


def apply_pauli_channel(rho_un, d: OutcomeDistribution, mode: str = "hermitian") -> np.ndarray:
    """Pauli correction channel weighted by the outcome table.

    ``"hermitian"`` conjugates by ``s_i (x) s_j`` on both sides. ``"literal"``
    keeps the swapped right-hand factor ``s_j (x) s_i``; that is not an
    adjoint pair for ``i != j`` and the result is returned as is.
    """
    if mode not in CHANNEL_MODES:
        raise ValidationError(f"mode must be one of {CHANNEL_MODES}, got {mode!r}")
    rho = linalg.as_matrix(rho_un)
    out = np.zeros((4, 4), dtype=complex)
    for i, si in enumerate(linalg.PAULI):
        for j, sj in enumerate(linalg.PAULI):
            w = d.p[i, j]
            if w == 0.0:
                continue
            left = np.kron(si, sj)
            right = left if mode == "hermitian" else np.kron(sj, si)
            out += w * (left @ rho @ right)
    return out


@dataclass(frozen=True)
class BobState:
    rho: np.ndarray
    raw_trace: float
    protocol: str
    construction: str


# ---- closed forms, vectorized over any broadcastable inputs ----

def ftp_coefficients(a1, a2, a3, a4, a5, theta, phi):
    c2 = np.cos(theta) ** 2
    s2 = np.sin(theta) ** 2
    b1 = (a1 + a5) ** 2 * s2 + (a2 + a4) ** 2 * c2
    b2 = (a3 + np.conj(a3)) ** 2 * np.cos(theta) * np.sin(theta) * np.exp(0.5j * phi)
    b3 = (a1 + a5) * (a2 + a4)
    b4 = (a2 + a5) ** 2 * c2 + (a1 + a4) ** 2 * s2
    return b1, b2, b3, b4


def ftp_matrix(b1, b2, b3, b4) -> np.ndarray:
    b2 = np.asarray(b2, dtype=complex)
    shape = np.broadcast(b1, b2, b3, b4).shape
    rho = np.zeros(shape + (4, 4), dtype=complex)
    rho[..., 0, 0] = b1
    rho[..., 0, 3] = b2
    rho[..., 3, 0] = np.conj(b2)
    rho[..., 1, 2] = b3
    rho[..., 2, 1] = np.conj(b3)
    rho[..., 3, 3] = b4
    return rho


def stp_coefficients(a1, a2, a3, a4, a5, theta, phi):
    c2 = np.cos(theta) ** 2
    s2 = np.sin(theta) ** 2
    g1 = c2 * a1**2 + s2 * a4**2
    g2 = c2 * a1 * a2 + s2 * a4 * a5
    g3 = c2 * a2**2 + s2 * a5**2
    g4 = np.cos(theta) * np.sin(theta) * np.exp(-0.5j * phi) * np.abs(a3) ** 2
    return g1, g2, g3, g4


def stp_matrix(g1, g2, g3, g4) -> np.ndarray:
    g4 = np.asarray(g4, dtype=complex)
    shape = np.broadcast(g1, g2, g3, g4).shape
    rho = np.zeros(shape + (4, 4), dtype=complex)
    rho[..., 0, 0] = g1
    rho[..., 1, 1] = g2
    rho[..., 2, 2] = g2
    rho[..., 3, 3] = g3
    rho[..., 0, 3] = g4
    rho[..., 3, 0] = np.conj(g4)
    return rho


def raw_bob_matrix(protocol: str, alphas, theta, phi) -> np.ndarray:
    """Un-normalized closed-form Bob state(s) for coefficient arrays ``alphas``."""
    if protocol == "ftp":
        return ftp_matrix(*ftp_coefficients(*alphas, theta, phi))
    if protocol == "stp":
        return stp_matrix(*stp_coefficients(*alphas, theta, phi))
    raise ValidationError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")


def raw_trace(protocol: str, alphas, theta, phi):
    rho = raw_bob_matrix(protocol, alphas, theta, phi)
    return np.real(np.trace(rho, axis1=-2, axis2=-1))


def fidelity_closed_ftp_arrays(a1, a2, a3, a4, a5, theta):
    c2 = np.cos(theta) ** 2
    s2 = np.sin(theta) ** 2
    return np.real(
        ((a1 + a5) ** 2 * s2 + (a2 + a4) ** 2 * c2) * c2
        + (a3 + np.conj(a3)) ** 2 * np.sin(2 * theta) ** 2 / 2
        + ((a2 + a5) ** 2 * c2 + (a1 + a4) ** 2 * s2) * s2
    )


def fidelity_closed_stp_arrays(a1, a2, a3, a4, a5, theta):
    c2 = np.cos(theta) ** 2
    s2 = np.sin(theta) ** 2
    return np.real(
        c2 * (c2 * a1**2 + s2 * a4**2)
        + s2 * (c2 * a2**2 + s2 * a5**2)
        + 4 * c2 * s2 * (a3**2 + np.conj(a3) ** 2)
    )


def overlap_fidelity_arrays(rho, theta, phi):
    """``<psi|rho|psi>`` for stacked states and matching angles."""
    psi = state_vector(theta, phi)
    return np.real(np.einsum("...i,...ij,...j->...", np.conj(psi), rho, psi))


# ---- scalar API ----

def _alphas(p: ChannelParams):
    return alpha_set(p).as_tuple()


def _closed_bob_state(protocol: str, p: ChannelParams, s: InputState) -> BobState:
    raw = raw_bob_matrix(protocol, _alphas(p), s.theta, s.phi)
    rho, tr = linalg.normalize_trace(raw)
    return BobState(rho=rho, raw_trace=tr, protocol=protocol, construction="closed")


def ftp_oracle_state(p: ChannelParams, s: InputState, mode: str = "hermitian") -> np.ndarray:
    """Bob's state from the explicit measurement-and-correction channel (not normalized)."""
    rho_ac = qubit_embedding(channel_state(p))
    dist = outcome_distribution(rho_ac)
    rho_un = linalg.projector(input_state_vector(s))
    return apply_pauli_channel(rho_un, dist, mode)


def bob_state_ftp(p: ChannelParams, s: InputState, construction: str = "closed") -> BobState:
    if construction == "closed":
        return _closed_bob_state("ftp", p, s)
    if construction == "oracle":
        rho, tr = linalg.normalize_trace(ftp_oracle_state(p, s, "hermitian"))
        return BobState(rho=rho, raw_trace=tr, protocol="ftp", construction="oracle")
    raise ValidationError(f"construction must be one of {CONSTRUCTIONS}, got {construction!r}")


def bob_state_stp(p: ChannelParams, s: InputState, construction: str = "closed") -> BobState:
    if construction == "oracle":
        raise ValidationError("no channel oracle exists for the two-copy protocol")
    if construction != "closed":
        raise ValidationError(f"construction must be one of {CONSTRUCTIONS}, got {construction!r}")
    return _closed_bob_state("stp", p, s)


def bob_state(protocol: str, p: ChannelParams, s: InputState, construction: str = "closed") -> BobState:
    if protocol == "ftp":
        return bob_state_ftp(p, s, construction)
    if protocol == "stp":
        return bob_state_stp(p, s, construction)
    raise ValidationError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")


def fidelity_closed_ftp(p: ChannelParams, s: InputState) -> float:
    """Closed-form single-copy fidelity, before any renormalization."""
    return float(fidelity_closed_ftp_arrays(*_alphas(p), s.theta))


def fidelity_closed_stp(p: ChannelParams, s: InputState) -> float:
    """Closed-form two-copy fidelity, before any renormalization, with its ``8 c^2 s^2 Re(a3^2)`` cross term."""
    return float(fidelity_closed_stp_arrays(*_alphas(p), s.theta))


def fidelity_overlap(rho, s: InputState) -> float:
    rho = linalg.as_matrix(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-10:
        raise ValidationError(f"fidelity_overlap needs a unit-trace state, trace = {tr!r}")
    return float(linalg.expectation(input_state_vector(s), rho).real)
