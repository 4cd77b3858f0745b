"""Projected atom-field channel of the resonant/detuned Jaynes-Cummings model.

The atom starts excited and the field in a coherent state. The evolved pure
state is projected onto the four-dimensional block spanned by
``|n,g>, |n,e>, |n+1,g>, |n+1,e>`` (in that order), giving a density matrix
fixed by five coefficients ``a1..a5`` and their normalization.

All functions accept numpy arrays for ``tau`` (and broadcast), which is
how the sweep engine evaluates whole time grids in one call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError

NORM_FLOOR = 1e-300


@dataclass(frozen=True)
class ChannelParams:
    """Fock index ``n``, mean photon number ``nbar``, detuning ``delta`` and time ``tau``."""

    n: int = 2
    nbar: float = 2.0
    delta: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise ValidationError(f"n must be a nonnegative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("nbar", "delta", "tau"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.nbar < 0:
            raise ValidationError(f"nbar must be >= 0, got {self.nbar}")
        if self.tau < 0:
            raise ValidationError(f"tau must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class AlphaSet:
    """Channel coefficients. ``norm`` is N itself; it underflows to 0.0 for
    very bright fields, so ``log_norm`` is the value to trust there."""

    a1: float
    a2: float
    a3: complex
    a4: float
    a5: float
    norm: float
    log_norm: float

    def as_tuple(self):
        return self.a1, self.a2, self.a3, self.a4, self.a5


def log_coherent_weight_sq(nbar: float, k: int) -> float:
    """``ln P_k^2`` with ``P_k^2 = exp(-nbar) nbar^k / k!``; ``-inf`` when P_k = 0."""
    if nbar < 0:
        raise ValidationError(f"nbar must be >= 0, got {nbar}")
    if k < 0:
        return -math.inf
    if nbar == 0:
        return 0.0 if k == 0 else -math.inf
    return -nbar + k * math.log(nbar) - math.lgamma(k + 1)


def coherent_weight(nbar: float, k: int) -> float:
    """Coherent-state amplitude ``P_k = exp(-nbar/2) sqrt(nbar^k / k!)``."""
    if nbar < 0:
        raise ValidationError(f"nbar must be >= 0, got {nbar}")
    if k < 0 or int(k) != k:
        raise ValidationError(f"k must be a nonnegative integer, got {k!r}")
    return math.exp(0.5 * log_coherent_weight_sq(nbar, int(k)))


def rabi(delta, x):
    """Generalized Rabi frequency ``sqrt(delta^2 + x)``."""
    if np.any(np.asarray(x) < 0):
        raise ValidationError("rabi: x must be >= 0")
    return np.sqrt(np.square(delta) + x)


def alpha_arrays(n: int, nbar: float, delta: float, tau):
    """Vectorized core of :func:`alpha_set`.

    Returns ``(a1, a2, a3, a4, a5, log_norm)`` with the same shape as
    ``tau``. The three Poisson weights are rescaled by their largest
    member before exponentiation; every coefficient is a ratio, so the
    common factor cancels and nbar = 1000 stays representable.
    """
    tau = np.asarray(tau, dtype=float)
    logw = [log_coherent_weight_sq(nbar, k) for k in (n - 1, n, n + 1)]
    shift = max(logw)
    if shift == -math.inf:
        raise NumericError("all coherent weights vanish; normalization underflows")
    w_lo, w_n, w_hi = (math.exp(lw - shift) if lw > -math.inf else 0.0 for lw in logw)

    d2 = delta * delta
    om_hi = math.sqrt(d2 + n + 1)
    s_hi = np.sin(tau * om_hi)
    c_hi = np.cos(tau * om_hi)
    if n >= 1:
        s_lo = np.sin(tau * math.sqrt(d2 + n))
        lower = w_lo * n / (d2 + n) * s_lo**2
    else:
        lower = np.zeros_like(tau)

    stay = c_hi**2 + d2 / (d2 + n + 1) * s_hi**2
    norm = w_n + lower + w_hi * stay
    if np.any(norm < NORM_FLOOR):
        raise NumericError(f"normalization underflow (scaled N = {np.min(norm):.3e})")

    a1 = lower / norm
    a2 = w_n * stay / norm
    a4 = w_n * (n + 1) / (d2 + n + 1) * s_hi**2 / norm
    a5 = w_hi * stay / norm
    a3 = (
        1j * w_n * math.sqrt(n + 1) * np.exp(-1j * delta * tau) / (norm * om_hi)
        * s_hi * (c_hi - 1j * delta * s_hi / om_hi)
    )
    return a1, a2, a3, a4, a5, np.log(norm) + shift


def alpha_set(p: ChannelParams) -> AlphaSet:
    a1, a2, a3, a4, a5, log_norm = alpha_arrays(p.n, p.nbar, p.delta, p.tau)
    return AlphaSet(
        a1=float(a1), a2=float(a2), a3=complex(a3), a4=float(a4), a5=float(a5),
        norm=math.exp(float(log_norm)), log_norm=float(log_norm),
    )


def channel_matrix(a1, a2, a3, a4, a5) -> np.ndarray:
    """Assemble the 4x4 channel state(s) from coefficient arrays."""
    a3 = np.asarray(a3, dtype=complex)
    rho = np.zeros(a3.shape + (4, 4), dtype=complex)
    rho[..., 0, 0] = a1
    rho[..., 1, 1] = a2
    rho[..., 2, 2] = a4
    rho[..., 3, 3] = a5
    rho[..., 1, 2] = a3
    rho[..., 2, 1] = np.conj(a3)
    return rho


def channel_state(p: ChannelParams) -> np.ndarray:
    """Density matrix of the projected channel in the ``[|n,g>, |n,e>, |n+1,g>, |n+1,e>]`` basis."""
    a = alpha_set(p)
    return channel_matrix(a.a1, a.a2, a.a3, a.a4, a.a5)
