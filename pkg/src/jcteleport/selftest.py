"""Built-in cross-check suite behind ``jcteleport selftest``.

Every check returns a :class:`Check` with the largest residual it saw.
Channel coefficients are always fetched through ``channel.alpha_arrays``
so a patched channel (see the mutation test) is seen by all checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel, fisher, linalg, teleport

SEED = 20240611

# Reference values at n=2, nbar=4, delta=0.3, tau=1.7 from a 50-digit evaluation.
REF_POINT = (2, 4.0, 0.3, 1.7)
REF_ALPHAS = (
    0.076585542038718016584,
    0.39186090470447452564,
    -0.027725873803521119097 - 0.052786115777189484636j,
    0.0090723469841747569155,
    0.52248120627263270086,
)
REF_COHERENCE = 0.001484877183737352818 + 0.00030099950664141640219j  # theta=0.7, phi=0.4


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name:<32s} max residual {self.residual:.3e}"
        return text + (f"  ({self.note})" if self.note else "")


def random_params(rng, size, nbar_range=(0.5, 1000.0), tau_max=50.0):
    """Draws of ``(n, nbar, delta, tau)`` over the standard validation box."""
    n = rng.integers(1, 6, size=size)
    nbar = rng.uniform(*nbar_range, size=size)
    delta = rng.uniform(0.0, 2.0, size=size)
    tau = rng.uniform(0.0, tau_max, size=size)
    return list(zip(n.tolist(), nbar.tolist(), delta.tolist(), tau.tolist()))


def _alphas(n, nbar, delta, tau):
    return channel.alpha_arrays(n, nbar, delta, tau)[:5]


def check_alpha_trace(rng) -> Check:
    worst = 0.0
    for pt in random_params(rng, 1000):
        a1, a2, _, a4, a5 = _alphas(*pt)
        worst = max(worst, abs(a1 + a2 + a4 + a5 - 1.0))
    return Check("alpha trace identity", worst <= 1e-12, worst)


def check_alpha_pure_block(rng) -> Check:
    worst = 0.0
    for pt in random_params(rng, 1000):
        _, a2, a3, a4, _ = _alphas(*pt)
        worst = max(worst, abs(abs(a3) ** 2 - a2 * a4))
    return Check("alpha pure-block identity", worst <= 1e-12, worst)


def check_channel_validity(rng) -> Check:
    pts = random_params(rng, 200)
    rhos = np.array([channel.channel_matrix(*_alphas(*pt)) for pt in pts])
    herm = linalg.hermiticity_error(rhos)
    tr = np.max(np.abs(np.trace(rhos, axis1=-2, axis2=-1) - 1.0))
    mineig = float(np.min(linalg.eigh(rhos).eigenvalues))
    worst = max(herm, tr, max(0.0, -mineig))
    ok = herm <= 1e-12 and tr <= 1e-12 and mineig >= -1e-10
    return Check("channel state validity", ok, worst, f"min eigenvalue {mineig:.2e}")


def check_bell(rng) -> Check:
    es = teleport.bell_projectors()
    worst = float(np.max(np.abs(sum(es) - np.eye(4))))
    for i, ei in enumerate(es):
        for j, ej in enumerate(es):
            target = ei if i == j else np.zeros((4, 4))
            worst = max(worst, float(np.max(np.abs(ei @ ej - target))))
    return Check("Bell completeness/orthogonality", worst <= 1e-15, worst)


def check_outcome_normalization(rng) -> Check:
    worst = 0.0
    for pt in random_params(rng, 200):
        rho = teleport.qubit_embedding(channel.channel_matrix(*_alphas(*pt)))
        m = teleport.bell_marginals(rho)
        worst = max(worst, abs(np.outer(m, m).sum() - 1.0), max(0.0, -float(m.min())))
    return Check("outcome distribution sums to 1", worst <= 1e-12, worst)


def check_pauli_channel(rng) -> Check:
    worst = 0.0
    mineig = 1.0
    for _ in range(100):
        p = rng.random((4, 4))
        d = teleport.OutcomeDistribution(p / p.sum())
        x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = x @ linalg.dagger(x)
        rho /= np.trace(rho).real
        out = teleport.apply_pauli_channel(rho, d, "hermitian")
        worst = max(worst, linalg.hermiticity_error(out), abs(np.trace(out).real - 1.0))
        mineig = min(mineig, float(linalg.eigh(out).eigenvalues[0]))
    ok = worst <= 1e-12 and mineig >= -1e-9
    return Check("Pauli channel output valid", ok, max(worst, max(0.0, -mineig)))


def check_single_copy_consistency(rng) -> Check:
    worst = 0.0
    for pt in random_params(rng, 500):
        theta = rng.uniform(0.0, math.pi)
        phi = rng.uniform(0.0, 2 * math.pi)
        alphas = _alphas(*pt)
        raw = teleport.raw_bob_matrix("ftp", alphas, theta, phi)
        psi = teleport.state_vector(theta, phi)
        overlap = np.vdot(psi, raw @ psi).real
        closed = float(teleport.fidelity_closed_ftp_arrays(*alphas, theta))
        worst = max(worst, abs(closed - overlap))
    return Check("single-copy fidelity consistency", worst <= 1e-12, worst)


def check_coherence_resonance(rng) -> Check:
    tau = np.linspace(0.0, 30.0, 601)
    worst = 0.0
    for n, nbar in ((1, 2.0), (2, 4.0), (3, 30.0)):
        alphas = _alphas(n, nbar, 0.0, tau)
        b2 = teleport.ftp_coefficients(*alphas, 0.7, 0.4)[1]
        worst = max(worst, float(np.max(np.abs(b2))))
    return Check("single-copy coherence vanishes at resonance", worst <= 1e-15, worst)


def check_detuned_reference(rng) -> Check:
    alphas = _alphas(*REF_POINT)
    worst = max(abs(complex(a) - r) for a, r in zip(alphas, REF_ALPHAS))
    b2 = complex(teleport.ftp_coefficients(*alphas, 0.7, 0.4)[1])
    worst_b2 = abs(b2 - REF_COHERENCE)
    ok = worst <= 1e-13 and worst_b2 <= 1e-15
    return Check(
        "detuned coefficient reference", ok, max(worst, worst_b2),
        "n=2 nbar=4 delta=0.3 tau=1.7",
    )


def random_family_pair(rng, min_eig=0.02):
    """A full-rank 4x4 state with well separated eigenvalues and a Hermitian traceless derivative.

    Built as ``U(xi) diag(w(xi)) U(xi)^dagger`` with ``U(xi) = exp(-i xi H)``,
    differentiated exactly at ``xi = 0``.
    """
    while True:
        w = rng.dirichlet(np.ones(4))
        w = min_eig + (1 - 4 * min_eig) * w
        if np.min(np.diff(np.sort(w))) > 1e-3:
            break
    dw = rng.normal(size=4)
    dw -= dw.mean()
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = 0.5 * (x + linalg.dagger(x))
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    base = np.diag(w).astype(complex)
    rho = q @ base @ linalg.dagger(q)
    drho = q @ np.diag(dw) @ linalg.dagger(q) - 1j * (h @ rho - rho @ h)
    return rho, linalg.symmetrize(drho)


def check_qfi_triangle(rng) -> Check:
    pairs = [random_family_pair(rng) for _ in range(500)]
    rho = np.array([p[0] for p in pairs])
    drho = np.array([p[1] for p in pairs])
    m = fisher.qfi_matrix_form_batch(rho, drho)
    s = fisher.qfi_sld_batch(rho, drho)
    e = fisher.qfi_spectral_batch(rho, drho)
    worst = float(max(np.max(np.abs(m - s)), np.max(np.abs(m - e)), np.max(np.abs(s - e))))
    return Check("QFI engine agreement", worst <= 1e-8, worst)


def check_qfi_pure(rng) -> Check:
    worst = 0.0
    for theta in np.linspace(0.0, math.pi, 25):
        for phi in (0.0, 1.0, 3.0):
            psi = teleport.state_vector(theta, phi)
            dpsi = np.array([-math.sin(theta), 0, 0, np.exp(-0.5j * phi) * math.cos(theta)])
            rho = linalg.projector(psi)
            drho = np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj())
            for engine in ("matrix", "sld"):
                worst = max(worst, abs(fisher.qfi(rho, drho, engine).value - 4.0))
    return Check("pure-state QFI equals 4", worst <= 1e-9, worst)


def check_derivatives(rng) -> Check:
    worst = 0.0
    for protocol in ("ftp", "stp"):
        for pt in random_params(rng, 50, nbar_range=(0.5, 20.0)):
            theta = rng.uniform(0.05, math.pi - 0.05)
            phi = rng.uniform(0.0, 2 * math.pi)
            alphas = _alphas(*pt)
            _, exact = fisher.bob_state_and_derivative(protocol, alphas, theta, phi)
            _, approx = fisher.teleported_state_and_derivative(protocol, alphas, theta, phi, "fd")
            worst = max(worst, float(np.max(np.abs(exact - approx))))
    return Check("analytic vs finite-difference", worst <= 1e-6, worst)


def check_phi_independence(rng) -> Check:
    worst = 0.0
    for n, nbar, tau, theta in ((2, 2.0, 1.1, 0.7), (2, 6.0, 7.3, 1.2), (1, 4.0, 3.3, 2.0)):
        alphas = _alphas(n, nbar, 0.0, tau)
        fids, qfis = [], []
        for phi in (0.0, math.pi / 3, math.pi):
            raw = teleport.raw_bob_matrix("ftp", alphas, theta, phi)
            tr = np.trace(raw).real
            fids.append(float(teleport.overlap_fidelity_arrays(raw / tr, theta, phi)))
            rho, drho = fisher.bob_state_and_derivative("ftp", alphas, theta, phi)
            qfis.append(fisher.qfi_matrix_form(rho, drho).value)
        worst = max(worst, max(fids) - min(fids), max(qfis) - min(qfis))
    return Check("phi independence at resonance", worst <= 1e-12, worst)


# fixed (n, nbar, delta, tau, theta, phi) points for the two-copy comparison
TWO_COPY_GRID = tuple(
    (n, nbar, delta, tau, theta, phi)
    for (n, nbar, delta, tau), (theta, phi) in zip(
        [(1, 2.0, 0.0, 1.0), (2, 2.0, 0.0, 3.5), (2, 4.0, 0.1, 7.0), (2, 4.0, 0.3, 1.7),
         (2, 6.0, 0.5, 12.0), (3, 10.0, 0.0, 4.2), (3, 10.0, 1.0, 9.9), (4, 20.0, 0.2, 15.0),
         (5, 1.5, 2.0, 0.4), (2, 100.0, 0.05, 18.0)],
        [(0.3, 0.0), (math.pi / 4, 0.0), (math.pi / 4, 1.0), (0.7, 0.4), (1.0, 2.0),
         (math.pi / 2, 0.0), (2.0, 3.0), (2.5, 5.0), (1.3, 0.7), (0.9, 6.0)],
    )
)


def two_copy_rows():
    """``(closed_form, overlap)`` two-copy fidelities on :data:`TWO_COPY_GRID`."""
    rows = []
    for n, nbar, delta, tau, theta, phi in TWO_COPY_GRID:
        alphas = _alphas(n, nbar, delta, tau)
        closed = float(teleport.fidelity_closed_stp_arrays(*alphas, theta))
        raw = teleport.raw_bob_matrix("stp", alphas, theta, phi)
        overlap = float(teleport.overlap_fidelity_arrays(raw / np.trace(raw).real, theta, phi))
        rows.append((closed, overlap))
    return rows


def check_two_copy_report(rng) -> Check:
    rows = two_copy_rows()
    finite = all(math.isfinite(a) and math.isfinite(b) for a, b in rows)
    gap = max(abs(a - b) for a, b in rows) if finite else math.inf
    return Check(
        "two-copy closed form vs overlap", finite and len(rows) == 10, gap,
        f"reported only, agreement not required; {len(rows)} fixed points",
    )


def check_fidelity_range(rng) -> Check:
    """Overlap fidelity of every valid Bob state stays in [0, 1].

    The single-copy closed form is only a valid state at resonance; off
    resonance its overlap can leave [0, 1] and that excursion is reported.
    """
    tau = np.linspace(0.0, 20.0, 401)
    worst = 0.0
    excursion = 0.0
    for protocol in ("ftp", "stp"):
        for nbar in (2.0, 4.0, 100.0):
            for delta in (0.0, 0.3):
                for theta in (0.0, math.pi / 4, math.pi / 2, 1.1):
                    alphas = _alphas(2, nbar, delta, tau)
                    raw = teleport.raw_bob_matrix(protocol, alphas, theta, 0.3)
                    tr = np.real(np.trace(raw, axis1=-2, axis2=-1))[:, None, None]
                    f = teleport.overlap_fidelity_arrays(raw / tr, theta, 0.3)
                    out = max(float(np.max(-f)), float(np.max(f - 1.0)), 0.0)
                    if protocol == "ftp" and delta != 0.0:
                        excursion = max(excursion, out)
                    else:
                        worst = max(worst, out)
    for pt in random_params(rng, 30, nbar_range=(0.5, 20.0), tau_max=20.0):
        s = teleport.InputState(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2 * math.pi))
        p = channel.ChannelParams(*pt)
        f = teleport.fidelity_overlap(teleport.bob_state_ftp(p, s, "oracle").rho, s)
        worst = max(worst, -f, f - 1.0, 0.0)
    return Check(
        "normalized fidelity in [0, 1]", worst <= 1e-10, worst,
        f"single-copy closed form off resonance leaves [0, 1] by up to {excursion:.3e}",
    )


CHECKS = (
    check_alpha_trace,
    check_alpha_pure_block,
    check_channel_validity,
    check_bell,
    check_outcome_normalization,
    check_pauli_channel,
    check_single_copy_consistency,
    check_coherence_resonance,
    check_detuned_reference,
    check_qfi_triangle,
    check_qfi_pure,
    check_derivatives,
    check_phi_independence,
    check_two_copy_report,
    check_fidelity_range,
)


def self_test(seed: int = SEED) -> list[Check]:
    results = []
    for fn in CHECKS:
        rng = np.random.default_rng([seed, CHECKS.index(fn)])
        try:
            results.append(fn(rng))
        except Exception as err:  # a crashing check is a failed check
            results.append(Check(fn.__name__, False, math.inf, f"raised {err!r}"))
    return results


def format_report(results) -> str:
    lines = [c.line() for c in results]
    failed = sum(not c.passed for c in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines)
