"""Acceptance suite: one PASS/FAIL line per criterion, printed as it runs.

Run on its own with ``pytest tests/test_acceptance.py -v -s``; the lines
are also shown without ``-s`` because printing bypasses capture.
"""
import math
import time

import numpy as np

from jcteleport import channel, fisher, linalg, selftest, sweeps, teleport
from jcteleport.channel import ChannelParams
from jcteleport.teleport import InputState

SEED = 20240611


def report(capsys, number, title, ok, detail):
    line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def _draws(seed, size):
    return selftest.random_params(np.random.default_rng(seed), size)


def test_01_alpha_identities(capsys):
    pts = _draws([SEED, 1], 1000)
    t0 = time.perf_counter()
    trace_err = 0.0
    block_err = 0.0
    for pt in pts:
        a1, a2, a3, a4, a5, _ = channel.alpha_arrays(*pt)
        trace_err = max(trace_err, abs(a1 + a2 + a4 + a5 - 1.0))
        block_err = max(block_err, abs(abs(a3) ** 2 - a2 * a4))
    elapsed = time.perf_counter() - t0
    ok = trace_err <= 1e-12 and block_err <= 1e-12 and elapsed < 1.0
    report(capsys, 1, "alpha identities", ok,
           f"trace {trace_err:.2e}, |a3|^2-a2a4 {block_err:.2e} (tol 1e-12), {elapsed:.3f} s (< 1 s)")


def test_02_channel_validity(capsys):
    pts = _draws([SEED, 1], 1000)
    rhos = np.array([channel.channel_state(ChannelParams(*pt)) for pt in pts])
    herm = linalg.hermiticity_error(rhos)
    tr = float(np.max(np.abs(np.trace(rhos, axis1=-2, axis2=-1) - 1.0)))
    mineig = float(np.min(linalg.eigh(rhos).eigenvalues))
    ok = herm <= 1e-12 and tr <= 1e-12 and mineig >= -1e-10
    report(capsys, 2, "channel validity", ok,
           f"hermiticity {herm:.2e}, trace {tr:.2e}, min eigenvalue {mineig:.2e} (>= -1e-10)")


def test_03_single_copy_formula_consistency(capsys):
    rng = np.random.default_rng([SEED, 3])
    worst = 0.0
    for pt in selftest.random_params(rng, 500):
        s = InputState(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        p = ChannelParams(*pt)
        raw = teleport.raw_bob_matrix("ftp", channel.alpha_set(p).as_tuple(), s.theta, s.phi)
        psi = teleport.input_state_vector(s)
        overlap = np.vdot(psi, raw @ psi).real
        worst = max(worst, abs(teleport.fidelity_closed_ftp(p, s) - overlap))
    report(capsys, 3, "closed-form fidelity vs raw overlap", worst <= 1e-12,
           f"max |diff| {worst:.2e} over 500 points (tol 1e-12)")


def _pure_family_error():
    rng = np.random.default_rng([SEED, 4, 1])
    worst_generic = 0.0
    for _ in range(200):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        dpsi = rng.normal(size=4) + 1j * rng.normal(size=4)
        # a normalized family keeps Re<psi|dpsi> = 0
        dpsi -= np.vdot(psi, dpsi).real * psi
        rho = linalg.projector(psi)
        drho = np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj())
        expected = 4 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(psi, dpsi)) ** 2)
        for engine in ("matrix", "sld"):
            got = fisher.qfi(rho, drho, engine).value
            worst_generic = max(worst_generic, abs(got - expected) / max(1.0, expected))
    worst_four = 0.0
    for theta in np.linspace(0, math.pi, 31):
        for phi in (0.0, 1.0, 4.0):
            psi = teleport.state_vector(theta, phi)
            dpsi = np.array([-math.sin(theta), 0, 0, np.exp(-0.5j * phi) * math.cos(theta)])
            drho = np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj())
            for engine in ("matrix", "sld"):
                worst_four = max(worst_four, abs(fisher.qfi(linalg.projector(psi), drho, engine).value - 4))
    return worst_generic, worst_four


def test_04_qfi_engine_triangle(capsys):
    rng = np.random.default_rng([SEED, 4])
    pairs = [selftest.random_family_pair(rng) for _ in range(500)]
    rho = np.array([p[0] for p in pairs])
    drho = np.array([p[1] for p in pairs])
    m = fisher.qfi_batch(rho, drho, "matrix")
    s = fisher.qfi_batch(rho, drho, "sld")
    e = fisher.qfi_batch(rho, drho, "spectral")
    tri = float(max(np.max(np.abs(m - s)), np.max(np.abs(m - e)), np.max(np.abs(s - e))))
    generic, four = _pure_family_error()
    ok = tri <= 1e-8 and generic <= 1e-9 and four <= 1e-9
    report(capsys, 4, "QFI engine triangle", ok,
           f"pairwise {tri:.2e} (tol 1e-8), pure families {generic:.2e}, F=4 family {four:.2e} (tol 1e-9)")


def test_05_derivative_cross_check(capsys):
    rng = np.random.default_rng([SEED, 5])
    worst = 0.0
    for pt in selftest.random_params(rng, 100, nbar_range=(0.5, 50.0), tau_max=20.0):
        p = ChannelParams(*pt)
        theta = rng.uniform(0.0, math.pi)
        phi = rng.uniform(0.0, 2 * math.pi)
        for protocol in ("ftp", "stp"):
            a = fisher.rho_derivative_analytic(protocol, p, InputState(theta, phi))
            f = fisher.rho_derivative_fd(fisher.bob_family(protocol, p, phi), theta, h=1e-5, richardson=True)
            worst = max(worst, float(np.max(np.abs(a - f))))
    report(capsys, 5, "analytic vs finite-difference derivative", worst <= 1e-6,
           f"max entrywise {worst:.2e} over 100 points x 2 protocols (tol 1e-6)")


def test_06_resonance_phi_independence(capsys):
    worst = 0.0
    for n, nbar, tau in ((1, 2.0, 0.7), (2, 4.0, 3.1), (3, 30.0, 11.0), (2, 1000.0, 5.5)):
        p = ChannelParams(n, nbar, 0.0, tau)
        for theta in (0.3, math.pi / 4, 1.2):
            vals = []
            for phi in (0.0, math.pi / 3, math.pi):
                s = InputState(theta, phi)
                vals.append((
                    teleport.fidelity_closed_ftp(p, s),
                    teleport.fidelity_overlap(teleport.bob_state_ftp(p, s).rho, s),
                    fisher.teleported_qfi("ftp", p, s),
                ))
            vals = np.array(vals)
            worst = max(worst, float(np.max(np.abs(vals - vals[0]))))
    report(capsys, 6, "phi independence at resonance", worst <= 1e-12,
           f"max spread {worst:.2e} across phi in {{0, pi/3, pi}} (tol 1e-12)")


def _local_extrema(y):
    d = np.diff(y)
    d = d[d != 0]
    sign = np.sign(d)
    turns = sign[1:] != sign[:-1]
    maxima = int(np.sum(turns & (sign[:-1] > 0)))
    minima = int(np.sum(turns & (sign[:-1] < 0)))
    return maxima, minima


def _max_norm_fidelity(nbar):
    spec = sweeps.SweepSpec(protocol="ftp", nbar=(nbar,), delta=(0.0,), n=2, theta=math.pi / 2)
    res = sweeps.run_sweep(spec)
    return float(np.max(res.column(res.series_columns("norm")[0])))


def test_07_oscillation_structure(capsys):
    t0 = time.perf_counter()
    spec = sweeps.preset("fig1b", nbar=(2.0,)).spec
    res = sweeps.run_sweep(spec)
    y = res.column("norm[nbar=2]")
    elapsed = time.perf_counter() - t0
    maxima, minima = _local_extrema(y)
    ok = maxima >= 3 and minima >= 3 and y.min() < 0.5 < y.max() and elapsed < 5.0
    report(capsys, 7, "oscillation structure (fig1b, nbar=2)", ok,
           f"{maxima} maxima, {minima} minima, range [{y.min():.4f}, {y.max():.4f}], {elapsed:.3f} s (< 5 s)")


def test_08_threshold_regime(capsys):
    big = _max_norm_fidelity(1000.0)
    small = _max_norm_fidelity(2.0)
    ok = big >= 0.95 and small < big
    report(capsys, 8, "threshold regime", ok,
           f"max fidelity nbar=1000 {big:.6f} (>= 0.95), nbar=2 {small:.6f} (strictly smaller)")


def test_09_mean_photon_ordering(capsys):
    res = sweeps.run_sweep(sweeps.preset("fig1b").spec)
    peaks = [float(np.max(res.column(c))) for c in res.series_columns("norm")]
    ok = all(b >= a - 1e-6 for a, b in zip(peaks, peaks[1:]))
    report(capsys, 9, "mean-photon ordering", ok,
           "max fidelity nbar=2,4,6: " + ", ".join(f"{x:.6f}" for x in peaks) + " (nondecreasing, tol 1e-6)")


def test_10_two_copy_formula_report(capsys):
    rows = selftest.two_copy_rows()
    check = {c.name: c for c in selftest.self_test()}["two-copy closed form vs overlap"]
    finite = len(rows) == 10 and all(math.isfinite(a) and math.isfinite(b) for a, b in rows)
    ok = finite and check.passed and check.residual == max(abs(a - b) for a, b in rows)
    report(capsys, 10, "two-copy closed form vs overlap", ok,
           f"10 fixed points, all finite; max gap {check.residual:.3f} reported in self-test, not asserted")


def test_11_figure_presets(capsys, tmp_path):
    t0 = time.perf_counter()
    problems = []
    for fid in sorted(sweeps.PRESETS):
        result, csv_path, script = sweeps.run_figure(fid, tmp_path)
        cols, rows = sweeps.read_csv(csv_path)
        expected_width = 1 + len(result.series) * (1 if result.quantity == "qfi_theta" else 2)
        if cols[0] != "tau" or len(cols) != expected_width or rows.shape != (2000, expected_width):
            problems.append(f"{fid}: bad schema {cols}")
        if not np.all(np.isfinite(rows)):
            problems.append(f"{fid}: non-finite values")
        if not script.exists():
            problems.append(f"{fid}: no plot script")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 60.0
    report(capsys, 11, "figure presets fig1a..fig10c", ok,
           f"{len(sweeps.PRESETS)} figures in {elapsed:.2f} s (< 60 s)" + ("; " + "; ".join(problems) if problems else ""))
