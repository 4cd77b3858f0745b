import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jcteleport import fisher, linalg
from jcteleport.channel import ChannelParams, alpha_arrays
from jcteleport.errors import NumericError, ValidationError
from jcteleport.selftest import random_family_pair
from jcteleport.teleport import InputState, bob_state_stp, raw_bob_matrix, state_vector

channel_params = st.builds(
    ChannelParams,
    n=st.integers(1, 4),
    nbar=st.floats(0.5, 50.0),
    delta=st.floats(0.0, 1.0),
    tau=st.floats(0.1, 20.0),
)


def _pure_pair(theta, phi):
    psi = state_vector(theta, phi)
    dpsi = np.array([-math.sin(theta), 0, 0, np.exp(-0.5j * phi) * math.cos(theta)])
    return linalg.projector(psi), np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj())


def test_fd_constant_family_is_zero():
    f = fisher.DensityFamily(lambda xi: np.eye(4) / 4)
    assert np.array_equal(fisher.rho_derivative_fd(f, 0.3), np.zeros((4, 4)))


def test_fd_diagonal_family():
    f = fisher.DensityFamily(lambda t: np.diag([math.cos(t) ** 2, math.sin(t) ** 2, 0, 0]))
    d = fisher.rho_derivative_fd(f, math.pi / 4, richardson=True)
    assert np.allclose(d, np.diag([-1, 1, 0, 0]), atol=1e-9)


def test_fd_respects_domain():
    f = fisher.DensityFamily(lambda t: np.eye(4) / 4, (0.0, 1.0))
    with pytest.raises(ValidationError):
        fisher.rho_derivative_fd(f, 0.0)
    with pytest.raises(ValidationError):
        f(1.5)


def test_analytic_derivative_is_traceless():
    p = ChannelParams(2, 4.0, 0.3, 1.3)
    for protocol in ("ftp", "stp"):
        d = fisher.rho_derivative_analytic(protocol, p, InputState(0.7, 0.4))
        assert abs(np.trace(d)) <= 1e-13
        assert linalg.is_hermitian(d, 1e-14)


def test_analytic_ftp_coherence_slope_at_theta_zero():
    p = ChannelParams(2, 4.0, 0.3, 1.3)
    alphas = alpha_arrays(p.n, p.nbar, p.delta, p.tau)[:5]
    a3 = complex(alphas[2])
    _, draw = fisher.bob_state_and_derivative("ftp", alphas, 0.0, 0.0, normalized=False)
    assert draw[0, 3] == pytest.approx((a3 + a3.conjugate()) ** 2, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(channel_params, st.floats(0.05, math.pi - 0.05), st.floats(0.0, 2 * math.pi), st.sampled_from(["ftp", "stp"]))
def test_analytic_matches_finite_difference(p, theta, phi, protocol):
    s = InputState(theta, phi)
    analytic = fisher.rho_derivative_analytic(protocol, p, s)
    fd = fisher.rho_derivative_fd(fisher.bob_family(protocol, p, phi), theta, richardson=True)
    assert np.max(np.abs(analytic - fd)) <= 1e-7


def test_fd_works_at_domain_edges():
    p = ChannelParams(2, 4.0, 0.3, 1.3)
    for theta in (0.0, math.pi):
        analytic = fisher.rho_derivative_analytic("stp", p, InputState(theta, 0.0))
        fd = fisher.rho_derivative_fd(fisher.bob_family("stp", p, 0.0), theta, richardson=True)
        assert np.max(np.abs(analytic - fd)) <= 1e-7


@pytest.mark.parametrize("engine", ["matrix", "sld"])
@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 4, 1.2, math.pi / 2])
def test_pure_state_qfi_is_four(engine, theta):
    rho, drho = _pure_pair(theta, 0.6)
    assert fisher.qfi(rho, drho, engine).value == pytest.approx(4.0, abs=1e-9)


def test_pure_state_phase_qfi():
    theta = math.pi / 4
    psi = state_vector(theta, 0.3)
    dpsi = np.array([0, 0, 0, -0.5j * np.exp(-0.15j) * math.sin(theta)])
    drho = np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj())
    val = fisher.qfi(linalg.projector(psi), drho).value
    assert val == pytest.approx(math.sin(2 * theta) ** 2 / 4, abs=1e-12)


def test_maximally_mixed_qfi():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    d = 0.01 * (x + linalg.dagger(x))
    d -= np.trace(d) / 4 * np.eye(4)
    for engine in fisher.ENGINES[:1] + ("sld",):
        assert fisher.qfi(np.eye(4) / 4, d, engine).value == pytest.approx(4 * np.sum(np.abs(d) ** 2), rel=1e-12)


def test_spectral_rejects_degenerate_spectra():
    rho, drho = _pure_pair(0.7, 0.0)
    with pytest.raises(fisher.DegenerateSpectrumError):
        fisher.qfi(rho, drho, "spectral")
    with pytest.raises(NumericError):
        fisher.qfi(np.eye(4) / 4, np.zeros((4, 4)), "spectral")


def test_spectral_rejects_two_copy_state():
    # the two-copy state always carries a repeated diagonal entry
    p = ChannelParams(2, 4.0, 0.3, 1.3)
    s = InputState(0.7, 0.4)
    rho = bob_state_stp(p, s).rho
    with pytest.raises(fisher.DegenerateSpectrumError):
        fisher.qfi(rho, fisher.rho_derivative_analytic("stp", p, s), "spectral")


def test_spectral_matches_matrix_form_on_full_rank_state():
    rng = np.random.default_rng(7)
    rho, drho = random_family_pair(rng)
    m = fisher.qfi(rho, drho, "matrix")
    e = fisher.qfi(rho, drho, "spectral")
    assert e.value == pytest.approx(m.value, abs=1e-8)
    assert e.term_classical + e.term_pure + e.term_mixed == pytest.approx(e.value, abs=1e-12)
    assert e.engine == "spectral"


def test_sld_zero_derivative():
    rng = np.random.default_rng(8)
    rho, _ = random_family_pair(rng)
    z = np.zeros((4, 4))
    assert fisher.qfi(rho, z, "sld").value == 0.0
    assert np.array_equal(fisher.sld_operator(rho, z), np.zeros((4, 4)))


def test_sld_solves_lyapunov_equation():
    rng = np.random.default_rng(9)
    rho, drho = random_family_pair(rng)
    L = fisher.sld_operator(rho, drho)
    assert np.max(np.abs(0.5 * (rho @ L + L @ rho) - drho)) <= 1e-10
    assert np.trace(rho @ L @ L).real == pytest.approx(fisher.qfi(rho, drho, "sld").value, rel=1e-12)


def test_engine_agreement_on_random_pairs():
    rng = np.random.default_rng(10)
    pairs = [random_family_pair(rng) for _ in range(500)]
    rho = np.array([p[0] for p in pairs])
    drho = np.array([p[1] for p in pairs])
    m = fisher.qfi_batch(rho, drho, "matrix")
    s = fisher.qfi_batch(rho, drho, "sld")
    e = fisher.qfi_batch(rho, drho, "spectral")
    assert np.max(np.abs(m - s)) <= 1e-8
    assert np.max(np.abs(m - e)) <= 1e-8
    assert np.all(m >= 0)


def test_batch_matches_single():
    rng = np.random.default_rng(12)
    pairs = [random_family_pair(rng) for _ in range(5)]
    rho = np.array([p[0] for p in pairs])
    drho = np.array([p[1] for p in pairs])
    for engine in fisher.ENGINES:
        batch = fisher.qfi_batch(rho, drho, engine)
        single = [fisher.qfi(r, d, engine).value for r, d in pairs]
        assert np.allclose(batch, single, rtol=0, atol=1e-14)


def test_reparameterization_scales_qfi():
    # xi = 2 theta: d rho / d xi = (d rho / d theta) / 2 and F scales by 1/4
    rng = np.random.default_rng(13)
    rho, drho = random_family_pair(rng)
    f_theta = fisher.qfi(rho, drho).value
    f_xi = fisher.qfi(rho, drho / 2).value
    assert f_xi == pytest.approx(f_theta / 4, rel=1e-12)


def test_support_threshold_stability():
    rho, drho = _pure_pair(0.5, 0.2)
    perturbed = rho + 1e-15 * np.eye(4)
    assert fisher.qfi(perturbed, drho).value == pytest.approx(fisher.qfi(rho, drho).value, abs=1e-6)


def test_engine_validation():
    with pytest.raises(ValidationError):
        fisher.qfi(np.eye(4) / 4, np.zeros((4, 4)), "bogus")
    with pytest.raises(ValidationError):
        fisher.qfi(np.eye(4) / 4, np.zeros((2, 2)))


def test_teleported_qfi_at_tau_zero_is_classical():
    # at tau = 0 the channel is diagonal and so is Bob's state
    for protocol in ("ftp", "stp"):
        p = ChannelParams(2, 4.0, 0.0, 0.0)
        s = InputState(math.pi / 4, 0.0)
        alphas = alpha_arrays(p.n, p.nbar, p.delta, p.tau)[:5]
        rho, drho = fisher.bob_state_and_derivative(protocol, alphas, s.theta, s.phi)
        res = fisher.qfi(rho, drho)
        assert res.term_pure == pytest.approx(0.0, abs=1e-15)
        assert res.value == pytest.approx(res.term_classical, abs=1e-15)
        assert raw_bob_matrix(protocol, alphas, s.theta, s.phi)[0, 3] == 0


@pytest.mark.parametrize("protocol", ["ftp", "stp"])
@pytest.mark.parametrize("theta", [0.0, math.pi / 4, math.pi / 2])
def test_teleported_qfi_nonnegative_on_sweep(protocol, theta):
    tau = np.linspace(0, 20, 400)
    for nbar in (2.0, 4.0, 6.0):
        f = fisher.teleported_qfi_grid(protocol, 2, nbar, 0.0, tau, theta, 0.0)
        assert np.all(np.isfinite(f)) and np.all(f >= -1e-12)


@pytest.mark.parametrize("protocol", ["ftp", "stp"])
def test_teleported_qfi_analytic_vs_fd(protocol):
    tau = np.linspace(0.05, 20, 200)
    a = fisher.teleported_qfi_grid(protocol, 2, 4.0, 0.3, tau, 0.7, 0.4, derivative="analytic")
    f = fisher.teleported_qfi_grid(protocol, 2, 4.0, 0.3, tau, 0.7, 0.4, derivative="fd")
    assert np.max(np.abs(a - f)) <= 1e-6


@settings(max_examples=60, deadline=None)
@given(channel_params, st.floats(0.0, math.pi), st.sampled_from(["ftp", "stp"]))
def test_teleported_qfi_properties(p, theta, protocol):
    s = InputState(theta, 0.0)
    f = fisher.teleported_qfi(protocol, p, s)
    assert math.isfinite(f) and f >= -1e-12
    f_sld = fisher.teleported_qfi(protocol, p, s, engine="sld")
    assert f_sld == pytest.approx(f, rel=1e-7, abs=1e-9)


def test_teleported_qfi_phi_parameter():
    p = ChannelParams(2, 4.0, 0.3, 1.3)
    s = InputState(0.7, 0.4)
    a = fisher.teleported_qfi("stp", p, s, parameter="phi")
    f = fisher.teleported_qfi("stp", p, s, parameter="phi", derivative="fd")
    assert a == pytest.approx(f, abs=1e-7)
    with pytest.raises(ValidationError):
        fisher.teleported_qfi("stp", p, s, parameter="nbar")
