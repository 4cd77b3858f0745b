"""Independent high-precision evaluations used to freeze expected values.

Written directly from the coefficient formulas with mpmath at 50 digits;
shares no code with the package.
"""
import mpmath as mp

mp.mp.dps = 50


def weight_sq(nbar, k):
    nbar = mp.mpf(nbar)
    if k < 0:
        return mp.mpf(0)
    if nbar == 0:
        return mp.mpf(1) if k == 0 else mp.mpf(0)
    return mp.e ** (-nbar) * nbar ** k / mp.factorial(k)


def alphas(n, nbar, delta, tau):
    d = mp.mpf(delta)
    t = mp.mpf(tau)
    om1 = mp.sqrt(d**2 + n + 1)
    om0 = mp.sqrt(d**2 + n)
    s1, c1, s0 = mp.sin(t * om1), mp.cos(t * om1), mp.sin(t * om0)
    p_lo, p_n, p_hi = weight_sq(nbar, n - 1), weight_sq(nbar, n), weight_sq(nbar, n + 1)
    stay = c1**2 + d**2 / (d**2 + n + 1) * s1**2
    lower = (n / (d**2 + n) * s0**2 * p_lo) if n >= 1 else mp.mpf(0)
    N = p_n + lower + stay * p_hi
    a1 = lower / N
    a2 = p_n / N * stay
    a3 = (1j * p_n * mp.sqrt(n + 1) * mp.e ** (-1j * d * t) / (N * om1)
          * s1 * (c1 - 1j * d * s1 / om1))
    a4 = p_n / N * (n + 1) / (d**2 + n + 1) * s1**2
    a5 = p_hi / N * stay
    return a1, a2, mp.mpc(a3), a4, a5, N


def coherence_entry(n, nbar, delta, tau, theta, phi):
    a3 = alphas(n, nbar, delta, tau)[2]
    th = mp.mpf(theta)
    return (a3 + mp.conj(a3)) ** 2 * mp.cos(th) * mp.sin(th) * mp.e ** (0.5j * mp.mpf(phi))
