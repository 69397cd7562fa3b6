import numpy as np
import pytest

from p3bp.homoclinic import InfinityOrbit
from p3bp.masses import derive_constants
from p3bp.melnikov import (
    C_closed,
    C_coeff,
    N_integral,
    N_leading,
    PrecisionConfig,
    fourier_extract,
    melnikov_asymptotic,
    melnikov_direct,
    melnikov_harmonic,
    rate_fit,
)

P30 = PrecisionConfig(digits=30, n_lambda=16)


def orbit_for(c, G0, eta0=0j, L0=1.0):
    eta0 = complex(eta0)
    return InfinityOrbit(c, L0, G0 + L0 - (eta0 * eta0.conjugate()).real,
                         eta0, eta0.conjugate())


# ---------------------------------------------------------------- N integrals


def test_N011_quadrature_vs_closed(c121):
    for G0 in (2.0, 5.0, 10.0):
        om = c121.nu * G0**3
        val, err = N_integral(0, 1, 1, G0, om, P30, contour="real")
        assert abs(val - np.pi / (2 * G0**3)) / (np.pi / (2 * G0**3)) < 1e-10


def test_N_q0_special_values(c121):
    G0, om = 5.0, c121.nu * 125
    for (m, n) in ((2, 0), (0, 2), (3, 0)):
        val, _ = N_integral(0, m, n, G0, om)
        assert abs(val) < 1e-14
    v21, _ = N_integral(0, 2, 1, G0, om)
    assert v21 == pytest.approx(3 * np.pi / 8 / G0**5, rel=1e-12)


def test_N_symmetry_identity(c121):
    """N(-q, m, n) = N(q, n, m) with independently shifted contours."""
    om = 1.7
    for (m, n) in ((2, 1), (1, 2), (2, 0)):
        a, ea = N_integral(-1, m, n, 2.0, om, P30)
        b, eb = N_integral(1, n, m, 2.0, om, P30)
        assert abs(a - b) <= 10 * (ea + eb) + 1e-25


def test_N_contour_vs_real_line(c121):
    """Validates the tau-substitution phase (the /2 in the exponent)."""
    om = 1.3
    a, _ = N_integral(1, 2, 1, 2.0, om, P30)
    b, _ = N_integral(1, 2, 1, 2.0, om, P30, contour="real")
    assert abs(a - b) / abs(a) < 1e-4


def test_N_leading_matches_quadrature(c121):
    # corrections are O(omega^-1/2) with order-one coefficients
    for (m, n) in ((2, 1), (2, 0), (3, 0)):
        rels = []
        for G0 in (4.0, 5.0):
            om = 2.0 * G0**3 / 8.0
            exact, _ = N_integral(1, m, n, G0, om, P30)
            lead = N_leading(1, m, n, G0, om)
            rels.append(abs(exact - lead) / abs(lead))
            assert rels[-1] < 3.0 * om**-0.5
        assert rels[1] < rels[0]


def test_N_domain_errors(c121):
    with pytest.raises(ValueError):
        N_integral(0, 0, 0, 5.0, 1.0)
    with pytest.raises(ValueError):
        N_integral(1, -1, 2, 5.0, 1.0)


# ------------------------------------------------------------- C coefficients


def test_C_trivial_and_closed():
    assert C_coeff(0, 0, 0, 1.0, 0.3) == pytest.approx(1.0, abs=1e-14)
    for e in (0.1, 0.5, 0.9):
        for L0 in (1.0, 1.2):
            quad = C_coeff(0, 2, 0, L0, e)
            closed = C_closed(0, 2, 0, L0, e)
            assert abs(quad - closed) / abs(closed) < 1e-10


def test_C_reality_and_symmetry():
    for (q, n, m) in ((1, 2, 2), (0, 3, 1), (2, 3, -1)):
        a = C_coeff(q, n, m, 1.0, 0.4)
        b = C_coeff(-q, n, -m, 1.0, 0.4)
        assert abs(a.imag) < 1e-13 * max(1, abs(a))
        assert a == pytest.approx(b, abs=1e-13)


def test_C_eccentricity_power_bound():
    """|C_q^{n,m}| <= K e_c^{|m-q|}: fitted decay exponent >= |m-q|."""
    es = np.array([0.05, 0.1, 0.2])
    for (q, n, m) in ((1, 2, -2), (0, 3, 1), (2, 2, 0)):
        vals = np.array([abs(C_coeff(q, n, m, 1.0, e)) for e in es])
        slope = np.polyfit(np.log(es), np.log(vals), 1)[0]
        assert slope >= abs(m - q) - 0.1


def test_C_domain():
    with pytest.raises(ValueError):
        C_coeff(0, 2, 0, 1.0, 1.0)


# ------------------------------------------------------------------- Fourier


def test_fourier_extract_trivia():
    sig = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    h = fourier_extract(sig, np.ones_like(sig), 3)
    assert h[0] == pytest.approx(1.0)
    assert abs(h[1]) < 1e-14 and abs(h[2]) < 1e-14
    h = fourier_extract(sig, np.cos(sig), 3)
    assert h[1] == pytest.approx(0.5, abs=1e-14)
    assert h[-1] == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(ValueError):
        fourier_extract(sig[:8], np.ones(8), 3)  # < 4*q_max
    with pytest.raises(ValueError):
        fourier_extract(sig**1.1, np.ones_like(sig), 3)


def test_fourier_matches_direct_harmonics(c121):
    orb = orbit_for(c121, 8.0, 0.01)
    sig = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    rep = melnikov_direct(orb, sig, PrecisionConfig(digits=25, n_lambda=16, q_max=2))
    ext = fourier_extract(sig, rep.values, 2)
    for q in (-2, -1, 0, 1, 2):
        assert ext[q] == pytest.approx(rep.harmonics[q].value, rel=1e-10, abs=1e-30)


# ----------------------------------------------------------- Melnikov proper


def test_L0_real_and_stable_under_tail_doubling(c121):
    orb = orbit_for(c121, 8.0, 0.05)
    h_a = melnikov_harmonic(orb, 0, PrecisionConfig(digits=30, tau_cut=45.0))
    h_b = melnikov_harmonic(orb, 0, PrecisionConfig(digits=30, tau_cut=90.0))
    assert abs(complex(h_a.value).imag) <= max(h_a.error, 1e-13)
    assert abs(h_a.value - h_b.value) <= 2 * (h_a.error + h_b.error)


def test_L0_scales_with_nu_tilde(c121):
    from dataclasses import replace
    orb = orbit_for(c121, 8.0, 0.05)
    h1 = melnikov_harmonic(orb, 0, P30)
    c_scaled = replace(c121, nu_tilde=2 * c121.nu_tilde)
    orb2 = InfinityOrbit(c_scaled, orb.L0, orb.Theta, orb.eta0, orb.xi0)
    h2 = melnikov_harmonic(orb2, 0, P30)
    assert h2.value == pytest.approx(2 * h1.value, rel=1e-10)


def test_L0_quadrature_vs_asymptotic_10pct(c121):
    for amp in (0.0, 0.3):
        for G0, bound in ((6.0, 0.05), (10.0, 0.01)):
            Theta = G0 + 1.0
            orb = orbit_for(c121, G0, amp * Theta**-1.5)
            h0 = melnikov_harmonic(orb, 0, P30)
            L0a, _ = melnikov_asymptotic(orb)
            assert abs(h0.value - L0a) / abs(L0a) < bound


def test_conjugation_symmetry(c121):
    """L[q](eta0,xi0) = conj(L[-q])(xi0,eta0), the bar denoting Schwarz
    reflection: operationally L[-q](xi0,eta0) = L[q](eta0,xi0) and, on the
    physical slice, L[-q](eta0,xi0) = conj(L[q](eta0,xi0))."""
    c = derive_constants(1.0, 2.0, 0.5)
    eta0 = 0.02 * np.exp(0.6j)
    orb = InfinityOrbit(c, 1.0, 4.0, eta0, eta0.conjugate())
    orb_swap = InfinityOrbit(c, 1.0, 4.0, eta0.conjugate(), eta0)
    for q in (0, 1, 2):
        a = melnikov_harmonic(orb, q, P30)
        b = melnikov_harmonic(orb_swap, -q, P30)
        d = melnikov_harmonic(orb, -q, P30)
        tol = 10 * (a.error + b.error + d.error) + 1e-12 * abs(a.value)
        assert abs(a.value - b.value) <= tol
        assert abs(np.conj(a.value) - d.value) <= tol


def test_harmonic_geometric_decay():
    c = derive_constants(1.0, 2.0, 0.5)
    orb = InfinityOrbit(c, 1.0, 5.0, 0.02 + 0j, 0.02 - 0j)
    mags = [abs(melnikov_harmonic(orb, q, P30).value) for q in (1, 2, 3)]
    # rate consistent with exp(-q omega /3): ratios below the q=1 scale
    assert mags[1] < mags[0] * np.exp(-0.5 * orb.omega / 3)
    assert mags[2] < mags[1] * np.exp(-0.5 * orb.omega / 3)


def test_melnikov_asymptotic_structure(c121, c111):
    # equal masses: N3 = 0 kills the Theta^-2 term of L0 and the
    # eta-independent part of L1
    orb_eq = InfinityOrbit(c111, 1.0, 9.0, 0j, 0j)
    L0a, L1a = melnikov_asymptotic(orb_eq)
    assert L1a == 0.0
    orb = orbit_for(c121, 8.0, 0.0)
    L0b, L1b = melnikov_asymptotic(orb)
    assert L1b != 0.0
    # L0 independent of (eta0+xi0) sign only through N3 term
    orb_p = orbit_for(c121, 8.0, 1e-3)
    orb_m = orbit_for(c121, 8.0, -1e-3)
    d = melnikov_asymptotic(orb_p)[0] - melnikov_asymptotic(orb_m)[0]
    assert abs(d) > 0  # N3 term present for unequal masses


def test_rate_fit_synthetic(c121):
    orb = orbit_for(c121, 5.0)
    c_true = c121.nu / 3.0
    G0s = np.array([3.0, 3.5, 4.0, 4.5, 5.0])
    mags = 2.3 * G0s**1.5 * np.exp(-c_true * G0s**3)
    fit = rate_fit(G0s, mags, orb)
    assert abs(fit.c_fit - c_true) / c_true < 1e-3
    assert fit.p_fit == pytest.approx(1.5, abs=1e-6)
    assert fit.winner == "nu"


def test_rate_fit_rejects_off_candidates(c121):
    orb = orbit_for(c121, 5.0)
    G0s = np.array([3.0, 3.5, 4.0, 4.5, 5.0])
    mags = 2.3 * G0s**1.5 * np.exp(-0.77 * c121.nu / 3 * G0s**3)
    fit = rate_fit(G0s, mags, orb)
    assert fit.winner is None
