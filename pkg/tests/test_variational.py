import numpy as np
import pytest

from p3bp.homoclinic import InfinityOrbit
from p3bp.masses import derive_constants
from p3bp.melnikov import PrecisionConfig, melnikov_harmonic
from p3bp.variational import (
    CorrectionOperator,
    f1_f2,
    first_order_correction,
    fundamental_matrix,
    g2,
    system_matrix,
    variational_basis,
)


def _orbit(c, eta0=0.12 + 0.04j, L0=1.0, Theta=8.0):
    return InfinityOrbit(c, L0, Theta, complex(eta0), complex(eta0).conjugate())


def test_guard_rejected(c121):
    orb = _orbit(c121)
    with pytest.raises(ValueError):
        f1_f2(1e-5, orb)


def test_phi_A_solves_linear_system(c121):
    """L Phi_A = A Phi_A with L = d/du along the characteristics."""
    orb = _orbit(c121)
    h = 1e-6
    for u in (-8.0, -1.2, 0.7, 3.0, 20.0):
        dPhi = (fundamental_matrix(u + h, orb) - fundamental_matrix(u - h, orb)) / (2 * h)
        rhs = system_matrix(u, orb) @ fundamental_matrix(u, orb)
        assert np.max(np.abs(dPhi - rhs)) < 1e-8


def test_phi_A_identity_at_circular(c121):
    orb = InfinityOrbit(c121, 1.0, 8.0, 0j, 0j)
    Phi = fundamental_matrix(3.0, orb)
    assert np.allclose(Phi, np.eye(4))


def test_g2_normalization_and_tail(c121):
    orb = _orbit(c121)
    # stable normalization: g2 -> 0 as u -> +inf like u^(-1/3)
    Us = np.array([50.0, 400.0, 3200.0])
    vals = np.abs(g2(Us, orb))
    assert vals[-1] < 1e-3
    slope = np.polyfit(np.log(Us), np.log(vals), 1)[0]
    assert slope == pytest.approx(-1 / 3, abs=0.02)
    # unstable side: same closed form vanishes as u -> -inf
    assert abs(g2(-3200.0, orb)) < 1e-3


def test_variational_basis_returns(c121):
    orb = _orbit(c121)
    f1, f2, G1, G2, Phi = variational_basis(2.0, orb)
    assert f1 > 0 and f2 > 0 and Phi.shape == (4, 4)


def test_zero_without_potential_and_dz(c121):
    orb = _orbit(c121)
    op = CorrectionOperator(orb, "stable", drop_potential=True, n_grid=200)
    Z = op.fiber(5.0, 0.7)
    assert np.max(np.abs(Z)) == 0.0


def test_unstable_fiber_decays(c121):
    orb = _orbit(c121)
    op = CorrectionOperator(orb, "unstable", u_far=2000.0, n_grid=2000)
    Z_far = op.fiber(-1500.0, 0.3)
    Z_near = op.fiber(-2.0, 0.3)
    assert np.max(np.abs(Z_far)) < 1e-8
    assert np.max(np.abs(Z_far)) < 1e-3 * np.max(np.abs(Z_near))


def test_linearity_in_delta_z(c121):
    orb = _orbit(c121)
    op = CorrectionOperator(orb, "stable", n_grid=400)
    base = op.fiber(4.0, 1.1)
    d1 = op.fiber(4.0, 1.1, delta_z=(1e-3 + 0j, 1e-3 - 0j)) - base
    d2 = op.fiber(4.0, 1.1, delta_z=(2e-3 + 0j, 2e-3 - 0j)) - base
    assert np.allclose(2 * d1, d2, rtol=1e-10, atol=1e-18)


def test_lambda_difference_matches_melnikov_derivative():
    """Cross-module oracle: the stable-minus-unstable Lambda correction is
    d(sigma)L, i.e. per harmonic -int_R h2^[q] e^{i q omega v} dv = iq L[q].

    The left side integrates the gamma-derivative of the potential along
    the real separatrix with a Filon rule (the Lambda component is smooth
    across u = 0); the right side is the shifted-contour multiprecision
    harmonic.  Completely different machinery, same number.
    """
    from p3bp.homoclinic import u_of_tau
    from p3bp.variational import _filon_cumulative, _p1_harmonics

    c = derive_constants(1.0, 2.0, 0.5)
    eta0 = 0.02
    orb = InfinityOrbit(c, 1.0, 3.2, complex(eta0), complex(eta0))
    om = orb.omega
    taus = np.linspace(-tau_for(600.0), tau_for(600.0), 6001)
    us = u_of_tau(taus)
    n_gamma = 16
    h2_1 = np.array([_p1_harmonics(orb, u, n_gamma)[1, 1] for u in us])
    total = _filon_cumulative(us, h2_1, om, from_far=False)[-1]
    L1 = melnikov_harmonic(orb, 1, PrecisionConfig(digits=30, n_lambda=16)).value
    assert abs(-total - 1j * L1) / abs(L1) < 2e-3


def tau_for(u):
    from p3bp.homoclinic import tau_of_u
    return float(tau_of_u(u))


def test_wrapper(c121):
    orb = _orbit(c121)
    Z = first_order_correction(4.0, 0.5, orb, side="stable",
                               operator=CorrectionOperator(orb, "stable", n_grid=300))
    assert Z.shape == (4,)
