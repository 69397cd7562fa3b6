"""Perturbing potential of the reduced problem, analytic at circular motion.

The potential couples the inner ellipse to the far body through the complex
combination ``z = (rho/r) e^{i(v+phi)}``.  Evaluating it directly in
Poincare variables runs through ``e^{i phi} = eta/sqrt(eta xi)``, singular
at the circular point.  Instead we solve the shifted Kepler equation

    Et = lambda + (E_/2i) (xi e^{i Et} - eta e^{-i Et}),   E_ = sqrt(2L - eta xi)/L

and assemble

    rho e^{i(v+phi)} = L^2 (a^2 e^{i Et} - E_ eta + (E_^2 eta^2 / 4 a^2) e^{-i Et})

with ``a^2 = (1 + sqrt(1 - e_c^2))/2``; every factor is analytic in
``(eta, xi)`` at the origin.  The mirror combination with ``eta <-> xi``
and ``Et -> -Et`` supplies the conjugate factor, so the evaluation extends
to complexified states.  Partial derivatives come from implicit
differentiation of the fixed point; finite differences are kept as a test
oracle only.

All functions accept numpy scalars/arrays (vectorized) or, when ``use_mp``
is set, mpmath scalars at the current working precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .masses import MassConstants

PROXIMITY_LIMIT = 0.05


class ProximityError(ValueError):
    """Inner ellipse too close to the outer body for the expansion."""


@dataclass(frozen=True)
class PotentialEval:
    value: object
    d_lambda: object
    d_L: object
    d_eta: object
    d_xi: object
    d_r: object


def _lib(use_mp):
    if use_mp:
        return mp.exp, mp.sqrt, abs
    return np.exp, np.sqrt, np.abs


def kepler_fixed_point(lam, L, eta, xi, use_mp=False, tol=None, max_iter=60):
    """Solve Et = lam + (E_/2i)(xi e^{iEt} - eta e^{-iEt}) by Newton.

    Returns ``(Et, gE)`` where ``gE = 1 - (E_/2)(xi e^{iEt} + eta e^{-iEt})``
    is the derivative of the defining equation (the classical
    ``1 - e_c cos E`` on the real slice).
    """
    exp, sqrt, absf = _lib(use_mp)
    if tol is None:
        tol = mp.mpf(10) ** (-mp.mp.dps + 5) if use_mp else 1e-15
    E_ = sqrt(2 * L - eta * xi) / L
    half = E_ / 2
    Et = lam + (half / 1j) * (xi * exp(1j * lam) - eta * exp(-1j * lam))
    for _ in range(max_iter):
        ep, em = exp(1j * Et), exp(-1j * Et)
        g = Et - lam - (half / 1j) * (xi * ep - eta * em)
        gE = 1 - half * (xi * ep + eta * em)
        step = g / gE
        Et = Et - step
        err = absf(step)
        small = (err < tol) if use_mp else np.all(err < tol)
        if small:
            break
    ep, em = exp(1j * Et), exp(-1j * Et)
    gE = 1 - half * (xi * ep + eta * em)
    return Et, gE


def potential_W(lam, L, eta, xi, r, constants: MassConstants,
                derivatives: bool = True, use_mp: bool = False) -> PotentialEval:
    """Perturbing potential and its five partial derivatives.

    ``eta`` and ``xi`` are treated as independent complex variables; on the
    physical slice ``xi = conj(eta)`` the value is real.  ``d_eta``/``d_xi``
    are the independent-complex partials used by the reduced equations.

    Raises
    ------
    ProximityError
        If any denominator ``1 +- sigma_tilde z`` has modulus below 0.05.
    """
    exp, sqrt, absf = _lib(use_mp)
    c = constants
    m0, m1 = c.m0, c.m1
    s0, s1 = c.sigma0_tilde, c.sigma1_tilde

    s2 = 2 * L - eta * xi
    E_ = sqrt(s2) / L
    P = eta * xi * s2 / L**2                     # e_c^2
    rootP = sqrt(1 - P)
    A2 = (1 + rootP) / 2                         # a^2
    S = s2 / L**2                                # E_^2
    B = S / (4 * A2)

    Et, gE = kepler_fixed_point(lam, L, eta, xi, use_mp=use_mp)
    ep, em = exp(1j * Et), exp(-1j * Et)

    Fp = A2 * ep - E_ * eta + B * eta**2 * em
    Fm = A2 * em - E_ * xi + B * xi**2 * ep
    zp = (L**2 / r) * Fp
    zm = (L**2 / r) * Fm

    D0p, D0m = 1 + s0 * zp, 1 + s0 * zm
    D1p, D1m = 1 - s1 * zp, 1 - s1 * zm
    mags = [absf(D0p), absf(D0m), absf(D1p), absf(D1m)]
    min_mag = min(mags) if use_mp else np.min(np.broadcast_arrays(*mags))
    if min_mag < PROXIMITY_LIMIT:
        raise ProximityError(f"denominator magnitude {min_mag} below {PROXIMITY_LIMIT}")

    R0 = (D0p * D0m) ** -0.5 if not use_mp else 1 / sqrt(D0p * D0m)
    R1 = (D1p * D1m) ** -0.5 if not use_mp else 1 / sqrt(D1p * D1m)
    # Hamiltonian-ready sign: the reduction subtracts the interaction bracket
    W = -(c.nu_tilde / r) * (m0 * R0 + m1 * R1 - (m0 + m1))

    if not derivatives:
        return PotentialEval(W, None, None, None, None, None)

    # --- implicit differentiation ------------------------------------
    ex = eta * xi
    sq = sqrt(s2)
    dE_de = -xi / (2 * L * sq)
    dE_dx = -eta / (2 * L * sq)
    dE_dL = 1 / (L * sq) - sq / L**2
    dP_de = 2 * xi * (L - ex) / L**2
    dP_dx = 2 * eta * (L - ex) / L**2
    dP_dL = -2 * ex * (L - ex) / L**3
    dA2_de = -dP_de / (4 * rootP)
    dA2_dx = -dP_dx / (4 * rootP)
    dA2_dL = -dP_dL / (4 * rootP)
    dS_de = -xi / L**2
    dS_dx = -eta / L**2
    dS_dL = 2 * (ex - L) / L**3
    dB_de = dS_de / (4 * A2) - S * dA2_de / (4 * A2**2)
    dB_dx = dS_dx / (4 * A2) - S * dA2_dx / (4 * A2**2)
    dB_dL = dS_dL / (4 * A2) - S * dA2_dL / (4 * A2**2)

    # dEt/dx = -(g_x + g_E_ * dE_/dx)/gE;  g_E_ = -(Et-lam)/E_
    gEtmlam = -(Et - lam) / E_
    g_lam = -1
    g_eta = (E_ / 2j) * em
    g_xi = -(E_ / 2j) * ep
    dEt_dlam = -g_lam / gE
    dEt_de = -(g_eta + gEtmlam * dE_de) / gE
    dEt_dx = -(g_xi + gEtmlam * dE_dx) / gE
    dEt_dL = -(gEtmlam * dE_dL) / gE

    dFp_dEt = 1j * (A2 * ep - B * eta**2 * em)
    dFm_dEt = 1j * (-A2 * em + B * xi**2 * ep)

    dFp_de = dA2_de * ep - (E_ + eta * dE_de) + (dB_de * eta**2 + 2 * B * eta) * em
    dFp_dx = dA2_dx * ep - eta * dE_dx + dB_dx * eta**2 * em
    dFp_dL = dA2_dL * ep - eta * dE_dL + dB_dL * eta**2 * em
    dFm_dx = dA2_dx * em - (E_ + xi * dE_dx) + (dB_dx * xi**2 + 2 * B * xi) * ep
    dFm_de = dA2_de * em - xi * dE_de + dB_de * xi**2 * ep
    dFm_dL = dA2_dL * em - xi * dE_dL + dB_dL * xi**2 * ep

    # totals including the fixed-point chain
    tFp_dlam = dFp_dEt * dEt_dlam
    tFm_dlam = dFm_dEt * dEt_dlam
    tFp_de = dFp_de + dFp_dEt * dEt_de
    tFm_de = dFm_de + dFm_dEt * dEt_de
    tFp_dx = dFp_dx + dFp_dEt * dEt_dx
    tFm_dx = dFm_dx + dFm_dEt * dEt_dx
    tFp_dL = dFp_dL + dFp_dEt * dEt_dL
    tFm_dL = dFm_dL + dFm_dEt * dEt_dL

    L2r = L**2 / r
    dzp = {"lam": L2r * tFp_dlam, "eta": L2r * tFp_de, "xi": L2r * tFp_dx,
           "L": 2 * L / r * Fp + L2r * tFp_dL, "r": -zp / r}
    dzm = {"lam": L2r * tFm_dlam, "eta": L2r * tFm_de, "xi": L2r * tFm_dx,
           "L": 2 * L / r * Fm + L2r * tFm_dL, "r": -zm / r}

    P0 = (D0p * D0m) ** -1.5 if not use_mp else 1 / (sqrt(D0p * D0m) * (D0p * D0m))
    P1 = (D1p * D1m) ** -1.5 if not use_mp else 1 / (sqrt(D1p * D1m) * (D1p * D1m))
    dR0_dzp = -(s0 / 2) * D0m * P0
    dR0_dzm = -(s0 / 2) * D0p * P0
    dR1_dzp = (s1 / 2) * D1m * P1
    dR1_dzm = (s1 / 2) * D1p * P1

    pref = -c.nu_tilde / r

    def dW(key):
        return pref * (m0 * (dR0_dzp * dzp[key] + dR0_dzm * dzm[key])
                       + m1 * (dR1_dzp * dzp[key] + dR1_dzm * dzm[key]))

    d_r = -W / r + dW("r")
    return PotentialEval(W, dW("lam"), dW("L"), dW("eta"), dW("xi"), d_r)
