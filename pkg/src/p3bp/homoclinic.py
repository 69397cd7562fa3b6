"""Unperturbed parabolic homoclinic orbit and the infinity manifold.

With the potential dropped, the outer pair follows the zero-energy
parabolic separatrix

    r_h = (tau^2 + 1)/2,   y_h = 2 tau/(tau^2 + 1),
    e^{i phi_h} = (tau + i)/(tau - i),   u = (tau^3/3 + tau)/2,

along which the invariant manifolds of every periodic orbit at infinity
coincide.  ``phi_h`` is fixed to the continuous decreasing branch with
``phi_h(0) = pi`` and range (0, 2 pi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charts import ReducedState
from .masses import MassConstants


def tau_of_u(u):
    """Real root of u = (tau^3/3 + tau)/2 by Cardano plus one Newton polish."""
    u = np.asarray(u, dtype=float)
    disc = np.sqrt(9.0 * u**2 + 1.0)
    tau = np.cbrt(3.0 * u + disc) + np.cbrt(3.0 * u - disc)
    # one Newton step on f = tau^3/3 + tau - 2u (exact at u = 0 already)
    tau = tau - (tau**3 / 3.0 + tau - 2.0 * u) / (tau**2 + 1.0)
    return float(tau) if tau.shape == () else tau


def u_of_tau(tau):
    tau = np.asarray(tau, dtype=float)
    u = (tau**3 / 3.0 + tau) / 2.0
    return float(u) if u.shape == () else u


def separatrix_r(tau):
    return (np.asarray(tau) ** 2 + 1.0) / 2.0


def separatrix_y(tau):
    tau = np.asarray(tau)
    return 2.0 * tau / (tau**2 + 1.0)


def separatrix_phi(tau):
    """Angle with e^{i phi} = (tau+i)/(tau-i), decreasing, phi(0) = pi."""
    tau = np.asarray(tau)
    phi = np.mod(np.arctan2(2.0 * tau, tau**2 - 1.0), 2.0 * np.pi)
    # the mod puts tau=inf at 0 and tau=-inf at 2*pi; tau=0 gives pi
    return phi


@dataclass(frozen=True)
class HomoclinicPoint:
    u: float
    tau: float
    r_h: float
    y_h: float
    phi_h: float
    exp_i_phi: complex


def homoclinic_point(u: float) -> HomoclinicPoint:
    tau = tau_of_u(u)
    return HomoclinicPoint(
        u=float(u), tau=float(tau),
        r_h=float(separatrix_r(tau)),
        y_h=float(separatrix_y(tau)),
        phi_h=float(separatrix_phi(tau)),
        exp_i_phi=complex((tau + 1j) / (tau - 1j)),
    )


@dataclass(frozen=True)
class InfinityOrbit:
    """Periodic orbit at infinity labeled by (eta0, xi0) on the level L = L0."""
    constants: MassConstants
    L0: float
    Theta: float
    eta0: complex
    xi0: complex
    G0: float = field(init=False)
    omega: float = field(init=False)

    def __post_init__(self):
        prod = complex(self.eta0 * self.xi0)
        if abs(prod.imag) > 1e-12 * max(1.0, abs(prod)):
            raise ValueError("eta0*xi0 must be real (physical slice)")
        G0 = self.Theta - self.L0 + prod.real
        if G0 <= 0:
            raise ValueError(f"G0 = {G0} must be positive")
        object.__setattr__(self, "G0", float(G0))
        object.__setattr__(self, "omega",
                           float(self.constants.nu * G0**3 / self.L0**3))

    @property
    def theta_tilde(self) -> float:
        return self.Theta - self.L0

    def with_point(self, eta0: complex, xi0: complex | None = None) -> "InfinityOrbit":
        if xi0 is None:
            xi0 = complex(eta0).conjugate()
        return InfinityOrbit(self.constants, self.L0, self.Theta, complex(eta0), complex(xi0))


def embed_homoclinic(u: float, gamma: float, orbit: InfinityOrbit) -> ReducedState:
    """Point of the unperturbed homoclinic manifold in reduced coordinates.

    With the potential dropped this curve is invariant; the flow moves it
    with speeds ``du/dt = G0^{-3}`` and ``dgamma/dt = nu/L0^3``.
    """
    h = homoclinic_point(u)
    eip = np.exp(1j * h.phi_h)
    return ReducedState(
        lam=gamma + h.phi_h,
        L=orbit.L0,
        eta=complex(orbit.eta0 * eip),
        xi=complex(orbit.xi0 / eip),
        r=orbit.G0**2 * h.r_h,
        y=h.y_h / orbit.G0,
        Theta=orbit.Theta,
    )
