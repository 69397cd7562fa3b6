"""First-order structure of the invariant manifolds along the separatrix.

The linearized invariance equation along the unperturbed homoclinic has a
fundamental matrix built from primitives of ``i f1`` and ``i f2`` with

    f1 = 1/(G0 y_h^2 r_h^2),   f2 = 2/(G0 r_h^3 y_h^2).

In the separatrix parameter ``tau`` these integrate in closed form:
``f1 du = (1 + tau^-2) dtau/(2 G0)`` and ``f2 du = 2 dtau/(G0 tau^2)``,
hence ``g1 = i (tau - 1/tau)/(2 G0)`` and ``g2 = -2i/(G0 tau)`` with the
stable (unstable) normalization ``g2 -> 0`` as ``u -> +inf`` (``-inf``)
holding automatically.

First-order manifold fibers come from the integral operator: the fiber of
the stable manifold of the orbit shifted by ``delta_z`` is
``Phi_A delta_z + G_A(F(0))`` with nested directional integrals along the
characteristics ``(u + s, gamma + omega s)``.  Everything is evaluated
per gamma-harmonic; the oscillatory single integrals use a linear Filon
rule, while the nested ones are phase-free by construction.  Fibers are
defined for side-appropriate ``u`` (the graph frame degenerates at
``u = 0``; shooting crosses it by integrating the flow instead).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .homoclinic import InfinityOrbit, separatrix_phi, separatrix_r, separatrix_y, tau_of_u, u_of_tau
from .potential import potential_W

U_GUARD = 1e-3


def f1_f2(u, orbit: InfinityOrbit):
    """Coefficients of the linearized system; singular at u = 0."""
    if np.any(np.abs(u) < U_GUARD):
        raise ValueError(f"|u| below the parabolic guard {U_GUARD}")
    tau = tau_of_u(u)
    r, y = separatrix_r(tau), separatrix_y(tau)
    f1 = 1.0 / (orbit.G0 * y**2 * r**2)
    f2 = 2.0 / (orbit.G0 * r**3 * y**2)
    return f1, f2


def g1(u, orbit: InfinityOrbit):
    tau = tau_of_u(u)
    return 1j * (tau - 1.0 / tau) / (2.0 * orbit.G0)


def g2(u, orbit: InfinityOrbit):
    """Primitive of i f2 vanishing at +inf (stable) and -inf (unstable)."""
    tau = tau_of_u(u)
    return -2j / (orbit.G0 * tau)


def fundamental_matrix(u, orbit: InfinityOrbit) -> np.ndarray:
    """Phi_A(u) solving the linearized system L Z = A(u) Z."""
    e0, x0 = orbit.eta0, orbit.xi0
    G1, G2 = g1(u, orbit), g2(u, orbit)
    return np.array([
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [e0 * G1, e0 * G2, 1 - e0 * x0 * G2, -e0**2 * G2],
        [-x0 * G1, -x0 * G2, x0**2 * G2, 1 + e0 * x0 * G2],
    ], dtype=complex)


def system_matrix(u, orbit: InfinityOrbit) -> np.ndarray:
    """A(u) of the linearized system (lower-triangular block coupling)."""
    e0, x0 = orbit.eta0, orbit.xi0
    f1, f2 = f1_f2(u, orbit)
    A = np.zeros((4, 4), dtype=complex)
    A[2, 0] = 1j * f1 * e0
    A[2, 1] = 1j * f2 * e0
    A[3, 0] = -1j * f1 * x0
    A[3, 1] = -1j * f2 * x0
    A[2, 2] = -1j * f2 * e0 * x0
    A[2, 3] = -1j * f2 * e0**2
    A[3, 2] = 1j * f2 * x0**2
    A[3, 3] = 1j * f2 * e0 * x0
    return A


def variational_basis(u, orbit: InfinityOrbit):
    """(f1, f2, g1, g2, Phi_A) at u; g2's normalization is side-automatic."""
    f1, f2 = f1_f2(u, orbit)
    return f1, f2, g1(u, orbit), g2(u, orbit), fundamental_matrix(u, orbit)


# ---------------------------------------------------------------------------
# first-order correction operator


def _p1_harmonics(orbit: InfinityOrbit, u, n_gamma):
    """gamma-harmonics of F(0) = (-dP1/du, -dP1/dgamma, -i dP1/dbeta,
    i dP1/dalpha) at (u, .) on the separatrix, as arrays indexed by FFT bin.
    """
    c = orbit.constants
    tau = tau_of_u(u)
    r_h, y_h = separatrix_r(tau), separatrix_y(tau)
    phi = separatrix_phi(tau)
    eip = np.exp(1j * phi)
    gam = np.linspace(0, 2 * np.pi, n_gamma, endpoint=False)
    lam = gam + phi
    eta = orbit.eta0 * eip
    xi = orbit.xi0 / eip
    r = orbit.G0**2 * r_h
    W = potential_W(lam, orbit.L0, eta, xi, r, c)
    G03 = orbit.G0**3
    dphi = -1.0 / r_h**2
    dP_du = G03 * (np.asarray(W.d_lambda) * dphi
                   + np.asarray(W.d_eta) * 1j * dphi * eta
                   - np.asarray(W.d_xi) * 1j * dphi * xi
                   + np.asarray(W.d_r) * orbit.G0**2 * y_h)
    dP_dgam = G03 * np.asarray(W.d_lambda)
    dP_dalpha = G03 * np.asarray(W.d_eta) * eip
    dP_dbeta = G03 * np.asarray(W.d_xi) / eip
    F = np.stack([-dP_du, -dP_dgam, -1j * dP_dbeta, 1j * dP_dalpha])
    return np.fft.fft(F, axis=1) / n_gamma


def _filon_cumulative(v, g, qomega, from_far=True):
    """Cumulative of int g(v) e^{i qomega v} dv against the far end.

    Linear Filon per interval: exact for piecewise-linear g, stable for
    arbitrarily large qomega.  Returns I with I[k] = integral from v[k] to
    v[-1] (from_far) or v[0] to v[k] (not from_far).
    """
    w = qomega
    dv = np.diff(v)
    if w == 0:
        seg = 0.5 * (g[:-1] + g[1:]) * dv
    else:
        th = w * dv
        eith = np.exp(1j * th)
        # int_0^h (a + b t) e^{iwt} dt with a = g0, b = (g1-g0)/h
        small = np.abs(th) < 1e-4
        with np.errstate(invalid="ignore", divide="ignore"):
            I0 = (eith - 1) / (1j * w)
            I1 = (eith * dv) / (1j * w) - (eith - 1) / (1j * w) ** 2
        if np.any(small):
            hs = dv[small]
            ths = th[small]
            I0[small] = hs * (1 + 1j * ths / 2 - ths**2 / 6)
            I1[small] = hs**2 * (0.5 + 1j * ths / 3 - ths**2 / 8)
        b = (g[1:] - g[:-1]) / dv
        seg = np.exp(1j * w * v[:-1]) * (g[:-1] * I0 + b * I1)
    out = np.zeros(len(v), dtype=complex)
    if from_far:
        out[:-1] = np.cumsum(seg[::-1])[::-1]
    else:
        out[1:] = np.cumsum(seg)
    return out


@dataclass
class CorrectionOperator:
    """Evaluates first-order manifold fibers on one side of the separatrix.

    side='stable' integrates from +inf (fiber of W^s of the orbit shifted
    by delta_z); side='unstable' from -inf (fiber of W^u).
    """
    orbit: InfinityOrbit
    side: str
    u_far: float = 400.0
    n_grid: int = 1600
    n_gamma: int = 32
    drop_potential: bool = False

    def __post_init__(self):
        if self.side not in ("stable", "unstable"):
            raise ValueError("side must be 'stable' or 'unstable'")
        sgn = 1.0 if self.side == "stable" else -1.0
        t_lo = tau_of_u(U_GUARD)
        t_hi = tau_of_u(self.u_far)
        taus = np.linspace(t_lo, t_hi, self.n_grid) * sgn
        taus = np.sort(taus)
        self._tau = taus
        self._u = u_of_tau(taus)
        om = self.orbit.omega
        nq = self.n_gamma
        if self.drop_potential:
            Fh = np.zeros((4, nq, self.n_grid), dtype=complex)
        else:
            Fh = np.stack([_p1_harmonics(self.orbit, u, nq) for u in self._u],
                          axis=2)
        self._q = np.fft.fftfreq(nq, d=1.0 / nq).astype(int)
        from_far = self.side == "stable"
        # single operators per component and harmonic
        G = np.zeros_like(Fh)
        for ci in range(4):
            for k, q in enumerate(self._q):
                I = _filon_cumulative(self._u, Fh[ci, k], q * om, from_far)
                phase = np.exp(-1j * q * om * self._u)
                G[ci, k] = (-1.0 if from_far else 1.0) * phase * I
        self._G = G
        # nested operators: G(f1 G(h1)) + G(f2 G(h2)) - G(f2 G(x0 h3 + e0 h4))
        f1, f2 = f1_f2(self._u, self.orbit)
        e0, x0 = self.orbit.eta0, self.orbit.xi0
        inner = (f1 * G[0] + f2 * G[1]
                 - f2 * (x0 * G[2] + e0 * G[3]))
        K = np.zeros_like(inner)
        for k, q in enumerate(self._q):
            # the phases of G-output and the outer kernel cancel exactly
            I = _filon_cumulative(self._u, inner[k] * np.exp(1j * q * om * self._u),
                                  0.0, from_far)
            K[k] = (-1.0 if from_far else 1.0) * np.exp(-1j * q * om * self._u) * I
        self._K = K

    def _interp(self, arr, u):
        flat = arr.reshape(-1, arr.shape[-1])
        vals = np.array([np.interp(u, self._u, row.real)
                         + 1j * np.interp(u, self._u, row.imag) for row in flat])
        return vals.reshape(arr.shape[:-1])

    def fiber(self, u: float, gamma, delta_z=(0j, 0j)):
        """First-order (Y, Lambda, alpha, beta) at (u, gamma).

        ``delta_z = (delta_eta, delta_xi)`` shifts the target orbit
        (stable side); returns zeros when both the potential is dropped
        and ``delta_z`` vanishes.
        """
        sgn_ok = (u >= U_GUARD) if self.side == "stable" else (u <= -U_GUARD)
        if not sgn_ok or abs(u) > self.u_far:
            raise ValueError(f"u = {u} outside the {self.side}-side domain")
        gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
        Gv = self._interp(self._G, u)       # (4, nq)
        Kv = self._interp(self._K, u)       # (nq,)
        phases = np.exp(1j * np.outer(self._q, gamma))   # (nq, ng)
        base = Gv @ phases                   # (4, ng)
        Knest = Kv @ phases                  # (ng,)
        e0, x0 = self.orbit.eta0, self.orbit.xi0
        Z = base
        Z[2] += e0 * Knest
        Z[3] += -x0 * Knest
        de, dx = delta_z
        if de != 0 or dx != 0:
            Phi = fundamental_matrix(u, self.orbit)
            extra = Phi @ np.array([0, 0, de, dx], dtype=complex)
            Z = Z + extra[:, None]
        return Z if Z.shape[1] > 1 else Z[:, 0]


def first_order_correction(u: float, gamma, orbit: InfinityOrbit,
                           delta_z=(0j, 0j), side: str = "stable",
                           drop_potential: bool = False,
                           operator: CorrectionOperator | None = None):
    """Fiber values (Y, Lambda, alpha, beta) of the first-order manifold.

    Convenience wrapper constructing a :class:`CorrectionOperator`; reuse
    the operator directly for grids.
    """
    op = operator or CorrectionOperator(orbit, side, drop_potential=drop_potential)
    return op.fiber(u, gamma, delta_z)
