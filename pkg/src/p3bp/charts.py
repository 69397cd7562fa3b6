"""Coordinate charts of the hierarchical three-body problem.

Implements the pipeline

    cartesian <-> jacobi <-> polar <-> delaunay <-> rdelaunay <-> poincare

where ``polar`` carries the mass-scaled variables, ``rdelaunay`` is the
rotation-reduced Delaunay chart (angle ``phi = g - alpha``, parameter
``Theta = G + Gamma``) and ``poincare`` is the 6-dimensional reduced chart
``(lambda, L, eta, xi, r, y; Theta)`` regular at circular inner motion.
Conversions exist only between adjacent charts; ``chart_convert`` composes
them and reports the first failing leg.

Conventions: the center of mass is fixed at the origin when lifting back
to Cartesian, and the rotation angle ``alpha`` defaults to 0 when lifting
out of the reduced charts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kepler import solve_kepler, true_anomaly
from .masses import MassConstants

E_CIRCULAR_MIN = 1e-10   # Delaunay charts reject e_c below this
E_MAX = 1.0 - 1e-12


class ChartError(ValueError):
    """Conversion failed; carries the offending leg."""

    def __init__(self, leg: str, message: str):
        self.leg = leg
        super().__init__(f"[{leg}] {message}")


class SingularChartError(ChartError):
    """State sits on a chart singularity (circular inner orbit, collision)."""


@dataclass(frozen=True)
class CartesianState:
    """Positions and momenta of the three bodies, p_i = m_i qdot_i."""
    q0: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray


@dataclass(frozen=True)
class JacobiState:
    """Translation-reduced coordinates (total momentum fixed to zero)."""
    Q1: np.ndarray
    P1: np.ndarray
    Q2: np.ndarray
    P2: np.ndarray


@dataclass(frozen=True)
class PolarState:
    """Mass-scaled polar variables (rho, z) inner, (r, y) outer."""
    rho: float
    z: float
    theta: float
    Gamma: float
    r: float
    y: float
    alpha: float
    G: float


@dataclass(frozen=True)
class DelaunayState:
    """Delaunay elements of the inner pair plus outer polar variables."""
    ell: float
    L: float
    g: float
    Gamma: float
    r: float
    y: float
    alpha: float
    G: float


@dataclass(frozen=True)
class RDelaunayState:
    """Rotation-reduced Delaunay chart; Theta is a parameter of the flow."""
    ell: float
    L: float
    phi: float
    Gamma: float
    r: float
    y: float
    Theta: float


@dataclass(frozen=True)
class ReducedState:
    """Reduced Poincare variables (lambda, L, eta, xi, r, y; Theta).

    On the physical slice ``xi == conj(eta)``.  ``eta`` and ``xi`` are kept
    as independent complex entries so that complexified evaluations remain
    possible.
    """
    lam: float
    L: float
    eta: complex
    xi: complex
    r: float
    y: float
    Theta: float


@dataclass(frozen=True)
class McGeheeState:
    """McGehee chart near infinity: r = 2/x^2, twisted pair (a, b)."""
    lam: float
    L: float
    a: complex
    b: complex
    x: float
    y: float
    Theta: float
    twisted: bool
    scaled: bool


# ---------------------------------------------------------------------------
# adjacent-leg conversions


def cartesian_to_jacobi(s: CartesianState, c: MassConstants) -> JacobiState:
    P0 = s.p0 + s.p1 + s.p2
    scale = max(np.linalg.norm(s.p0), np.linalg.norm(s.p1), np.linalg.norm(s.p2), 1.0)
    if np.linalg.norm(P0) > 1e-9 * scale:
        raise ChartError("cartesian->jacobi", f"total momentum {P0} is not zero")
    Q1 = s.q1 - s.q0
    Q2 = s.q2 - (c.m0 * s.q0 + c.m1 * s.q1) / (c.m0 + c.m1)
    P1 = s.p1 + c.sigma0 * s.p2
    P2 = np.asarray(s.p2, dtype=float)
    return JacobiState(Q1=Q1, P1=P1, Q2=Q2, P2=P2)


def jacobi_to_cartesian(s: JacobiState, c: MassConstants) -> CartesianState:
    M = c.total_mass
    q0 = -((c.m1 + c.m2 * c.sigma0) * s.Q1 + c.m2 * s.Q2) / M
    q1 = q0 + s.Q1
    q2 = s.Q2 + q0 + c.sigma0 * s.Q1
    p2 = np.asarray(s.P2, dtype=float)
    p1 = s.P1 - c.sigma0 * s.P2
    p0 = -p1 - p2
    return CartesianState(q0=q0, q1=q1, q2=q2, p0=p0, p1=p1, p2=p2)


def _plane_to_polar(Q, P):
    rho = float(np.hypot(Q[0], Q[1]))
    if rho <= 0:
        raise ChartError("jacobi->polar", "collision: zero separation")
    theta = float(np.arctan2(Q[1], Q[0]))
    er = Q / rho
    z = float(P @ er)
    Gamma = float(Q[0] * P[1] - Q[1] * P[0])
    return rho, z, theta, Gamma


def _polar_to_plane(rho, z, theta, Gamma):
    e = np.array([np.cos(theta), np.sin(theta)])
    eperp = np.array([-np.sin(theta), np.cos(theta)])
    return rho * e, z * e + (Gamma / rho) * eperp


def jacobi_to_polar(s: JacobiState, c: MassConstants) -> PolarState:
    rho, z, theta, Gamma = _plane_to_polar(s.Q1, s.P1)
    r, y, alpha, G = _plane_to_polar(s.Q2, s.P2)
    return PolarState(
        rho=c.k_inner * rho, z=z / c.k_inner, theta=theta, Gamma=Gamma,
        r=c.k_outer * r, y=y / c.k_outer, alpha=alpha, G=G,
    )


def polar_to_jacobi(s: PolarState, c: MassConstants) -> JacobiState:
    Q1, P1 = _polar_to_plane(s.rho / c.k_inner, s.z * c.k_inner, s.theta, s.Gamma)
    Q2, P2 = _polar_to_plane(s.r / c.k_outer, s.y * c.k_outer, s.alpha, s.G)
    return JacobiState(Q1=Q1, P1=P1, Q2=Q2, P2=P2)


def polar_to_delaunay(s: PolarState, c: MassConstants) -> DelaunayState:
    h_in = 0.5 * s.z**2 + 0.5 * s.Gamma**2 / s.rho**2 - 1.0 / s.rho
    if h_in >= 0:
        raise ChartError("polar->delaunay", f"inner pair not elliptic (h={h_in:.3g})")
    if s.Gamma <= 0:
        raise ChartError("polar->delaunay", "retrograde or degenerate inner orbit")
    a = -0.5 / h_in
    L = np.sqrt(a)
    e2 = 1.0 - s.Gamma**2 / L**2
    e_c = np.sqrt(max(e2, 0.0))
    if e_c < E_CIRCULAR_MIN:
        raise SingularChartError("polar->delaunay",
                                 f"circular inner orbit (e={e_c:.2e}); use the poincare chart")
    if e_c > E_MAX:
        raise ChartError("polar->delaunay", f"eccentricity {e_c} too close to 1")
    cosE = (1.0 - s.rho / a) / e_c
    sinE = s.z * s.rho / (L * e_c)
    E = np.arctan2(sinE, cosE)
    ell = E - e_c * np.sin(E)
    v = true_anomaly(E, e_c)
    g = s.theta - v
    return DelaunayState(ell=float(ell), L=float(L), g=float(g), Gamma=s.Gamma,
                         r=s.r, y=s.y, alpha=s.alpha, G=s.G)


def delaunay_to_polar(s: DelaunayState, c: MassConstants) -> PolarState:
    e2 = 1.0 - s.Gamma**2 / s.L**2
    if e2 < 0:
        raise ChartError("delaunay->polar", f"|Gamma| > L ({s.Gamma}, {s.L})")
    e_c = np.sqrt(e2)
    if e_c < E_CIRCULAR_MIN:
        raise SingularChartError("delaunay->polar", "circular inner orbit: g undefined")
    E = solve_kepler(s.ell, e_c)
    rho = s.L**2 * (1.0 - e_c * np.cos(E))
    z = e_c * np.sin(E) / (s.L * (1.0 - e_c * np.cos(E)))
    v = true_anomaly(E, e_c)
    theta = s.g + v
    return PolarState(rho=float(rho), z=float(z), theta=float(theta), Gamma=s.Gamma,
                      r=s.r, y=s.y, alpha=s.alpha, G=s.G)


def reduce_rotation(s: DelaunayState) -> RDelaunayState:
    """Quotient by the rotation symmetry: phi = g - alpha, Theta = G + Gamma."""
    return RDelaunayState(ell=s.ell, L=s.L, phi=s.g - s.alpha, Gamma=s.Gamma,
                          r=s.r, y=s.y, Theta=s.G + s.Gamma)


def lift_rotation(s: RDelaunayState, alpha: float = 0.0) -> DelaunayState:
    """Inverse of :func:`reduce_rotation` for a chosen rotation angle."""
    return DelaunayState(ell=s.ell, L=s.L, g=s.phi + alpha, Gamma=s.Gamma,
                         r=s.r, y=s.y, alpha=alpha, G=s.Theta - s.Gamma)


def rdelaunay_to_poincare(s: RDelaunayState) -> ReducedState:
    if s.Gamma > s.L:
        raise ChartError("rdelaunay->poincare", f"Gamma={s.Gamma} exceeds L={s.L}")
    root = np.sqrt(s.L - s.Gamma)
    eta = root * np.exp(1j * s.phi)
    xi = root * np.exp(-1j * s.phi)
    return ReducedState(lam=s.ell + s.phi, L=s.L, eta=complex(eta), xi=complex(xi),
                        r=s.r, y=s.y, Theta=s.Theta)


def poincare_to_rdelaunay(s: ReducedState) -> RDelaunayState:
    prod = s.eta * s.xi
    if abs(prod.imag) > 1e-12 * max(1.0, abs(prod)):
        raise ChartError("poincare->rdelaunay", "eta*xi not real: off the physical slice")
    ex2 = prod.real
    if ex2 < E_CIRCULAR_MIN**2:
        raise SingularChartError("poincare->rdelaunay",
                                 "circular inner orbit: Delaunay angles undefined")
    phi = float(np.angle(s.eta))
    return RDelaunayState(ell=s.lam - phi, L=s.L, phi=phi, Gamma=s.L - ex2,
                          r=s.r, y=s.y, Theta=s.Theta)


# ---------------------------------------------------------------------------
# pipeline driver

CHARTS = ("cartesian", "jacobi", "polar", "delaunay", "rdelaunay", "poincare")

_FORWARD = {
    ("cartesian", "jacobi"): lambda s, c, kw: cartesian_to_jacobi(s, c),
    ("jacobi", "polar"): lambda s, c, kw: jacobi_to_polar(s, c),
    ("polar", "delaunay"): lambda s, c, kw: polar_to_delaunay(s, c),
    ("delaunay", "rdelaunay"): lambda s, c, kw: reduce_rotation(s),
    ("rdelaunay", "poincare"): lambda s, c, kw: rdelaunay_to_poincare(s),
    ("jacobi", "cartesian"): lambda s, c, kw: jacobi_to_cartesian(s, c),
    ("polar", "jacobi"): lambda s, c, kw: polar_to_jacobi(s, c),
    ("delaunay", "polar"): lambda s, c, kw: delaunay_to_polar(s, c),
    ("rdelaunay", "delaunay"): lambda s, c, kw: lift_rotation(s, kw.get("alpha", 0.0)),
    ("poincare", "rdelaunay"): lambda s, c, kw: poincare_to_rdelaunay(s),
}


def chart_convert(state, from_chart: str, to_chart: str, constants: MassConstants,
                  alpha: float = 0.0):
    """Convert ``state`` along the chart pipeline.

    Composes adjacent-leg conversions; on failure the raised
    :class:`ChartError` names the offending leg.  ``alpha`` is the rotation
    angle used when lifting out of the reduced charts.
    """
    for name in (from_chart, to_chart):
        if name not in CHARTS:
            raise ValueError(f"unknown chart {name!r}; valid: {CHARTS}")
    i, j = CHARTS.index(from_chart), CHARTS.index(to_chart)
    step = 1 if j >= i else -1
    out = state
    for k in range(i, j, step):
        pair = (CHARTS[k], CHARTS[k + step])
        out = _FORWARD[pair](out, constants, {"alpha": alpha})
    return out


# ---------------------------------------------------------------------------
# eccentricity and conserved quantities


def eccentricity_poincare(eta: complex, xi: complex, L: float) -> float:
    """Eccentricity e_c = (1/L) sqrt(eta*xi) sqrt(2L - eta*xi)."""
    prod = complex(eta * xi)
    if abs(prod.imag) > 1e-12 * max(1.0, abs(prod)):
        raise ValueError("eta*xi not real: off the physical slice")
    ex2 = prod.real
    if not 0.0 <= ex2 < 2.0 * L:
        raise ValueError(f"eta*xi = {ex2} outside [0, 2L) for L = {L}")
    e_c = np.sqrt(ex2) * np.sqrt(2.0 * L - ex2) / L
    if e_c >= 1.0:
        raise ValueError(f"eccentricity {e_c} not interior to [0, 1)")
    return float(e_c)


def eccentricity_delaunay(L: float, Gamma: float) -> float:
    return float(np.sqrt(max(0.0, 1.0 - Gamma**2 / L**2)))


def total_angular_momentum(state, chart: str) -> float:
    """Theta in any chart (invariant under all legs)."""
    if chart == "cartesian":
        return float(sum(q[0] * p[1] - q[1] * p[0]
                         for q, p in ((state.q0, state.p0), (state.q1, state.p1),
                                      (state.q2, state.p2))))
    if chart == "jacobi":
        return float(state.Q1[0] * state.P1[1] - state.Q1[1] * state.P1[0]
                     + state.Q2[0] * state.P2[1] - state.Q2[1] * state.P2[0])
    if chart in ("polar", "delaunay"):
        return float(state.Gamma + state.G)
    if chart in ("rdelaunay", "poincare"):
        return float(state.Theta)
    raise ValueError(f"unknown chart {chart!r}")


# ---------------------------------------------------------------------------
# McGehee chart near infinity


def to_mcgehee(s: ReducedState, constants: MassConstants, L0: float | None = None,
               apply_twist: bool = True, apply_scaling: bool = False) -> McGeheeState:
    """Reduced Poincare state to McGehee variables (x = sqrt(2/r)).

    The twist ``a = eta exp(-i(Theta-L+eta xi) y)`` straightens the mean
    rotation of the inner pair near infinity; the optional scaling
    multiplies (x, y) by K0^(1/3) with K0 = L0^3/(4 nu).
    """
    if s.r <= 0:
        raise ValueError(f"outer radius must be positive, got {s.r}")
    x = float(np.sqrt(2.0 / s.r))
    y = s.y
    if apply_twist:
        G = s.Theta - s.L + s.eta * s.xi
        a = s.eta * np.exp(-1j * G * s.y)
        b = s.xi * np.exp(1j * G * s.y)
    else:
        a, b = s.eta, s.xi
    if apply_scaling:
        K0 = (L0 if L0 is not None else s.L) ** 3 / (4.0 * constants.nu)
        f = K0 ** (1.0 / 3.0)
        x, y = f * x, f * y
    return McGeheeState(lam=s.lam, L=s.L, a=complex(a), b=complex(b), x=x, y=float(y),
                        Theta=s.Theta, twisted=apply_twist, scaled=apply_scaling)


def from_mcgehee(s: McGeheeState, constants: MassConstants,
                 L0: float | None = None) -> ReducedState:
    x, y = s.x, s.y
    if s.scaled:
        K0 = (L0 if L0 is not None else s.L) ** 3 / (4.0 * constants.nu)
        f = K0 ** (1.0 / 3.0)
        x, y = x / f, y / f
    if x <= 0:
        raise ValueError("x must be positive to recover a finite radius")
    r = 2.0 / x**2
    if s.twisted:
        # G depends on eta*xi = a*b (the twist preserves the product)
        G = s.Theta - s.L + s.a * s.b
        eta = s.a * np.exp(1j * G * y)
        xi = s.b * np.exp(-1j * G * y)
    else:
        eta, xi = s.a, s.b
    return ReducedState(lam=s.lam, L=s.L, eta=complex(eta), xi=complex(xi),
                        r=float(r), y=float(y), Theta=s.Theta)
