"""Hamiltonians, vector fields, and the adaptive integrator.

The reduced flow lives on the physical slice ``xi = conj(eta)`` and is
integrated in the 6 real variables ``(lambda, L, Re eta, Im eta, r, y)``
with ``Theta`` as a parameter.  Time is the unscaled reduced time; the
paper-style rescalings are applied explicitly by callers that need them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .charts import CartesianState, ReducedState
from .masses import MassConstants
from .potential import PotentialEval, potential_W

COLLISION_GUARD = 1e-8


# ---------------------------------------------------------------------------
# Cartesian side


def hamiltonian_cartesian(s: CartesianState, c: MassConstants) -> float:
    T = (s.p0 @ s.p0) / (2 * c.m0) + (s.p1 @ s.p1) / (2 * c.m1) + (s.p2 @ s.p2) / (2 * c.m2)
    r01 = np.linalg.norm(s.q1 - s.q0)
    r02 = np.linalg.norm(s.q2 - s.q0)
    r12 = np.linalg.norm(s.q2 - s.q1)
    return float(T - c.m0 * c.m1 / r01 - c.m0 * c.m2 / r02 - c.m1 * c.m2 / r12)


def vector_field_cartesian(s: CartesianState, c: MassConstants) -> CartesianState:
    """Newtonian field: returns d/dt of every component as a CartesianState."""
    pairs = ((s.q0, s.q1), (s.q0, s.q2), (s.q1, s.q2))
    for a, b in pairs:
        if np.linalg.norm(b - a) < COLLISION_GUARD:
            raise ValueError("collision: bodies closer than the guard radius")

    def acc(qi, qj, mj):
        d = qj - qi
        return mj * d / np.linalg.norm(d) ** 3

    a0 = acc(s.q0, s.q1, c.m1) + acc(s.q0, s.q2, c.m2)
    a1 = acc(s.q1, s.q0, c.m0) + acc(s.q1, s.q2, c.m2)
    a2 = acc(s.q2, s.q0, c.m0) + acc(s.q2, s.q1, c.m1)
    return CartesianState(q0=s.p0 / c.m0, q1=s.p1 / c.m1, q2=s.p2 / c.m2,
                          p0=c.m0 * a0, p1=c.m1 * a1, p2=c.m2 * a2)


# ---------------------------------------------------------------------------
# reduced side


def hamiltonian_reduced(s: ReducedState, c: MassConstants,
                        drop_potential: bool = False) -> float:
    G = s.Theta - s.L + (s.eta * s.xi).real
    val = (-c.nu / (2 * s.L**2) + 0.5 * s.y**2 + G**2 / (2 * s.r**2) - 1.0 / s.r)
    if not drop_potential:
        W = potential_W(s.lam, s.L, s.eta, s.xi, s.r, c, derivatives=False).value
        val += complex(W).real
    return float(val)


def vector_field_reduced(s: ReducedState, c: MassConstants,
                         drop_potential: bool = False) -> ReducedState:
    """Right-hand side of the reduced equations, packaged as a state."""
    G = complex(s.Theta - s.L + s.eta * s.xi)
    if drop_potential:
        Wv = PotentialEval(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    else:
        Wv = potential_W(s.lam, s.L, s.eta, s.xi, s.r, c)
    dlam = c.nu / s.L**3 - G / s.r**2 + complex(Wv.d_L)
    dL = -complex(Wv.d_lambda)
    deta = -1j * (G / s.r**2) * s.eta - 1j * complex(Wv.d_xi)
    dxi = 1j * (G / s.r**2) * s.xi + 1j * complex(Wv.d_eta)
    dr = s.y
    dy = G**2 / s.r**3 - 1.0 / s.r**2 - complex(Wv.d_r)
    return ReducedState(lam=dlam.real, L=dL.real, eta=complex(deta),
                        xi=complex(dxi), r=float(dr), y=dy.real, Theta=0.0)


def pack_reduced(s: ReducedState) -> np.ndarray:
    """Physical-slice state to the 6 real integration variables."""
    return np.array([s.lam, s.L, s.eta.real, s.eta.imag, s.r, s.y])


def unpack_reduced(v: np.ndarray, Theta: float) -> ReducedState:
    eta = complex(v[2], v[3])
    return ReducedState(lam=float(v[0]), L=float(v[1]), eta=eta,
                        xi=eta.conjugate(), r=float(v[4]), y=float(v[5]), Theta=Theta)


def reduced_rhs(t, v, c: MassConstants, Theta: float, drop_potential: bool = False):
    s = unpack_reduced(v, Theta)
    if s.r < COLLISION_GUARD:
        raise ValueError("outer radius below collision guard")
    d = vector_field_reduced(s, c, drop_potential=drop_potential)
    return np.array([d.lam, d.L, d.eta.real, d.eta.imag, d.r, d.y])


# ---------------------------------------------------------------------------
# integrator


@dataclass
class IntegratorConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_step: float = np.inf
    method: str = "DOP853"
    first_step: float | None = None

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class Trajectory:
    """Integration result: samples, dense output, refined section events."""
    t: np.ndarray
    states: np.ndarray            # shape (n, dim), rows are packed states
    Theta: float
    events: dict = field(default_factory=dict)
    sol: object = None            # scipy OdeSolution (dense output)
    success: bool = True
    message: str = ""

    def state(self, i: int) -> ReducedState:
        return unpack_reduced(self.states[i], self.Theta)

    def at(self, t: float) -> ReducedState:
        return unpack_reduced(self.sol(t), self.Theta)

    def energy(self, c: MassConstants, drop_potential: bool = False) -> np.ndarray:
        return np.array([hamiltonian_reduced(self.state(i), c, drop_potential)
                         for i in range(len(self.t))])


def integrate(initial: ReducedState, c: MassConstants, t_span,
              config: IntegratorConfig | None = None,
              drop_potential: bool = False,
              events=None, dense: bool = True, t_eval=None) -> Trajectory:
    """Integrate the reduced flow with adaptive steps and event refinement.

    ``events`` maps names to ``f(t, v) -> float`` sign-change functions
    (scipy conventions: attributes ``terminal`` and ``direction`` honored).
    Event times are refined on the dense interpolant to ~1e-10.
    """
    cfg = config or IntegratorConfig()
    ev_names, ev_funcs = [], []
    if events:
        for name, f in events.items():
            def wrapped(t, v, *args, _f=f):
                return _f(t, v)
            wrapped.terminal = getattr(f, "terminal", False)
            wrapped.direction = getattr(f, "direction", 0.0)
            ev_names.append(name)
            ev_funcs.append(wrapped)
    sol = solve_ivp(
        reduced_rhs, t_span, pack_reduced(initial),
        args=(c, initial.Theta, drop_potential),
        method=cfg.method, rtol=cfg.rel_tol, atol=cfg.abs_tol,
        max_step=cfg.max_step, dense_output=dense,
        events=ev_funcs or None, t_eval=t_eval,
        first_step=cfg.first_step,
    )
    events_out = {}
    if ev_funcs:
        for name, te, ye in zip(ev_names, sol.t_events, sol.y_events):
            events_out[name] = [(float(t), np.array(y)) for t, y in zip(te, ye)]
    return Trajectory(t=sol.t, states=sol.y.T, Theta=initial.Theta,
                      events=events_out, sol=sol.sol if dense else None,
                      success=sol.success, message=sol.message)


def trajectory_to_csv_rows(traj: Trajectory, c: MassConstants):
    """Rows (t, lambda, L, Re eta, Im eta, r, y, energy, Theta) for export."""
    rows = []
    for i, t in enumerate(traj.t):
        s = traj.state(i)
        rows.append((t, s.lam, s.L, s.eta.real, s.eta.imag, s.r, s.y,
                     hamiltonian_reduced(s, c), s.Theta))
    return rows
