import numpy as np
import pytest

from p3bp.charts import (
    DelaunayState,
    ReducedState,
    chart_convert,
)
from p3bp.masses import derive_constants


@pytest.fixture(scope="session")
def c121():
    return derive_constants(1.0, 2.0, 1.0)


@pytest.fixture(scope="session")
def c111():
    return derive_constants(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def c123():
    return derive_constants(1.0, 2.0, 3.0)


def random_delaunay(rng, n=1):
    """Random nonsingular Delaunay states (elliptic inner, far outer)."""
    out = []
    for _ in range(n):
        L = rng.uniform(0.8, 1.4)
        e = rng.uniform(0.05, 0.85)
        Gamma = L * np.sqrt(1 - e**2)
        out.append(DelaunayState(
            ell=rng.uniform(0, 2 * np.pi), L=L,
            g=rng.uniform(0, 2 * np.pi), Gamma=Gamma,
            r=rng.uniform(8.0, 40.0), y=rng.uniform(-0.25, 0.25),
            alpha=rng.uniform(0, 2 * np.pi), G=rng.uniform(4.0, 12.0),
        ))
    return out if n > 1 else out[0]


def random_reduced(rng, Theta=8.0, n=1, r_range=(8.0, 40.0)):
    out = []
    for _ in range(n):
        L = rng.uniform(0.8, 1.4)
        amp = rng.uniform(0.02, 0.5)
        phase = rng.uniform(0, 2 * np.pi)
        eta = amp * np.exp(1j * phase)
        out.append(ReducedState(
            lam=rng.uniform(0, 2 * np.pi), L=L, eta=eta, xi=eta.conjugate(),
            r=rng.uniform(*r_range), y=rng.uniform(-0.25, 0.25), Theta=Theta,
        ))
    return out if n > 1 else out[0]


def state_to_vec(state, chart):
    if chart == "cartesian":
        return np.concatenate([state.q0, state.q1, state.q2,
                               state.p0, state.p1, state.p2])
    if chart == "jacobi":
        return np.concatenate([state.Q1, state.P1, state.Q2, state.P2])
    if chart == "polar":
        return np.array([state.rho, state.z, state.theta, state.Gamma,
                         state.r, state.y, state.alpha, state.G])
    if chart == "delaunay":
        return np.array([state.ell, state.L, state.g, state.Gamma,
                         state.r, state.y, state.alpha, state.G])
    if chart == "rdelaunay":
        return np.array([state.ell, state.L, state.phi, state.Gamma,
                         state.r, state.y, state.Theta])
    if chart == "poincare":
        return np.array([state.lam, state.L, state.eta.real, state.eta.imag,
                         state.r, state.y, state.Theta])
    raise ValueError(chart)


def vec_to_state(v, chart):
    from p3bp.charts import (CartesianState, JacobiState, PolarState,
                             DelaunayState, RDelaunayState, ReducedState)
    if chart == "cartesian":
        return CartesianState(q0=v[0:2], q1=v[2:4], q2=v[4:6],
                              p0=v[6:8], p1=v[8:10], p2=v[10:12])
    if chart == "jacobi":
        return JacobiState(Q1=v[0:2], P1=v[2:4], Q2=v[4:6], P2=v[6:8])
    if chart == "polar":
        return PolarState(*v)
    if chart == "delaunay":
        return DelaunayState(*v)
    if chart == "rdelaunay":
        return RDelaunayState(*v)
    if chart == "poincare":
        eta = complex(v[2], v[3])
        return ReducedState(lam=v[0], L=v[1], eta=eta, xi=eta.conjugate(),
                            r=v[4], y=v[5], Theta=v[6])
    raise ValueError(chart)


def max_state_diff(a, b, chart, mod_angles=True):
    va, vb = state_to_vec(a, chart), state_to_vec(b, chart)
    d = np.abs(va - vb)
    if mod_angles:
        angle_idx = {"polar": [2, 6], "delaunay": [0, 2, 6], "rdelaunay": [0, 2],
                     "poincare": [0]}.get(chart, [])
        for i in angle_idx:
            d[i] = np.abs((va[i] - vb[i] + np.pi) % (2 * np.pi) - np.pi)
    return float(d.max())
