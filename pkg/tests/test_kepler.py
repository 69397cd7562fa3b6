import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from p3bp.kepler import solve_kepler, true_anomaly


def bisect_oracle(ell, e):
    lo, hi = ell - 1 - e, ell + 1 + e
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if mid - e * np.sin(mid) <= ell:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_zero_mean_anomaly():
    assert solve_kepler(0.0, 0.3) == 0.0


def test_pi_mean_anomaly():
    assert solve_kepler(np.pi, 0.7) == pytest.approx(np.pi, abs=1e-14)


def test_against_bisection_oracle():
    # frozen from the bisection oracle on E - 0.5 sin E = 1
    E = solve_kepler(1.0, 0.5)
    assert E == pytest.approx(1.4987011335178482, abs=1e-12)
    assert E == pytest.approx(bisect_oracle(1.0, 0.5), abs=1e-12)


@given(st.floats(-50, 50), st.floats(0, 0.95))
@settings(max_examples=300)
def test_residual_and_branch(ell, e):
    E = solve_kepler(ell, e)
    tol = max(1e-14, 8 * np.finfo(float).eps * abs(ell))
    assert abs(E - e * np.sin(E) - ell) < tol
    assert -np.pi < E - ell < np.pi


def test_residual_grid():
    ells = np.linspace(-2 * np.pi, 2 * np.pi, 101)
    for e in np.linspace(0.0, 0.95, 20):
        E = solve_kepler(ells, e)
        assert np.max(np.abs(E - e * np.sin(E) - ells)) < 1e-14


def test_eccentricity_domain_error():
    with pytest.raises(ValueError):
        solve_kepler(1.0, 1.0)
    with pytest.raises(ValueError):
        solve_kepler(1.0, -0.1)


@given(st.floats(-10, 10), st.floats(0, 0.9))
def test_true_anomaly_same_branch(ell, e):
    E = solve_kepler(ell, e)
    v = true_anomaly(E, e)
    # v and E lie on the same revolution and agree at apsides
    assert abs(v - E) < np.pi
