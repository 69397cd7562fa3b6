"""Kepler equation solver and elliptic-motion helpers."""

from __future__ import annotations

import numpy as np

_MAX_NEWTON = 50
_TOL = 1e-14


def solve_kepler(ell, e_c):
    """Solve E - e_c*sin(E) = ell for the eccentric anomaly E.

    Newton iteration seeded with ``E0 = ell + 0.85*e_c*sign(sin ell)``,
    falling back to bisection if Newton has not converged in 50 steps.
    The branch is fixed so that ``E - ell`` lies in ``(-pi, pi)``.

    Parameters
    ----------
    ell : float or ndarray
        Mean anomaly (any real value).
    e_c : float
        Eccentricity, ``0 <= e_c < 1``.

    Returns
    -------
    E : float or ndarray
        Eccentric anomaly with residual below 1e-14.
    """
    if not 0.0 <= e_c < 1.0:
        raise ValueError(f"eccentricity must be in [0, 1), got {e_c}")

    scalar = np.isscalar(ell)
    ell = np.atleast_1d(np.asarray(ell, dtype=float))
    # reduce to principal branch: E - ell in (-pi, pi) follows from solving
    # with ell reduced to [-pi, pi] and shifting back
    k = np.round(ell / (2 * np.pi))
    ell_r = ell - 2 * np.pi * k

    E = ell_r + 0.85 * e_c * np.sign(np.sin(ell_r))
    converged = np.zeros_like(ell_r, dtype=bool)
    for _ in range(_MAX_NEWTON):
        f = E - e_c * np.sin(E) - ell_r
        converged = np.abs(f) < _TOL
        if converged.all():
            break
        E = E - f / (1.0 - e_c * np.cos(E))
    if not converged.all():
        for i in np.nonzero(~converged)[0]:
            E[i] = _bisect_kepler(ell_r[i], e_c)

    E = E + 2 * np.pi * k
    # one polish step on the unreduced equation (residual ~ eps*|ell|)
    E = E - (E - e_c * np.sin(E) - ell) / (1.0 - e_c * np.cos(E))
    return float(E[0]) if scalar else E


def _bisect_kepler(ell, e_c):
    lo, hi = ell - 1.0 - e_c, ell + 1.0 + e_c
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - e_c * np.sin(mid) - ell <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return 0.5 * (lo + hi)


def true_anomaly(E, e_c):
    """True anomaly from eccentric anomaly, continuous across branches."""
    half = 0.5 * np.asarray(E)
    v = 2.0 * np.arctan2(np.sqrt(1 + e_c) * np.sin(half), np.sqrt(1 - e_c) * np.cos(half))
    # keep v on the same 2*pi branch as E
    v = v + 2 * np.pi * np.round((np.asarray(E) - v) / (2 * np.pi))
    return v if v.shape else float(v)
