"""Mass-derived constants of the hierarchical planar three-body problem.

Everything downstream (potential, Melnikov integrals, scattering maps) is
expressed through a handful of combinations of the three masses.  Two
parameter sets coexist:

* the *perturbative* set ``(nu, nu_tilde, sigma0_tilde, sigma1_tilde, N2,
  N3)`` used by the near-integrable reduced model and all asymptotic
  formulas.  The weights ``sigma*_tilde`` are normalized so that the
  multipole moments of the perturbing potential are exactly ``N2`` and
  ``N3``, which keeps quadrature and closed-form routes consistent;
* the *exact-reduction* set (``exact()``) whose coefficients make the
  reduced Hamiltonian the literal image of the Newtonian one under the
  Jacobi/polar/scaling chain.  Cross-chart energy checks use this set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class MassConstants:
    """All mass-derived parameters, plus the scaling factors of the chain."""

    m0: float
    m1: float
    m2: float
    mu1: float
    mu2: float
    sigma0: float
    sigma1: float
    nu: float
    nu_tilde: float
    sigma0_tilde: float
    sigma1_tilde: float
    N2: float
    N3: float
    unequal_inner_masses: bool
    # symplectic scaling factors of the coordinate chain
    k_inner: float
    k_outer: float
    time_factor: float

    @property
    def total_mass(self) -> float:
        return self.m0 + self.m1 + self.m2

    def exact(self) -> "MassConstants":
        """Constants of the exact Newton reduction.

        Returns a record whose ``nu`` is the true inner Kepler coefficient,
        whose potential prefactor (stored in ``nu_tilde``) is ``1/(m0+m1)``
        and whose weights are the unscaled ``s*sigma_i``.  Feeding this
        record to the reduced Hamiltonian / vector field reproduces the
        Cartesian dynamics exactly through the chart chain.
        """
        m01 = self.m0 + self.m1
        s = self.k_outer / self.k_inner
        return replace(
            self,
            nu=self.mu1 * self.m0**2 * self.m1**2 / self.time_factor,
            nu_tilde=1.0 / m01,
            sigma0_tilde=s * self.sigma0,
            sigma1_tilde=s * self.sigma1,
        )


def derive_constants(m0: float, m1: float, m2: float) -> MassConstants:
    """Compute every mass-derived constant from the three masses.

    Parameters
    ----------
    m0, m1, m2 : float
        Masses of the inner pair (m0, m1) and the far body (m2), all
        strictly positive.

    Returns
    -------
    MassConstants

    Raises
    ------
    ValueError
        If any mass is not strictly positive.
    """
    if not (m0 > 0 and m1 > 0 and m2 > 0):
        raise ValueError(f"masses must be strictly positive, got {(m0, m1, m2)}")

    m01 = m0 + m1
    M = m01 + m2
    mu1 = m0 * m1 / m01
    mu2 = m01 * m2 / M
    sigma0 = m1 / m01
    sigma1 = m0 / m01

    k_inner = mu1 * m0 * m1
    k_outer = mu2 * m2 * m01
    time_factor = mu2 * m2**2 * m01**2

    nu = mu1 * m0 * m1 / (mu2 * m2 * m01)
    nu_tilde = m01 * m2**2

    N2 = m2**4 * m01**5 / (m0**3 * m1**3)
    N3 = m2**6 * m01**7 / (m0**5 * m1**5) * (m1 - m0)

    # weight scale making the potential's quadrupole/octupole moments
    # equal N2 and N3:  m0*w0^2 + m1*w1^2 = N2,  m0*w0^3 - m1*w1^3 = N3
    s = k_outer / k_inner
    w_scale = s * M
    sigma0_tilde = w_scale * sigma0
    sigma1_tilde = w_scale * sigma1

    return MassConstants(
        m0=m0,
        m1=m1,
        m2=m2,
        mu1=mu1,
        mu2=mu2,
        sigma0=sigma0,
        sigma1=sigma1,
        nu=nu,
        nu_tilde=nu_tilde,
        sigma0_tilde=sigma0_tilde,
        sigma1_tilde=sigma1_tilde,
        N2=N2,
        N3=N3,
        unequal_inner_masses=(m0 != m1),
        k_inner=k_inner,
        k_outer=k_outer,
        time_factor=time_factor,
    )
