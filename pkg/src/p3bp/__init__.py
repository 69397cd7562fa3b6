"""Numerical laboratory for near-parabolic dynamics of the planar
three-body problem: coordinate reductions, the parabolic homoclinic orbit,
Melnikov harmonics, scattering maps, and the near-infinity horseshoe."""

from .masses import MassConstants, derive_constants

__all__ = ["MassConstants", "derive_constants"]
__version__ = "0.1.0"
