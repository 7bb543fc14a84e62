"""Arithmetic lattices from quaternion orders over real quadratic fields,
acting on products of hyperbolic spaces.

The package builds the rank-8 unit lattice of a quaternion order, enumerates
elements inside products of hyperbolic balls, runs Diophantine approximation
experiments for the lattice action on one factor, and numerically verifies
decay bounds of spherical transforms and the scaling of a spectral trace
estimator against density-compliant synthetic spectra.
"""

__version__ = "0.1.0"

from .numberfield import FieldDesc, QuadInt
from .quaternion import AlgebraDesc, QuatElt
from .hypgeom import HypPoint, RhoParam

__all__ = [
    "FieldDesc",
    "QuadInt",
    "AlgebraDesc",
    "QuatElt",
    "HypPoint",
    "RhoParam",
    "__version__",
]
