"""Numerical toolkit for isoperimetric problems with a radial density and potential.

The energy of a set E is the weighted perimeter with density f = exp(psi(|x|))
plus the potential integral of g(|x|) f over E, minimized at fixed weighted
volume. Modules:

* ``weights``: radial profiles, admissibility classification, counterexample weights
* ``radial``: centered and off-center ball volumes and energies
* ``one_dim``: the exact one-dimensional problem and a brute-force oracle
* ``curve``: shooting for constant weighted mean curvature generating curves
* ``nearly_spherical``: graph sets over spheres and quantitative stability
* ``symmetrize``: spherical symmetrization of polar sets
* ``calibrate``: the large-volume calibration certificate
* ``cli``: the experiment runner
"""

from .errors import IsoperiError
from .weights import WeightPair, classify, gaussian, polynomial, zero

__all__ = ["IsoperiError", "WeightPair", "classify", "gaussian", "polynomial", "zero"]
__version__ = "0.1.0"
