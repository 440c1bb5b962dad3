"""Elastic slowness surfaces and the qP Finsler geometry of anisotropic media.

Submodules:

- ``stiffness``: tensors, Voigt form, validation, domains and fields
- ``polyalg``: exact multivariate polynomials, resultants, gcds
- ``christoffel``: Christoffel matrices, slowness polynomials, eigen-gaps
- ``classifier2d``: exact multiple-eigenvalue classifier for 2D tensors
- ``singularity``: scheme/variety smoothness and degeneracy detection
- ``finsler``: qP Hamiltonian, Legendre map, Finsler function, spray
- ``geodesics``: integration, shooting, travel times, radial checks
- ``xray``: geodesic X-ray transform and recovery experiment
- ``cli``: command-line interface
"""

__version__ = "0.1.0"
