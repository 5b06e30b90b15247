"""Numerical laboratory for Willmore-type surfaces in conformal parametrization.

Submodules: ``multivec`` (exterior algebra), ``grid`` and ``norms`` (the
sampled unit disk), ``elliptic`` (Dirichlet solves, potentials, Wente),
``geometry`` (immersions and curvature), ``willmore`` (operators and data),
``noether`` (conserved-current potentials and estimate probes) and
``harness`` (CLI).
"""

__version__ = "0.1.0"
