"""Numerical laboratory for two-phase heat conduction.

The package implements and cross-checks the constructive machinery behind
the rigidity of flat interfaces in two-phase heat conductors:

  * `medium`    -- conductivity pairs, the interface constant, Gaussian kernels
  * `kernel1d`  -- the exact two-phase heat kernel on the line and its
                   half-line Cauchy solution (quadrature vs closed form)
  * `geometry`  -- surface catalog with signed distance, projections,
                   principal curvatures and symmetric functions
  * `wkb`       -- barrier coefficients A_j, the forced pair A_{n,+-},
                   harmonic correctors, sub/supersolution barriers
  * `elliptic`  -- radial solvers for sigma Lap w = lambda w, curvature
                   extraction from large-rate asymptotics, grid solver,
                   discrete maximum-principle checks
  * `parabolic` -- time stepping from indicator data and the
                   Laplace-Stieltjes bridge to the elliptic family
  * `helicoid`  -- one-phase screw-symmetry identities and half-value
                   Monte-Carlo densities
  * `acceptance`, `cli` -- the acceptance suite and the `twophase` command
"""

from .medium import TwoPhaseMedium, gaussian_kernel, interface_constant

__all__ = ["TwoPhaseMedium", "gaussian_kernel", "interface_constant"]
