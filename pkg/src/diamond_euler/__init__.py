"""Spectral toolkit for the incompressible Euler equations in the half-plane
with analytic norms on diamond and conoid contour families."""
__version__ = "0.1.0"
