"""Desk-scale laboratory for peakons of the generalized modified
Camassa-Holm family: exact coefficient certificates, peakon profiles and
conserved functionals, pseudospectral time evolution, weak-solution
verification by line quadrature, and orbital-stability experiments."""

__version__ = "0.1.0"
