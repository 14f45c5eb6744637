"""Exact algebra for deformations of Hamiltonian foliations: free groups and
their graded Lie algebras, orbit depth of a vanishing cycle, parabolic germ
holonomy and Godbillon-Vey sequences."""

__version__ = "0.1.0"
