"""Symbolic-numeric engine for Mellin-Barnes representations built by the
method of brackets, with contour and conic-hull residue-series evaluators and
a verified catalog of Ising, Box, Delta, Jellium, and Ruby integrals."""

__version__ = "0.1.0"
