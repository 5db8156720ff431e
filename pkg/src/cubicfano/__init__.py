"""Exact finite-field geometry of lines on cubic hypersurfaces containing a plane."""

__version__ = "0.1.0"
