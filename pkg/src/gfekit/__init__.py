"""Symmetry-reduction toolkit for the geopotential forecast equation."""

__version__ = "0.1.0"
