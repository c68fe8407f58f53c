"""Meso-scale structure detection with block modularity and dc-SBM inference."""

__version__ = "0.1.0"
