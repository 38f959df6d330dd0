"""Numerics for dispersive ill-posedness experiments: NLS, mKdV, KdV and Miura maps."""

__version__ = "0.1.0"
