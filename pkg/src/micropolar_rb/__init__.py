"""Pseudo-spectral solver and regularity diagnostics for 2D micropolar Rayleigh-Benard convection."""
from .dynamics import Params, State
from .spectral import Grid, PhysicalField, SpectralField

__all__ = ["Grid", "Params", "PhysicalField", "SpectralField", "State"]
__version__ = "0.1.0"
