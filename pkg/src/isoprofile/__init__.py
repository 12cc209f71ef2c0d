"""Closed minimal profile curves generated by isoparametric foliations."""
from . import _backend
from .model import CmcOptions, FoliationParams, PhaseState, SphericalState, make_params

__version__ = "0.1.0"

__all__ = ["CmcOptions", "FoliationParams", "PhaseState", "SphericalState", "make_params"]


def backend():
    """Name of the active kernel backend (``"compiled"`` or ``"python"``)."""
    return _backend.name_active
