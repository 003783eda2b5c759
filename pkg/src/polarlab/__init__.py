"""Numerical laboratory for elliptic Poincare series, polar harmonic Maass
forms, and Petersson inner products on the level-one modular curve."""

from .halfplane import ModMatrix, ShellSpec, UHPoint
from .poincare import Kind, SeriesSpec, SeriesValue, SpaceTag, TruncationParams
from .expansion import CircleSampling, EllipticExpansion
from .operators import StencilParams
from .inner import FDQuadParams, InnerReport

__version__ = "0.1.0"

__all__ = [
    "UHPoint",
    "ModMatrix",
    "ShellSpec",
    "Kind",
    "SpaceTag",
    "SeriesSpec",
    "SeriesValue",
    "TruncationParams",
    "CircleSampling",
    "EllipticExpansion",
    "StencilParams",
    "FDQuadParams",
    "InnerReport",
    "__version__",
]
