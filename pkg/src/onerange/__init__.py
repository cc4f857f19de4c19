"""One-range expansions in Laguerre-type orthonormal bases.

Submodules: specfun, radial, guseinov, expansions, convergence, rearrange,
addition, fourier, config, cli.
"""
from .errors import (
    AccuracyError,
    DivergentIntegralError,
    DivergentTargetError,
    DomainError,
    OneRangeError,
    PoleError,
    WindowError,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "DivergentIntegralError",
    "DivergentTargetError",
    "DomainError",
    "OneRangeError",
    "PoleError",
    "WindowError",
]
