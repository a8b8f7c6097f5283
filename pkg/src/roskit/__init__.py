"""roskit: sharp constants and extremal laws for Rosenthal-type moment
inequalities of sums of independent mixtures and log-concave variables."""

from . import basedist, constants, cpoisson, errors, gridconv, logconcave, specfun, verify
from .result import ConstantResult

__all__ = [
    "basedist",
    "constants",
    "cpoisson",
    "errors",
    "gridconv",
    "logconcave",
    "specfun",
    "verify",
    "ConstantResult",
]
__version__ = "0.1.0"
