"""Front tracking and relative-entropy stability diagnostics for 2x2 conservation laws."""
from . import curves, data, errors, fronttrack, relent, riemann, system, weight
from .kernels import BACKEND
from .system import builtin_systems, get_system

__version__ = "0.1.0"

__all__ = ["BACKEND", "builtin_systems", "curves", "data", "errors", "fronttrack", "get_system",
           "relent", "riemann", "system", "weight"]
