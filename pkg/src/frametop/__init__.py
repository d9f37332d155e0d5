"""Numerical toolkit for spaces of complex tight frames with prescribed column norms."""
from ._kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
