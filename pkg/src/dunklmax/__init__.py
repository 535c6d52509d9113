"""Dunkl analysis on the reflection group Z_2^d: kernels, transform, translation
and maximal operators, with a verification harness."""

from .measure import Multiplicity

__version__ = "0.1.0"

__all__ = ["Multiplicity", "__version__"]
