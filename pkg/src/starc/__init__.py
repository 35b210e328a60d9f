"""Numeric spacetime algebra and Riemann-Cartan geometry engine."""

__version__ = "0.1.0"
