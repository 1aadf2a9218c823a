"""Logarithmic Fourier-Laplace transforms for multiscale functions."""
__version__ = "0.1.0"
