"""Compile, solve and count systems of x_i = 1, x_i + x_j = x_k, x_i * x_j = x_k."""

__version__ = "0.1.0"
