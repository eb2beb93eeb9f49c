"""Exact continued fractions of square roots of polynomials over Q."""

__version__ = "0.1.0"
