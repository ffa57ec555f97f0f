"""Exact staged construction of continuous decompositions of the Sierpinski curve."""

__version__ = "0.1.0"
