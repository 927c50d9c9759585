"""Hyperspectral classification and weight interpretation toolkit."""

__version__ = "0.1.0"
