"""Exact desk-scale simulation and analysis of boson-sampling variants."""

__version__ = "0.1.0"
