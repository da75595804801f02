"""Simulation and numerical verification toolkit for subordinators."""
__version__ = "0.1.0"
