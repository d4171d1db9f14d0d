"""Simulation and analysis of randomised reproducing graphs."""

__version__ = "1.0.0"
