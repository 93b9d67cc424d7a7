"""Simulation and analysis tools for the toy-model lattice ODE."""

__version__ = "0.1.0"
