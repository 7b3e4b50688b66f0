"""Quantum Simulation Logic: a classical bit-pair simulator of quantum circuits."""

__version__ = "0.1.0"
