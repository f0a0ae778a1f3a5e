"""Stationary transport between two tunneling-coupled 2-D lattice gases."""

__version__ = "0.1.0"
