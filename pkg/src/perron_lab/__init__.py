"""Perron trees, tilted-rectangle processes on Z^2 and their discrete maximal operators."""

__version__ = "0.1.0"
