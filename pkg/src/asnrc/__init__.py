"""Simulator for reservoir computers built from analog stochastic neurons."""

__version__ = "0.1.0"
