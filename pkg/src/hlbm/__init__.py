"""Homogenized lattice Boltzmann toolkit for flow through porous media."""

__version__ = "0.1.0"
