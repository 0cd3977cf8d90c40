"""Workbench for Bohr sets, local Gowers norms and energy-decrement iteration on Z/pZ."""

__version__ = "0.1.0"
