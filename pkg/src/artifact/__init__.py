"""Exact finite models of a cosimplicial cochain double complex."""

__version__ = "0.1.0"
