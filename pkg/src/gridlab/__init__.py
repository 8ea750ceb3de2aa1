"""Exact q-series toolkit for half-integral weight grids, their Hecke images and p-adic congruences."""

__version__ = "0.1.0"
