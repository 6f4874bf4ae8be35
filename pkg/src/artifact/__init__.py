"""Minimal group-ring indices of rings of integers in p-adic Galois extensions."""

__version__ = "0.1.0"
