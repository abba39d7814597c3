"""Twisted Möbius and von Mangoldt sums over powerful moduli."""

__version__ = "0.1.0"
