"""Toric Sarkisov links between terminal Fano simplices."""

__version__ = "0.1.0"
