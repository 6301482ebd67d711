"""Elliptic difference Painleve dynamics and noncommutative plane sheaves."""

__version__ = "0.1.0"
