"""Frequency-secure investment planning for low-inertia microgrids."""

__version__ = "0.1.0"
