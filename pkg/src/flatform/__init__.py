"""Exact checks for flat bilinear forms attached to real Kaehler submanifolds."""

__version__ = "0.1.0"
