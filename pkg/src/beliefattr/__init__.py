"""Selective belief attribution in a doors-keys-boxes gridworld."""

__version__ = "0.1.0"
