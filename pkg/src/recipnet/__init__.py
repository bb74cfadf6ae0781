"""Reciprocation dynamics in temporal multilayer interaction networks."""

__version__ = "0.1.0"
