"""Learned neighborhood-size control for local branching on 0-1 MILPs."""

__version__ = "0.1.0"
