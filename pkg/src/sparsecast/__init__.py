"""Multicast light-tree routing in sparse-splitting WDM networks."""

__version__ = "0.1.0"
