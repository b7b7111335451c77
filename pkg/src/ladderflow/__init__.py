"""Cluster-state measurement simulator and correlation measures for ladder graphs."""

__version__ = "0.1.0"
