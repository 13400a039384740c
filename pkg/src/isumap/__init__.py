"""Geodesic metric fusion with t-conorms, MDS embedding and cluster separation."""

__version__ = "0.1.0"
