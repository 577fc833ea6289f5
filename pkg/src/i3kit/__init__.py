"""Percentile-based impact indicators (I3, PR6) for citation-index exports."""

__version__ = "0.1.0"
