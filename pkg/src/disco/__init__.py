"""Discourse segmentation, connective detection, and relation classification."""

__version__ = "0.1.0"
