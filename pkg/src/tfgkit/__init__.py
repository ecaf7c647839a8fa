"""Topological full group elements: construction, verification and embeddings."""

__version__ = "0.1.0"
