"""Deterministic harness for document-grounded information-seeking dialogue pipelines."""

__version__ = "0.1.0"
