"""Guided-light propagation through a periodic atom array along a nanofiber."""

__version__ = "0.1.0"
