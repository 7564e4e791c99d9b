"""Exact certification of robust control-invariant envelopes for polynomial systems."""

__version__ = "0.1.0"
