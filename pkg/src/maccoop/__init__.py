"""Exact finite-blocklength analysis of cooperation in two-user multiple access channels."""

__version__ = "0.1.0"
