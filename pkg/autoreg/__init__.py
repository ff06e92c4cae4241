"""Wiener filters with the regularization parameter chosen by evidence maximization."""

__version__ = "0.1.0"
