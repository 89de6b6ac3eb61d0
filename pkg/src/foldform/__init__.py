"""Exterior-calculus toolkit for bundle and folded contact forms."""

__version__ = "0.1.0"
