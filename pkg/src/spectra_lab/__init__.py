"""Random additive lifts of two-eigenvalue atoms."""

__version__ = "0.1.0"
