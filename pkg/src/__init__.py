"""Package initialization for evograph-uvv."""

__version__ = "0.1.0"
