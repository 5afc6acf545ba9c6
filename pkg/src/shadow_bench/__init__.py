"""Shadow detection benchmark tooling."""

__version__ = "0.1.0"
