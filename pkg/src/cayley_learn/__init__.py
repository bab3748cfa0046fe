"""Machine learning on exact finite algebraic structures."""

__version__ = "0.1.0"
