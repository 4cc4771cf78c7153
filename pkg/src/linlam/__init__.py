"""Linear and affine lambda terms, trivalent maps and their generating functions."""

__version__ = "0.1.0"
