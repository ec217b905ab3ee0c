"""LQR-PG: model-free online policy gradient for the Linear Quadratic Regulator."""

__version__ = "0.2.0"
