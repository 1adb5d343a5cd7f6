"""Intersective polynomials: classification, sieved exponential sums, difference-set thresholds."""

__version__ = "0.1.0"
