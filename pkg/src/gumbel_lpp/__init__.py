"""Gumbel last passage percolation, the log-gamma polymer and friends."""

__version__ = "0.1.0"
