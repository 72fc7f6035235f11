"""Monte Carlo laboratory for Brownian last passage percolation at desk scale."""

__version__ = "0.1.0"
