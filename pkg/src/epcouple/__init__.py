"""End-periodic graph maps: presentations, boundaries, couplings."""

__version__ = "0.1.0"
