"""Definition-space toolkit: usage graphs, sense labels, sense dynamics maps."""

__version__ = "0.1.0"
