"""GBS-based feed-forward quantum reservoir computer and capacity measurement."""

__version__ = "0.1.0"
