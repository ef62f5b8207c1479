"""Volume estimation from uniform samples via alpha-convex hulls and sample splitting."""

__version__ = "0.1.0"
