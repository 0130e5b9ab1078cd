"""Personal knowledge-graph risk classifier over social follow graphs."""

__version__ = "0.1.0"
