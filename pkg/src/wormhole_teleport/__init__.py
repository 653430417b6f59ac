"""Many-body teleportation through Brownian SYK channels coupled to environments."""

__version__ = "0.1.0"
