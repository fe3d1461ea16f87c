"""lyra: human-in-the-loop lifelong skill learning on a deterministic tabletop."""

__version__ = "0.1.0"
