"""Progress-bar visual chain-of-thought for video temporal grounding."""

__version__ = "0.1.0"
