"""Strategy synthesis for timed multi-agent systems."""
__version__ = "0.1.0"
