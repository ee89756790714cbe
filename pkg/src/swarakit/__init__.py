"""Speech corpus curation and objective evaluation toolkit."""
__version__ = "0.1.0"
