"""meanbirds: detect bullying and aggressive accounts in a tweet corpus."""

__version__ = "0.1.0"
