"""softcodec - soft compression codec for lossless images."""

__version__ = "0.1.0"
