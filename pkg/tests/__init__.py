"""softcodec tests."""
