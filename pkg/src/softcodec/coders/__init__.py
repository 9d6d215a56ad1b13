"""Entropy-coding primitives: bit streams, canonical Huffman and Golomb codes."""

from .bitstream import BitReader, BitWriter
from .golomb import (
    GolombParameter,
    geometric_optimal_m,
    golomb_decode,
    golomb_encode,
    golomb_select_m,
)
from .huffman import HuffmanCode, code_lengths, huffman_build, huffman_decode, huffman_encode

__all__ = [
    "BitReader",
    "BitWriter",
    "GolombParameter",
    "geometric_optimal_m",
    "golomb_decode",
    "golomb_encode",
    "golomb_select_m",
    "HuffmanCode",
    "code_lengths",
    "huffman_build",
    "huffman_decode",
    "huffman_encode",
]
