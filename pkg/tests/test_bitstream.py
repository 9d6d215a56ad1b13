"""Tests for the bit writer and reader."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from softcodec.coders.bitstream import BitReader, BitWriter
from softcodec.errors import DecodeError


class TestBitWriter:
    """Tests for BitWriter."""

    def test_msb_first_with_zero_padding(self):
        """Test bit order and padding of the last byte."""
        writer = BitWriter()
        writer.write_bitstring("101")
        assert writer.bit_length == 3
        assert writer.getvalue() == bytes([0b10100000])

    def test_write_bits_across_bytes(self):
        """Test multi-byte values."""
        writer = BitWriter()
        writer.write_bits(0b1, 1)
        writer.write_bits(0xABC, 12)
        assert writer.to_bitstring() == "1" + format(0xABC, "012b")

    def test_unary(self):
        """Test q ones followed by a zero, including long runs."""
        writer = BitWriter()
        writer.write_unary(3)
        writer.write_unary(0)
        writer.write_unary(40)
        assert writer.to_bitstring() == "1110" + "0" + "1" * 40 + "0"

    def test_value_must_fit(self):
        """Test that oversized values are rejected."""
        with pytest.raises(ValueError):
            BitWriter().write_bits(4, 2)
        with pytest.raises(ValueError):
            BitWriter().write_unary(-1)

    def test_empty(self):
        """Test an empty writer."""
        writer = BitWriter()
        assert writer.getvalue() == b""
        assert writer.to_bitstring() == ""


class TestBitReader:
    """Tests for BitReader."""

    def test_reads_back(self):
        """Test reading values written by the writer."""
        writer = BitWriter()
        writer.write_bits(5, 3)
        writer.write_unary(2)
        writer.write_bits(200, 8)
        reader = BitReader(writer.getvalue(), writer.bit_length)
        assert reader.read_bits(3) == 5
        assert reader.read_unary() == 2
        assert reader.read_bits(8) == 200
        assert reader.bits_remaining == 0

    def test_limit_hides_padding(self):
        """Test that padding bits beyond the limit are never read."""
        reader = BitReader(bytes([0b10100000]), bit_limit=3)
        assert reader.read_bits(3) == 0b101
        with pytest.raises(DecodeError):
            reader.read_bit()

    def test_exhausted_unary(self):
        """Test a unary code without its terminating zero."""
        with pytest.raises(DecodeError):
            BitReader.from_bitstring("111").read_unary()

    def test_limit_beyond_data(self):
        """Test that the limit cannot exceed the buffer."""
        with pytest.raises(DecodeError):
            BitReader(b"\x00", bit_limit=9)

    def test_start_bit(self):
        """Test starting mid-buffer."""
        reader = BitReader(bytes([0b00010000]), start_bit=3)
        assert reader.position == 3
        assert reader.read_bit() == 1

    @given(st.lists(st.tuples(st.integers(0, 32), st.integers(0, 2**32 - 1)), max_size=50))
    def test_write_then_read(self, fields):
        """Test that any sequence of fields reads back unchanged."""
        writer = BitWriter()
        expected = []
        for width, raw in fields:
            value = raw & ((1 << width) - 1)
            writer.write_bits(value, width)
            expected.append((width, value))
        reader = BitReader(writer.getvalue(), writer.bit_length)
        assert [(w, reader.read_bits(w)) for w, _ in expected] == expected
        assert reader.bits_remaining == 0
