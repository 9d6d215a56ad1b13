"""Tests for the soft compression codec."""

import dataclasses

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from softcodec.codec import (
    FRAME_HEADER_BITS,
    CompressedFrame,
    Triplet,
    anchor_indices,
    cover_shape_layer,
    decode_binary,
    decode_component,
    decode_gray,
    decode_image,
    decode_multi,
    encode_binary,
    encode_binary_with_stats,
    encode_gray,
    encode_gray_with_stats,
    encode_image,
    encode_multi,
    location_deltas,
    measure_ratio,
    pack_frames,
    reconstruct_shape_layer,
    unpack_frames,
)
from softcodec.coders.bitstream import BitWriter
from softcodec.coders.golomb import GolombParameter
from softcodec.errors import CorruptionError, EncodeError, FormatError, UsageError
from softcodec.shapes import (
    Codebook,
    Shape,
    ShapeFrequencyTable,
    build_codebook,
    is_valid_shape,
    max_shape_value,
)
from softcodec.transform import max_interface
from softcodec.types import Image, MultiComponentImage, WeightMode

fixture_settings = settings(
    max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)


def pair_codebook() -> Codebook:
    """Return a binary codebook holding 1x1 (id 0) and 1x2 (id 1), one bit each."""
    table = ShapeFrequencyTable()
    table.add({Shape(1, 2, (1, 1)): 5}, {})
    return build_codebook(table, {}, 0, 2, 2, binary=True)


def gray_images(depth: int, max_side: int = 10):
    return st.tuples(st.integers(1, max_side), st.integers(1, max_side)).flatmap(
        lambda shape: arrays(np.int64, shape, elements=st.integers(0, depth - 1))
    ).map(lambda px: Image.from_array(px, depth))


@st.composite
def random_codebooks(draw):
    """Draw a small complete codebook over random valid shapes and settings."""
    depth = draw(st.sampled_from([2, 3, 4, 8, 16, 256]))
    binary = depth == 2 and draw(st.booleans())
    interface = 0 if binary else draw(st.integers(0, max_interface(depth)))
    top = max_shape_value(depth, interface, binary)
    blocks = draw(st.lists(
        st.tuples(st.integers(1, 3), st.integers(1, 3)).flatmap(
            lambda shape: arrays(np.int64, shape, elements=st.integers(0, top))
        ),
        max_size=6,
    ))
    table = ShapeFrequencyTable()
    table.add({Shape.from_matrix(b): draw(st.integers(1, 50)) for b in blocks if is_valid_shape(b)}, {})
    detail = {s: draw(st.integers(0, 20)) for s in range(1 << interface)}
    return build_codebook(
        table, detail, interface, depth, 3,
        weight_mode=draw(st.sampled_from(WeightMode)),
        binary=binary,
        golomb_m=draw(st.integers(1, 8)),
    )


class TestCover:
    """Tests for the greedy cover."""

    def test_prefers_larger_shape(self):
        """Test that the pair is placed where it fits."""
        cb = pair_codebook()
        triplets = cover_shape_layer(np.array([[1, 1, 0, 1]]), cb)
        assert triplets == [Triplet(0, 0, 1), Triplet(0, 3, 0)]

    def test_anchor_offset(self):
        """Test a shape whose top-left cell is empty."""
        hook = Shape.from_matrix([[0, 1], [1, 1]])
        table = ShapeFrequencyTable()
        table.add({hook: 10}, {})
        cb = build_codebook(table, {}, 0, 2, 2, binary=True)
        triplets = cover_shape_layer(np.array([[0, 1], [1, 1]]), cb)
        assert triplets == [Triplet(0, 0, cb.shape_ids[hook])]
        assert anchor_indices(triplets, cb, 2) == [1]

    def test_shape_must_fit_inside(self):
        """Test that placements never leave the layer."""
        hook = Shape.from_matrix([[0, 1], [1, 1]])
        table = ShapeFrequencyTable()
        table.add({hook: 10}, {})
        cb = build_codebook(table, {}, 0, 2, 2, binary=True)
        triplets = cover_shape_layer(np.array([[1, 0], [1, 0]]), cb)
        assert [cb.shapes[t.shape_id] for t in triplets] == [Shape.single(1)] * 2

    def test_missing_value(self):
        """Test that an incomplete codebook can fail to cover."""
        cb = Codebook(2, 0, 2, (Shape(1, 2, (1, 1)),), (1,), (1,), binary=True)
        with pytest.raises(EncodeError):
            cover_shape_layer(np.array([[1, 0]]), cb)

    def test_empty_layer(self, floor_codebook):
        """Test that an all-zero layer needs no placement."""
        assert cover_shape_layer(np.zeros((3, 3), dtype=np.int64), floor_codebook) == []

    def test_location_deltas(self):
        """Test first absolute, then gap - 1."""
        assert location_deltas([0, 3, 4, 10]) == [0, 2, 0, 5]
        with pytest.raises(EncodeError):
            location_deltas([3, 3])


class TestReconstruct:
    """Tests for reconstruct_shape_layer."""

    def test_places_cells(self):
        """Test filling a canvas from triplets."""
        layer = reconstruct_shape_layer([Triplet(0, 0, 1), Triplet(0, 3, 0)], pair_codebook(), 1, 4)
        assert layer.tolist() == [[1, 1, 0, 1]]

    @pytest.mark.parametrize(
        "triplets",
        [
            [Triplet(0, 0, 5)],
            [Triplet(0, 3, 1)],
            [Triplet(0, 0, 1), Triplet(0, 1, 0)],
        ],
    )
    def test_corrupt_triplets(self, triplets):
        """Test unknown ids, out-of-bounds placements and overlaps."""
        with pytest.raises(CorruptionError):
            reconstruct_shape_layer(triplets, pair_codebook(), 1, 4)


class TestRandomCodebooks:
    """Properties that hold for any complete codebook."""

    @settings(max_examples=60, deadline=None)
    @given(random_codebooks(), st.data())
    def test_round_trip(self, cb, data):
        """Test decode(encode(x)) = x for random codebooks and images."""
        img = data.draw(gray_images(cb.depth_levels, 8))
        frame = encode_image(img, cb)
        assert frame.golomb_m >= 1
        assert decode_image(frame.to_bytes(), cb) == img

    @settings(max_examples=60, deadline=None)
    @given(random_codebooks(), st.data())
    def test_cover_then_reconstruct(self, cb, data):
        """Test that the placed shapes rebuild an arbitrary shape layer exactly."""
        layer = data.draw(arrays(
            np.int64,
            st.tuples(st.integers(1, 8), st.integers(1, 8)),
            elements=st.integers(0, cb.max_shape_value),
        ))
        triplets = cover_shape_layer(layer, cb)
        assert len(triplets) <= np.count_nonzero(layer)
        rebuilt = reconstruct_shape_layer(triplets, cb, *layer.shape)
        assert rebuilt.tolist() == layer.tolist()


class TestBinaryCodec:
    """Tests for the binary codec."""

    def test_exact_bits(self):
        """Test the frame written for a tiny image."""
        img = Image.from_array([[1, 1, 0, 1, 0, 0]], 2)
        frame, stats = encode_binary_with_stats(img, pair_codebook())
        # delta 0, pair "1", delta 2 with m = 1, single "0"
        assert frame.golomb_m == 1
        assert frame.triplet_count == 2
        assert frame.shape_bits == 6
        assert frame.shape_payload == bytes([0b01110000])
        assert frame.detail_bits == 0
        assert not frame.inverted
        assert (stats.location_bits, stats.shape_bits) == (4, 2)
        assert stats.deltas == (0, 2)
        assert stats.placements_by_size == {1: 1, 2: 1}
        assert stats.location_cost == 2.0
        assert frame.bit_size == FRAME_HEADER_BITS + 8
        assert decode_binary(frame, pair_codebook()) == img

    @pytest.mark.parametrize("value, inverted", [(0, False), (1, True)])
    def test_constant_images(self, binary_codebook, value, inverted):
        """Test that all-zero and all-one images cost no placement."""
        img = Image.from_array(np.full((5, 5), value), 2)
        frame = encode_binary(img, binary_codebook)
        assert frame.inverted is inverted
        assert frame.triplet_count == 0
        assert frame.golomb_m == binary_codebook.golomb_m
        assert frame.shape_payload == b""
        assert decode_binary(frame.to_bytes(), binary_codebook) == img

    @fixture_settings
    @given(gray_images(2))
    def test_round_trip(self, binary_codebook, img):
        """Test decode(encode(x)) = x for arbitrary binary images."""
        assert decode_binary(encode_binary(img, binary_codebook).to_bytes(), binary_codebook) == img

    def test_mode_mismatch(self, binary_codebook, gray_codebook):
        """Test that frames and codebooks must agree on the mode."""
        frame = encode_binary(Image.from_array([[1, 0]], 2), binary_codebook)
        with pytest.raises(UsageError):
            decode_gray(frame, gray_codebook)
        with pytest.raises(UsageError):
            encode_binary(Image.from_array([[1, 0]], 2), gray_codebook)


class TestGrayCodec:
    """Tests for the gray codec."""

    def test_corpus_round_trip(self, gray_corpus, gray_codebook):
        """Test every training image."""
        for img in gray_corpus:
            frame = encode_gray(img, gray_codebook)
            assert decode_gray(frame.to_bytes(), gray_codebook) == img
            assert measure_ratio(img, frame) > 1.0

    @fixture_settings
    @given(gray_images(256))
    def test_round_trip_unseen_images(self, gray_codebook, img):
        """Test images the codebook never saw, including noise."""
        assert decode_gray(encode_gray(img, gray_codebook).to_bytes(), gray_codebook) == img

    @fixture_settings
    @given(gray_images(8))
    def test_round_trip_floor_codebook(self, floor_codebook, img):
        """Test a codebook holding nothing but the 1x1 shapes."""
        frame = encode_image(img, floor_codebook)
        assert decode_image(frame.to_bytes(), floor_codebook) == img

    def test_constant_image(self, floor_codebook):
        """Test that a constant image needs one placement."""
        img = Image.from_array(np.full((4, 4), 5), 8)
        frame, stats = encode_gray_with_stats(img, floor_codebook)
        assert frame.triplet_count == 1
        assert stats.deltas == (0,)
        assert frame.detail_bits == 0
        assert decode_gray(frame, floor_codebook) == img

    def test_detail_layer_coded(self, gray_codebook):
        """Test that l > 0 writes one detail symbol per pixel."""
        img = Image.from_array(np.arange(16).reshape(4, 4), 256)
        frame, stats = encode_gray_with_stats(img, gray_codebook)
        assert gray_codebook.interface == 2
        lengths = gray_codebook.detail_lengths
        assert stats.detail_bits >= 16 * min(lengths)
        assert frame.shape_bits == stats.location_bits + stats.shape_bits

    def test_deterministic(self, gray_corpus, gray_codebook):
        """Test byte-identical frames for repeated runs."""
        img = gray_corpus[0]
        assert encode_gray(img, gray_codebook).to_bytes() == encode_gray(img, gray_codebook).to_bytes()

    def test_depth_mismatch(self, floor_codebook, gray_codebook):
        """Test D checks on encode and decode."""
        img = Image.from_array([[1, 2]], 256)
        with pytest.raises(UsageError):
            encode_gray(img, floor_codebook)
        with pytest.raises(UsageError):
            decode_gray(encode_gray(img, gray_codebook), floor_codebook)

    def test_shapes_beat_single_pixels(self):
        """Test that a repeated block is cheaper with its multi-pixel shape."""
        block = Shape.from_matrix([[1, 1], [1, 1]])
        table = ShapeFrequencyTable()
        table.add({block: 50}, {})
        cb = build_codebook(table, {}, 0, 2, 2, binary=True)
        pixels = np.zeros((8, 8), dtype=np.int64)
        pixels[0:2, 0:2] = pixels[4:6, 4:6] = 1
        img = Image.from_array(pixels, 2)
        full = encode_binary(img, cb)
        single = encode_binary(img, cb.restricted_to_single_pixels())
        assert full.triplet_count == 2
        assert single.triplet_count == 8
        assert full.bit_size <= single.bit_size


class TestFrameFormat:
    """Tests for frame parsing and corruption handling."""

    def test_header_size(self):
        """Test the 43-byte header."""
        assert FRAME_HEADER_BITS == 344

    def test_parse_round_trip(self, gray_corpus, gray_codebook):
        """Test that parsing restores every field."""
        frame = encode_gray(gray_corpus[1], gray_codebook)
        assert CompressedFrame.from_bytes(frame.to_bytes()) == frame

    def test_bad_magic_and_version(self, gray_corpus, gray_codebook):
        """Test container checks."""
        data = encode_gray(gray_corpus[0], gray_codebook).to_bytes()
        with pytest.raises(FormatError):
            CompressedFrame.from_bytes(b"JUNK" + data[4:])
        with pytest.raises(FormatError):
            CompressedFrame.from_bytes(data[:4] + bytes([7]) + data[5:])

    def test_truncated(self, gray_corpus, gray_codebook):
        """Test that every cut is reported as corruption."""
        data = encode_gray(gray_corpus[0], gray_codebook).to_bytes()
        for cut in (4, 20, 42, len(data) - 1):
            with pytest.raises(CorruptionError):
                CompressedFrame.from_bytes(data[:cut])
        with pytest.raises(CorruptionError):
            CompressedFrame.from_bytes(data + b"\x00")

    def test_wrong_triplet_count(self, gray_corpus, gray_codebook):
        """Test that a header disagreeing with the payload is corruption."""
        frame = encode_gray(gray_corpus[0], gray_codebook)
        assert frame.triplet_count > 0
        for count in (frame.triplet_count + 1, frame.triplet_count - 1, 10**6):
            with pytest.raises(CorruptionError):
                decode_gray(dataclasses.replace(frame, triplet_count=count), gray_codebook)

    def test_reconstructed_pixel_out_of_range(self, floor_codebook):
        """Test a residual that drives a pixel below zero."""
        writer = BitWriter()
        GolombParameter(1).write(writer, 0)
        # residual 1 unfolds to -1 at a pixel predicted as 0
        floor_codebook.shape_code.write_symbol(writer, floor_codebook.shape_ids[Shape.single(1)])
        frame = CompressedFrame(
            height=1,
            width=1,
            depth_levels=8,
            interface=0,
            golomb_m=1,
            triplet_count=1,
            shape_bits=writer.bit_length,
            detail_bits=0,
            shape_payload=writer.getvalue(),
            detail_payload=b"",
        )
        with pytest.raises(CorruptionError):
            decode_gray(frame.to_bytes(), floor_codebook)

    def test_unread_bits(self, floor_codebook):
        """Test that payload bits left after the last placement are corruption."""
        frame = encode_gray(Image.from_array([[0, 1]], 8), floor_codebook)
        with pytest.raises(CorruptionError):
            decode_gray(dataclasses.replace(frame, triplet_count=0), floor_codebook)


class TestMultiComponent:
    """Tests for multi-component images and containers."""

    @pytest.fixture
    def rgb(self, gray_corpus):
        return MultiComponentImage(tuple(gray_corpus.images[:3]), ("R", "G", "B"))

    def test_container_round_trip(self, rgb, gray_codebook):
        """Test packing and decoding every component."""
        data = pack_frames(encode_multi(rgb, gray_codebook))
        assert data[:4] == b"SCMC"
        assert decode_multi(data, gray_codebook, ("R", "G", "B")) == rgb

    def test_components_decode_independently(self, rgb, gray_codebook):
        """Test decoding single components in any order."""
        data = pack_frames(encode_multi(rgb, [gray_codebook] * 3))
        for index in (2, 0, 1):
            assert decode_component(data, index, gray_codebook) == rgb.components[index]
        with pytest.raises(UsageError):
            decode_component(data, 3, gray_codebook)

    def test_codebook_count(self, rgb, gray_codebook):
        """Test that a codebook list must match the component count."""
        with pytest.raises(UsageError):
            encode_multi(rgb, [gray_codebook, gray_codebook])

    def test_container_errors(self, rgb, gray_codebook):
        """Test container framing checks."""
        data = pack_frames(encode_multi(rgb, gray_codebook))
        with pytest.raises(FormatError):
            unpack_frames(b"SCMP" + data[4:])
        with pytest.raises(CorruptionError):
            unpack_frames(data[:-1])
        with pytest.raises(CorruptionError):
            unpack_frames(data + b"\x00")
        with pytest.raises(UsageError):
            pack_frames([])

    def test_ratio_counts_every_component(self, rgb, gray_codebook):
        """Test b / b' over all components."""
        frames = encode_multi(rgb, gray_codebook)
        original = 3 * 16 * 16 * 8
        assert measure_ratio(rgb, frames) == pytest.approx(original / sum(f.bit_size for f in frames))


class TestMeasureRatio:
    """Tests for measure_ratio."""

    def test_raw_bytes(self):
        """Test a 28x28 8-bit image against 784 bytes."""
        img = Image.from_array(np.zeros((28, 28)), 256)
        assert measure_ratio(img, bytes(784)) == 1.0
        assert measure_ratio(img, bytes(392)) == 2.0
