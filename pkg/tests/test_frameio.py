import io

import numpy as np
import pytest

from shotconv.frameio import (
    FrameSource,
    PpmFormatError,
    TruncatedStreamError,
    bilinear_resize,
    iter_ppm_dir,
    read_frames,
    read_ppm,
    read_raw_rgb24,
    write_ppm,
    write_rgb24,
)

from oracles import bilinear_reference


class TestRawReader:
    def test_two_black_frames(self):
        stream = io.BytesIO(bytes(2 * 4 * 4 * 3))
        frames = list(read_raw_rgb24(stream, 4, 4))
        assert len(frames) == 2
        for frame in frames:
            assert frame.shape == (4, 4, 3)
            assert not frame.any()

    def test_normalization(self):
        stream = io.BytesIO(bytes([255, 128, 0] * 4))
        (frame,) = read_raw_rgb24(stream, 2, 2)
        assert frame[0, 0, 0] == 1.0
        assert frame[0, 0, 1] == pytest.approx(128 / 255)
        assert frame[0, 0, 2] == 0.0

    def test_truncation_after_complete_frame(self):
        stream = io.BytesIO(bytes(4 * 4 * 3 + 1))
        it = read_raw_rgb24(stream, 4, 4)
        next(it)
        with pytest.raises(TruncatedStreamError, match="frame 1"):
            next(it)

    def test_row_major_top_left_origin(self):
        data = bytes([10, 20, 30]) + bytes([40, 50, 60]) * 3
        (frame,) = read_raw_rgb24(io.BytesIO(data), 2, 2)
        np.testing.assert_allclose(frame[0, 0], np.array([10, 20, 30]) / 255)

    def test_reads_from_path(self, tmp_path):
        path = tmp_path / "clip.rgb24"
        path.write_bytes(bytes(2 * 3 * 3 * 3))
        assert len(list(read_raw_rgb24(path, 3, 3))) == 2


class TestRawWriter:
    def test_round_trip_lossless_at_8_bits(self, rng):
        data = rng.integers(0, 256, size=2 * 5 * 4 * 3, dtype=np.uint8).tobytes()
        frames = list(read_raw_rgb24(io.BytesIO(data), 4, 5))
        sink = io.BytesIO()
        write_rgb24(frames, sink)
        assert sink.getvalue() == data


class TestPpm:
    def test_round_trip(self, rng, tmp_path):
        frame = rng.integers(0, 256, size=(6, 5, 3), dtype=np.uint8)
        path = tmp_path / "frame.ppm"
        write_ppm(frame / 255.0, path)
        back = read_ppm(path)
        np.testing.assert_allclose(back * 255.0, frame, atol=1e-6)

    def test_comment_in_header(self, tmp_path):
        path = tmp_path / "c.ppm"
        path.write_bytes(b"P6\n# a comment\n2 1\n255\n" + bytes(6))
        assert read_ppm(path).shape == (1, 2, 3)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ppm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes(12))
        with pytest.raises(PpmFormatError, match="bad.ppm"):
            read_ppm(path)

    def test_wrong_maxval(self, tmp_path):
        path = tmp_path / "depth.ppm"
        path.write_bytes(b"P6\n2 2\n65535\n" + bytes(24))
        with pytest.raises(PpmFormatError, match="maxval"):
            read_ppm(path)

    def test_short_pixel_data(self, tmp_path):
        path = tmp_path / "short.ppm"
        path.write_bytes(b"P6\n4 4\n255\n" + bytes(10))
        with pytest.raises(PpmFormatError, match="expected 48"):
            read_ppm(path)

    def test_directory_order(self, rng, tmp_path):
        values = [0.1, 0.5, 0.9]
        for i, value in enumerate(values):
            write_ppm(np.full((2, 2, 3), value), tmp_path / f"{i:05d}.ppm")
        frames = list(iter_ppm_dir(tmp_path))
        means = [float(frame.mean()) for frame in frames]
        assert means == sorted(means)

    def test_empty_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="no .ppm"):
            list(iter_ppm_dir(tmp_path))


class TestFrameSource:
    def test_raw_requires_dimensions(self):
        with pytest.raises(ValueError, match="width and height"):
            FrameSource(kind="raw_rgb24", path="x")

    def test_bad_fps(self):
        with pytest.raises(ValueError, match="fps"):
            FrameSource(kind="ppm_dir", path="x", fps=0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            FrameSource(kind="avi", path="x")

    def test_dispatch_ppm(self, tmp_path):
        write_ppm(np.zeros((2, 2, 3)), tmp_path / "a.ppm")
        source = FrameSource(kind="ppm_dir", path=str(tmp_path))
        assert len(list(read_frames(source))) == 1

    def test_dispatch_raw_file(self, tmp_path):
        path = tmp_path / "clip.rgb24"
        path.write_bytes(bytes(3 * 2 * 2 * 3))
        source = FrameSource(kind="raw_rgb24", path=str(path), width=2, height=2)
        assert len(list(read_frames(source))) == 3


class TestBilinearResize:
    def test_identity_short_circuit(self, rng):
        frame = rng.random((64, 64, 3)).astype(np.float32)
        out = bilinear_resize(frame)
        assert out is not frame
        np.testing.assert_array_equal(out, frame)

    def test_constant_image_exact(self):
        for size in ((3, 5), (17, 9), (128, 100)):
            frame = np.full(size + (3,), 0.37, dtype=np.float32)
            out = bilinear_resize(frame)
            np.testing.assert_array_equal(out, np.full((64, 64, 3), np.float32(0.37)))

    def test_horizontal_ramp_closed_form(self):
        # 128 -> 64 halves the grid: src_x = 2*dst + 0.5, all interior,
        # so the output ramp is value (2*dst + 0.5) / 127 per column.
        ramp = np.tile(
            (np.arange(128, dtype=np.float64) / 127.0)[None, :, None], (128, 1, 3)
        )
        out = bilinear_resize(ramp)
        expected = (2.0 * np.arange(64) + 0.5) / 127.0
        np.testing.assert_allclose(out[10, :, 0], expected, atol=1e-6)

    def test_matches_reference_on_random_image(self, rng):
        image = rng.random((11, 7, 3))
        out = bilinear_resize(image, 5, 9)
        ref = bilinear_reference(image, 5, 9)
        np.testing.assert_allclose(out, ref, atol=1e-12)

    def test_preserves_range(self, rng):
        image = rng.random((31, 45, 3)).astype(np.float32)
        out = bilinear_resize(image)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_upscales_single_pixel(self):
        out = bilinear_resize(np.full((1, 1, 3), 0.25))
        np.testing.assert_array_equal(out, np.full((64, 64, 3), 0.25))
