"""Round-trip and error-mapping tests for PNG/JSON/CSV io."""

import numpy as np
import pytest
from PIL import Image as PILImage

from layersplit.calibrate import ErrorSurface
from layersplit.errors import ConfigError
from layersplit.fileio import (
    json_float,
    read_image,
    read_json,
    read_mask,
    write_image,
    write_json,
    write_mask,
    write_surface_csv,
)

QUANT = 0.5 / 65535.0


class TestImageRoundTrip:
    def test_sixteen_bit_precision(self, tmp_path):
        rng = np.random.default_rng(7)
        img = rng.random((23, 31))
        p = tmp_path / "img.png"
        write_image(p, img)
        back = read_image(p)
        assert back.shape == img.shape
        assert np.max(np.abs(back - img)) <= QUANT + 1e-15

    def test_written_file_is_sixteen_bit(self, tmp_path):
        p = tmp_path / "img.png"
        write_image(p, np.full((4, 4), 0.5))
        with PILImage.open(p) as im:
            assert im.mode in ("I;16", "I;16B", "I")

    def test_rounding_is_half_up(self, tmp_path):
        # 0.5/65535 sits exactly on the first quantization boundary
        p = tmp_path / "edge.png"
        write_image(p, np.full((2, 2), 0.5 / 65535.0))
        with PILImage.open(p) as im:
            assert np.asarray(im)[0, 0] == 1

    def test_values_clip_to_unit_range(self, tmp_path):
        p = tmp_path / "clip.png"
        write_image(p, np.array([[-0.5, 1.5]]))
        back = read_image(p)
        assert back[0, 0] == 0.0
        assert back[0, 1] == 1.0

    def test_reads_eight_bit(self, tmp_path):
        arr = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
        p = tmp_path / "l.png"
        PILImage.fromarray(arr, mode="L").save(p)
        back = read_image(p)
        assert np.allclose(back, arr / 255.0)

    def test_reads_float_tiff(self, tmp_path):
        arr = np.linspace(0.0, 1.0, 6, dtype=np.float32).reshape(2, 3)
        p = tmp_path / "f.tiff"
        PILImage.fromarray(arr, mode="F").save(p)
        back = read_image(p)
        assert np.allclose(back, arr, atol=1e-7)

    def test_color_input_collapses_to_luma(self, tmp_path):
        rgb = np.full((5, 5, 3), 128, dtype=np.uint8)
        p = tmp_path / "rgb.png"
        PILImage.fromarray(rgb, mode="RGB").save(p)
        back = read_image(p)
        assert back.shape == (5, 5)
        assert np.allclose(back, 128.0 / 255.0, atol=1e-2)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            read_image(tmp_path / "absent.png")


class TestMaskRoundTrip:
    def test_bool_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        mask = rng.random((17, 13)) < 0.4
        p = tmp_path / "m.png"
        write_mask(p, mask)
        back = read_mask(p)
        assert back.dtype == np.bool_
        assert np.array_equal(back, mask)

    def test_file_holds_only_zero_and_full(self, tmp_path):
        p = tmp_path / "m.png"
        write_mask(p, np.array([[True, False]]))
        with PILImage.open(p) as im:
            assert im.mode == "L"
            assert set(np.asarray(im).ravel()) == {0, 255}

    def test_any_nonzero_sample_counts(self, tmp_path):
        arr = np.array([[0, 1], [128, 255]], dtype=np.uint8)
        p = tmp_path / "gray.png"
        PILImage.fromarray(arr, mode="L").save(p)
        back = read_mask(p)
        assert np.array_equal(back, np.array([[False, True], [True, True]]))


class TestJson:
    def test_round_trip_sorted_with_newline(self, tmp_path):
        p = tmp_path / "d.json"
        write_json(p, {"b": 2, "a": [1, 2.5, None]})
        text = p.read_text()
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')
        assert read_json(p) == {"b": 2, "a": [1, 2.5, None]}

    def test_nan_is_rejected_at_write(self, tmp_path):
        with pytest.raises(ValueError):
            write_json(tmp_path / "bad.json", {"x": float("nan")})

    def test_invalid_json_maps_to_oserror(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        with pytest.raises(OSError):
            read_json(p)

    def test_non_object_top_level_is_config_error(self, tmp_path):
        p = tmp_path / "list.json"
        p.write_text("[1, 2, 3]")
        with pytest.raises(ConfigError):
            read_json(p)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            read_json(tmp_path / "absent.json")

    def test_json_float_maps_infinities_to_none(self):
        assert json_float(float("inf")) is None
        assert json_float(float("-inf")) is None
        assert json_float(1.25) == 1.25


class TestSurfaceCsv:
    def test_rows_round_trip_full_precision(self, tmp_path):
        vals = np.array(
            [[1.0 / 3.0, 0.1 + 0.2, 1e-17], [0.0, 2.0 / 7.0, 1.0], [0.5, 0.25, 1e300]]
        )
        surface = ErrorSurface(grid_step=0.5, values=vals)
        p = tmp_path / "surface.csv"
        write_surface_csv(p, surface)
        lines = p.read_text().splitlines()
        assert lines[0] == "w1,w2,error"
        assert len(lines) == 1 + 9
        for k, line in enumerate(lines[1:]):
            i, j = divmod(k, 3)
            w1, w2, err = (float(tok) for tok in line.split(","))
            assert w1 == min(i * 0.5, 1.0)
            assert w2 == min(j * 0.5, 1.0)
            assert err == vals[i, j]
