import csv

import numpy as np
import pytest
from PIL import Image

from hsinterp.render import (
    Palette, class_map_rgb, default_palette, export_scatter_csv, load_palette, read_ppm,
    scale_to_gray, write_class_map, write_index_map, write_weight_heatmap,
)


def test_one_pixel(tmp_path):
    write_class_map([[0]], default_palette(3), tmp_path / "m.ppm")
    raw = (tmp_path / "m.ppm").read_bytes()
    assert raw == b"P6\n1 1\n255\n" + bytes([0, 0, 255])


def test_2x3_layout(tmp_path):
    labels = np.array([[0, 1, 2], [2, 1, 0]])
    write_class_map(labels, default_palette(3), tmp_path / "m.ppm")
    raw = (tmp_path / "m.ppm").read_bytes()
    header = b"P6\n3 2\n255\n"
    assert raw.startswith(header) and len(raw) == len(header) + 18


def test_reference_reader_round_trip(tmp_path, rng):
    labels = rng.integers(-1, 10, size=(7, 11))
    pal = default_palette(10)
    write_class_map(labels, pal, tmp_path / "m.ppm")
    img = np.asarray(Image.open(tmp_path / "m.ppm").convert("RGB"))
    inverse = {c: i for i, c in enumerate(pal.colors)}
    inverse[pal.reserved] = -1
    back = np.array([[inverse[tuple(int(v) for v in px)] for px in row] for row in img])
    np.testing.assert_array_equal(back, labels)
    np.testing.assert_array_equal(read_ppm(tmp_path / "m.ppm"), img)


def test_vegetation_colors():
    assert default_palette(3).colors == ((0, 0, 255), (0, 255, 0), (255, 0, 0))


def test_label_outside_palette(tmp_path):
    with pytest.raises(ValueError, match="outside palette"):
        write_class_map([[0, 3]], default_palette(3), tmp_path / "m.ppm")


def test_palette_rules(tmp_path):
    with pytest.raises(ValueError):
        Palette(((1, 2, 3), (1, 2, 3)))
    with pytest.raises(ValueError):
        Palette(((0, 0, 0),))
    (tmp_path / "p.json").write_text('{"colors": [[10, 20, 30], [40, 50, 60]], "reserved": [1, 1, 1]}')
    assert load_palette(tmp_path / "p.json").reserved == (1, 1, 1)


@pytest.mark.parametrize("h, w", [(1, 1), (181, 128), (3, 7)])
def test_ppm_length(tmp_path, h, w):
    write_class_map(np.zeros((h, w), int), default_palette(1), tmp_path / "m.ppm")
    assert (tmp_path / "m.ppm").stat().st_size == len(f"P6\n{w} {h}\n255\n") + 3 * h * w


def test_heatmap_endpoints(tmp_path):
    write_weight_heatmap(np.array([[0.0, 1.0], [1.0, 0.0]]), [0, 1], tmp_path / "h.ppm")
    px = read_ppm(tmp_path / "h.ppm")
    assert px[:, :, 0].ravel().tolist() == [0, 255, 255, 0]
    assert np.all(px[:, :, 0] == px[:, :, 1]) and np.all(px[:, :, 1] == px[:, :, 2])


def test_heatmap_constant(tmp_path):
    write_weight_heatmap(np.full((3, 4), -0.7), np.arange(4), tmp_path / "h.ppm")
    assert np.all(read_ppm(tmp_path / "h.ppm") == 128)


def test_heatmap_column_permutation(tmp_path, rng):
    w = rng.normal(size=(5, 6))
    order = rng.permutation(6)
    write_weight_heatmap(w, np.arange(6), tmp_path / "a.ppm")
    write_weight_heatmap(w, order, tmp_path / "b.ppm")
    np.testing.assert_array_equal(read_ppm(tmp_path / "a.ppm")[:, order], read_ppm(tmp_path / "b.ppm"))


def test_heatmap_bad_order(tmp_path):
    with pytest.raises(ValueError):
        write_weight_heatmap(np.zeros((2, 3)), [0, 0, 1], tmp_path / "h.ppm")


def test_gray_monotone(rng):
    v = np.sort(rng.normal(size=1000))
    assert np.all(np.diff(scale_to_gray(v).astype(int)) >= 0)


def test_index_map_ppm(tmp_path):
    write_index_map(np.array([[-1.0, 0.0, 1.0, np.nan]]), tmp_path / "n.ppm")
    px = read_ppm(tmp_path / "n.ppm")[0]
    assert px.tolist() == [[0, 0, 0], [128, 128, 128], [255, 255, 255], [255, 0, 0]]


def test_scatter_csv(tmp_path):
    wl = [600.0, 656.0, 800.0, 802.0]
    x = np.array([[0.1, 0.12345678901234567, 0.5, 0.55]])
    export_scatter_csv(x, [2], wl, 656, 802, tmp_path / "s.csv")
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    assert rows[0] == ["x_reflectance", "y_reflectance", "label"]
    assert len(rows) == 2
    assert float(rows[1][0]) == x[0, 1] and float(rows[1][1]) == 0.55 and rows[1][2] == "2"


def test_scatter_same_band(tmp_path, rng):
    x = rng.uniform(size=(5, 3))
    export_scatter_csv(x, [0] * 5, [600, 700, 800], 700, 700, tmp_path / "s.csv", ["veg"])
    rows = list(csv.reader(open(tmp_path / "s.csv")))[1:]
    assert all(r[0] == r[1] and r[2] == "veg" for r in rows)
