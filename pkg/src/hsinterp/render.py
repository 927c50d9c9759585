"""File outputs: binary PPM (P6) maps and heatmaps, scatter CSVs."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectra_io import nearest_band

SCATTER_HEADER = ("x_reflectance", "y_reflectance", "label")

# classes 0..2 are blue, green, red as in the vegetation maps; the rest follow tab10
_DEFAULT_COLORS = (
    (0, 0, 255), (0, 255, 0), (255, 0, 0),
    (255, 127, 14), (148, 103, 189), (140, 86, 75), (227, 119, 194),
    (127, 127, 127), (188, 189, 34), (23, 190, 207),
    (255, 255, 0), (0, 255, 255), (255, 0, 255), (128, 0, 0), (0, 128, 0), (0, 0, 128),
)
UNLABELED = -1


@dataclass(frozen=True)
class Palette:
    colors: tuple
    reserved: tuple = (0, 0, 0)

    def __post_init__(self):
        colors = tuple(tuple(int(v) for v in c) for c in self.colors)
        reserved = tuple(int(v) for v in self.reserved)
        for c in colors + (reserved,):
            if len(c) != 3 or not all(0 <= v <= 255 for v in c):
                raise ValueError(f"bad RGB triple {c}")
        if len(set(colors)) != len(colors):
            raise ValueError("palette colors must be distinct")
        if reserved in colors:
            raise ValueError("reserved color collides with a class color")
        object.__setattr__(self, "colors", colors)
        object.__setattr__(self, "reserved", reserved)

    def __len__(self):
        return len(self.colors)

    def lut(self) -> np.ndarray:
        """(n+1, 3) table; the last row is the reserved color."""
        return np.array(self.colors + (self.reserved,), dtype=np.uint8)


def default_palette(n_classes: int) -> Palette:
    if n_classes > len(_DEFAULT_COLORS):
        raise ValueError(f"default palette has only {len(_DEFAULT_COLORS)} colors")
    return Palette(_DEFAULT_COLORS[:n_classes])


def load_palette(path) -> Palette:
    """JSON: a list of [r, g, b] or ``{"colors": [...], "reserved": [r, g, b]}``."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(raw, list):
        return Palette(tuple(raw))
    return Palette(tuple(raw["colors"]), tuple(raw.get("reserved", (0, 0, 0))))


def write_ppm(rgb: np.ndarray, path) -> None:
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected (height, width, 3) array, got {rgb.shape}")
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    """Read a P6 file with maxval 255 as written by :func:`write_ppm`."""
    raw = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        fields.append(raw[pos:end])
        pos = end
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise ValueError(f"{path}: not an 8-bit P6 file")
    w, h = int(fields[1]), int(fields[2])
    data = raw[pos + 1:]
    if len(data) != 3 * w * h:
        raise ValueError(f"{path}: payload {len(data)} bytes, expected {3 * w * h}")
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w, 3)


def class_map_rgb(labels, palette: Palette) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError("labels must be a 2-D array")
    bad = (labels != UNLABELED) & ((labels < 0) | (labels >= len(palette)))
    if np.any(bad):
        raise ValueError(f"labels outside palette of {len(palette)} colors: {np.unique(labels[bad])}")
    idx = np.where(labels == UNLABELED, len(palette), labels)
    return palette.lut()[idx]


def write_class_map(labels, palette: Palette, path) -> None:
    """One pixel per raster cell; ``-1`` marks unlabeled cells."""
    write_ppm(class_map_rgb(labels, palette), path)


def scale_to_gray(values) -> np.ndarray:
    """Min-max scale the whole array to 0..255; a constant array maps to 128."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full(v.shape, 128, dtype=np.uint8)
    return np.floor((v - lo) / (hi - lo) * 255.0 + 0.5).astype(np.uint8)


def write_weight_heatmap(w1, neuron_order, path) -> None:
    """Bands down, neurons across in ``neuron_order``; gray levels shared over the matrix."""
    w1 = np.asarray(w1, dtype=np.float64)
    order = np.asarray(neuron_order)
    if order.shape != (w1.shape[1],) or not np.array_equal(np.sort(order), np.arange(w1.shape[1])):
        raise ValueError("neuron_order must be a permutation of the hidden units")
    gray = scale_to_gray(w1)[:, order]
    write_ppm(np.repeat(gray[:, :, None], 3, axis=2), path)


def write_index_map(values, path, nan_color=(255, 0, 0)) -> None:
    """Gray map of an index in [-1, 1] (-1 black, 1 white); NaN cells get ``nan_color``."""
    v = np.asarray(values, dtype=np.float64)
    ok = np.isfinite(v)
    gray = np.floor((np.clip(np.where(ok, v, 0.0), -1.0, 1.0) + 1.0) * 127.5 + 0.5).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    rgb[~ok] = nan_color
    write_ppm(rgb, path)


def export_scatter_csv(spectra, labels, wavelengths, x_nm: float, y_nm: float, path,
                       class_names=None) -> None:
    """Reflectance at the bands nearest ``x_nm`` and ``y_nm`` with each sample's label."""
    spectra = np.asarray(spectra, dtype=np.float64)
    labels = np.asarray(labels)
    xi, yi = nearest_band(wavelengths, x_nm), nearest_band(wavelengths, y_nm)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCATTER_HEADER)
        for row, lab in zip(spectra, labels):
            name = class_names[lab] if class_names is not None else int(lab)
            w.writerow([repr(float(row[xi])), repr(float(row[yi])), name])
