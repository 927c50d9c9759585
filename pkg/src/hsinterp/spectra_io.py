"""Hyperspectral cubes and labeled spectra: loading, writing and addressing.

Reflectance is stored as a fraction (1.0 = 100 %). Wavelengths are in nm.
"""

from __future__ import annotations

import csv
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

INTERLEAVES = ("bsq", "bil", "bip")

# canonical array is (line, sample, band); these are the on-disk axis orders
_DISK_AXES = {
    "bsq": ("bands", "lines", "samples"),
    "bil": ("lines", "bands", "samples"),
    "bip": ("lines", "samples", "bands"),
}
_TO_CANONICAL = {"bsq": (1, 2, 0), "bil": (0, 2, 1), "bip": (0, 1, 2)}
_FROM_CANONICAL = {"bsq": (2, 0, 1), "bil": (0, 2, 1), "bip": (0, 1, 2)}


class HeaderError(ValueError):
    """Malformed or unsupported ENVI header."""


class DatasetFormatError(ValueError):
    """Malformed labeled-spectra CSV."""


def check_wavelengths(wavelengths) -> np.ndarray:
    """Return a read-only float64 copy of a wavelength grid after validation."""
    wl = np.array(wavelengths, dtype=np.float64).ravel()
    if wl.size == 0:
        raise ValueError("wavelength grid is empty")
    if not np.all(np.isfinite(wl)) or np.any(wl <= 0):
        raise ValueError("wavelengths must be finite and positive")
    if np.any(np.diff(wl) <= 0):
        raise ValueError("wavelengths must be strictly increasing")
    wl.flags.writeable = False
    return wl


@dataclass(frozen=True)
class SpectralCube:
    """Reflectance raster in (line, sample, band) order."""

    data: np.ndarray
    wavelengths: np.ndarray

    def __post_init__(self):
        wl = check_wavelengths(self.wavelengths)
        data = np.array(self.data, dtype=np.float32)
        if data.ndim != 3:
            raise ValueError(f"cube data must be 3-D, got shape {data.shape}")
        if data.shape[2] != wl.size:
            raise ValueError(
                f"cube has {data.shape[2]} bands but {wl.size} wavelengths"
            )
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "wavelengths", wl)

    @property
    def lines(self) -> int:
        return self.data.shape[0]

    @property
    def samples(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[2]

    def pixels(self) -> np.ndarray:
        """All spectra as a (lines*samples, bands) float64 matrix, row-major."""
        return self.data.reshape(-1, self.bands).astype(np.float64)


@dataclass(frozen=True)
class LabeledDataset:
    spectra: np.ndarray
    labels: np.ndarray
    class_names: tuple
    wavelengths: np.ndarray

    def __post_init__(self):
        wl = check_wavelengths(self.wavelengths)
        x = np.array(self.spectra, dtype=np.float64)
        y = np.array(self.labels, dtype=np.int64).ravel()
        names = tuple(str(n) for n in self.class_names)
        if x.ndim != 2 or x.shape[1] != wl.size:
            raise ValueError(
                f"spectra shape {x.shape} does not match {wl.size} wavelengths"
            )
        if x.shape[0] != y.size:
            raise ValueError(f"{x.shape[0]} spectra but {y.size} labels")
        if not np.all(np.isfinite(x)):
            raise ValueError("spectra contain non-finite values")
        if len(set(names)) != len(names):
            raise ValueError("duplicate class names")
        if y.size and (y.min() < 0 or y.max() >= len(names)):
            raise ValueError("label index outside class_names")
        counts = np.bincount(y, minlength=len(names))
        empty = [names[i] for i in np.flatnonzero(counts == 0)]
        if empty:
            raise ValueError(f"classes without samples: {empty}")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "spectra", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "wavelengths", wl)

    @property
    def n_samples(self) -> int:
        return self.spectra.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def bands(self) -> int:
        return self.wavelengths.size

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices) -> "LabeledDataset":
        """Rows at ``indices``, keeping the full class table."""
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            self.spectra[idx], self.labels[idx], self.class_names, self.wavelengths
        )


@dataclass(frozen=True)
class RegionOfInterest:
    """Rectangular pixel region; both ranges are inclusive (first, last)."""

    class_name: str
    line_range: tuple
    sample_range: tuple

    @property
    def area(self) -> int:
        return (self.line_range[1] - self.line_range[0] + 1) * (
            self.sample_range[1] - self.sample_range[0] + 1
        )


# ---------------------------------------------------------------------------
# ENVI
# ---------------------------------------------------------------------------

def parse_envi_header(text: str) -> dict:
    """Parse ``key = value`` header text; brace values may span lines."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ENVI":
        raise HeaderError("header must start with 'ENVI'")
    out = {}
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line or line.startswith(";"):
            continue
        if "=" not in line:
            raise HeaderError(f"unparseable header line: {line!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        value = value.strip()
        if value.startswith("{"):
            while "}" not in value:
                if i >= len(lines):
                    raise HeaderError(f"unterminated brace value for {key!r}")
                value += " " + lines[i].strip()
                i += 1
            value = value[1:value.index("}")].strip()
        if key in out:
            raise HeaderError(f"duplicate header key {key!r}")
        out[key] = value
    return out


def _int_field(hdr: dict, key: str) -> int:
    if key not in hdr:
        raise HeaderError(f"header missing {key!r}")
    try:
        value = int(hdr[key])
    except ValueError:
        raise HeaderError(f"header field {key!r} is not an integer: {hdr[key]!r}") from None
    if value < 0:
        raise HeaderError(f"header field {key!r} is negative")
    return value


def _header_wavelengths(hdr: dict, bands: int) -> np.ndarray:
    if "wavelength" not in hdr:
        raise HeaderError("header missing 'wavelength'")
    items = [v for v in re.split(r"[,\s]+", hdr["wavelength"]) if v]
    try:
        wl = np.array([float(v) for v in items])
    except ValueError:
        raise HeaderError("non-numeric wavelength entry") from None
    if wl.size != bands:
        raise HeaderError(f"header declares {bands} bands but lists {wl.size} wavelengths")
    units = hdr.get("wavelength units", "").strip().lower()
    if units in ("micrometers", "um", "microns") or (units in ("", "unknown") and wl.size and wl.max() < 100):
        warnings.warn("wavelengths look like micrometers; converting to nm", stacklevel=3)
        wl = wl * 1000.0
    try:
        return check_wavelengths(wl)
    except ValueError as exc:
        raise HeaderError(str(exc)) from None


def load_cube(raster_path, header_path) -> SpectralCube:
    """Read a 32-bit float ENVI raster (bsq, bil or bip) into canonical order."""
    hdr = parse_envi_header(Path(header_path).read_text(encoding="utf-8"))
    samples = _int_field(hdr, "samples")
    lines = _int_field(hdr, "lines")
    bands = _int_field(hdr, "bands")
    if "data type" not in hdr:
        raise HeaderError("header missing 'data type'")
    if hdr["data type"].strip() != "4":
        raise HeaderError(
            f"unsupported data type {hdr['data type']!r}; only 4 (float32) is supported"
        )
    interleave = hdr.get("interleave", "").strip().lower()
    if interleave not in INTERLEAVES:
        raise HeaderError(f"interleave must be one of {INTERLEAVES}, got {interleave!r}")
    if "byte order" not in hdr:
        raise HeaderError("header missing 'byte order'")
    order = hdr["byte order"].strip()
    if order not in ("0", "1"):
        raise HeaderError(f"byte order must be 0 or 1, got {order!r}")
    offset = int(hdr.get("header offset", "0"))
    wl = _header_wavelengths(hdr, bands)

    raw = Path(raster_path).read_bytes()[offset:]
    expected = lines * samples * bands * 4
    if len(raw) != expected:
        raise HeaderError(
            f"raster {raster_path} has {len(raw)} bytes, expected {expected} "
            f"({lines}x{samples}x{bands} float32)"
        )
    dtype = np.dtype("<f4" if order == "0" else ">f4")
    sizes = {"lines": lines, "samples": samples, "bands": bands}
    disk = np.frombuffer(raw, dtype=dtype).reshape([sizes[a] for a in _DISK_AXES[interleave]])
    data = np.transpose(disk, _TO_CANONICAL[interleave]).astype(np.float32)
    return SpectralCube(data, wl)


def write_cube(cube: SpectralCube, raster_path, header_path,
               interleave: str = "bsq", byte_order: int = 0) -> None:
    interleave = interleave.lower()
    if interleave not in INTERLEAVES:
        raise ValueError(f"unknown interleave {interleave!r}")
    if byte_order not in (0, 1):
        raise ValueError("byte_order must be 0 or 1")
    dtype = np.dtype("<f4" if byte_order == 0 else ">f4")
    disk = np.transpose(cube.data, _FROM_CANONICAL[interleave])
    Path(raster_path).write_bytes(np.ascontiguousarray(disk, dtype=dtype).tobytes())
    wl = ", ".join(repr(float(w)) for w in cube.wavelengths)
    header = (
        "ENVI\n"
        f"samples = {cube.samples}\n"
        f"lines = {cube.lines}\n"
        f"bands = {cube.bands}\n"
        "header offset = 0\n"
        "data type = 4\n"
        f"interleave = {interleave}\n"
        f"byte order = {byte_order}\n"
        "wavelength units = Nanometers\n"
        f"wavelength = {{{wl}}}\n"
    )
    Path(header_path).write_text(header, encoding="utf-8")


# ---------------------------------------------------------------------------
# CSV datasets
# ---------------------------------------------------------------------------

def load_dataset_csv(path) -> LabeledDataset:
    """Read ``wl_1,...,wl_n,label`` CSV; class order follows first appearance."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DatasetFormatError(f"{path}: empty file")
        if len(header) < 2:
            raise DatasetFormatError(f"{path}: header needs wavelengths and a label column")
        try:
            wl = [float(v) for v in header[:-1]]
        except ValueError:
            raise DatasetFormatError(f"{path}: non-numeric wavelength in header") from None
        n_bands = len(wl)
        rows, names, index = [], [], {}
        labels = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_bands + 1:
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected {n_bands + 1} fields, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row[:-1]])
            except ValueError:
                raise DatasetFormatError(f"{path}:{lineno}: non-numeric reflectance") from None
            name = row[-1]
            if name not in index:
                index[name] = len(names)
                names.append(name)
            labels.append(index[name])
    if not rows:
        raise DatasetFormatError(f"{path}: empty dataset")
    try:
        return LabeledDataset(np.array(rows), np.array(labels), tuple(names), wl)
    except ValueError as exc:
        raise DatasetFormatError(f"{path}: {exc}") from None


def write_dataset_csv(ds: LabeledDataset, path, fmt: str = "%.17g") -> None:
    """Write a dataset; the default format round-trips float64 exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(repr(float(w)) for w in ds.wavelengths) + ",label\n")
        for row, label in zip(ds.spectra, ds.labels):
            fh.write(",".join(fmt % v for v in row))
            fh.write("," + ds.class_names[label] + "\n")


# ---------------------------------------------------------------------------
# addressing and statistics
# ---------------------------------------------------------------------------

def extract_rois(cube: SpectralCube, rois) -> LabeledDataset:
    """One sample per pixel per ROI membership, in ROI order then row-major."""
    names, index = [], {}
    blocks, labels = [], []
    for roi in rois:
        (l0, l1), (s0, s1) = roi.line_range, roi.sample_range
        if not (0 <= l0 <= l1 < cube.lines and 0 <= s0 <= s1 < cube.samples):
            raise ValueError(
                f"ROI {roi.class_name!r} lines {roi.line_range} samples {roi.sample_range} "
                f"outside cube {cube.lines}x{cube.samples}"
            )
        if roi.class_name not in index:
            index[roi.class_name] = len(names)
            names.append(roi.class_name)
        block = cube.data[l0:l1 + 1, s0:s1 + 1, :].reshape(-1, cube.bands)
        blocks.append(block.astype(np.float64))
        labels.append(np.full(block.shape[0], index[roi.class_name]))
    if not blocks:
        raise ValueError("no ROIs given")
    return LabeledDataset(np.vstack(blocks), np.concatenate(labels), tuple(names), cube.wavelengths)


def nearest_band(wavelengths, target_nm: float) -> int:
    """Index of the band closest to ``target_nm``; ties go to the lower index."""
    wl = np.asarray(wavelengths, dtype=np.float64)
    return int(np.argmin(np.abs(wl - target_nm)))


def class_mean_spectra(ds: LabeledDataset) -> np.ndarray:
    """(n_classes, bands) matrix of per-class mean spectra."""
    sums = np.zeros((ds.n_classes, ds.bands))
    np.add.at(sums, ds.labels, ds.spectra)
    return sums / ds.class_counts()[:, None]
