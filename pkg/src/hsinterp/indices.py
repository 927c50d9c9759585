"""Normalized-difference indices (NDVI and friends) and iso-index lines."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .spectra_io import SpectralCube, nearest_band


class UndefinedIndexError(ZeroDivisionError):
    """high + low window means sum to zero."""


@dataclass(frozen=True)
class IndexSpec:
    """(high - low) / (high + low) over two closed wavelength windows.

    ``low_window_nm`` is the subtrahend (Red for NDVI), ``high_window_nm`` the
    minuend (NIR for NDVI).
    """

    name: str
    low_window_nm: tuple
    high_window_nm: tuple

    def __post_init__(self):
        for label in ("low_window_nm", "high_window_nm"):
            lo, hi = (float(v) for v in getattr(self, label))
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
                raise ValueError(f"{label} must be an interval [lo, hi] with lo <= hi")
            object.__setattr__(self, label, (lo, hi))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "low_window_nm": list(self.low_window_nm),
            "high_window_nm": list(self.high_window_nm),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IndexSpec":
        try:
            return cls(d["name"], tuple(d["low_window_nm"]), tuple(d["high_window_nm"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"bad index spec {d!r}: {exc}") from None


# Landsat 8/9 OLI and Landsat 4-7 TM/ETM+ band windows
NDVI_LANDSAT8 = IndexSpec("ndvi", (640.0, 670.0), (850.0, 880.0))
NDVI_LANDSAT457 = IndexSpec("ndvi_landsat457", (630.0, 690.0), (760.0, 900.0))

PRESETS = {
    "ndvi": NDVI_LANDSAT8,
    "ndvi_landsat89": NDVI_LANDSAT8,
    "ndvi_landsat457": NDVI_LANDSAT457,
}


def load_index_specs(path) -> dict:
    """Read index presets from JSON: one object or a list of objects."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    items = raw if isinstance(raw, list) else [raw]
    specs = [IndexSpec.from_dict(d) for d in items]
    return {s.name: s for s in specs}


def save_index_specs(specs, path) -> None:
    Path(path).write_text(
        json.dumps([s.to_dict() for s in specs], indent=2) + "\n", encoding="utf-8"
    )


def window_bands(wavelengths, window_nm) -> np.ndarray:
    """Band indices inside the closed window, or the band nearest its center."""
    wl = np.asarray(wavelengths, dtype=np.float64)
    lo, hi = window_nm
    idx = np.flatnonzero((wl >= lo) & (wl <= hi))
    if idx.size == 0:
        idx = np.array([nearest_band(wl, 0.5 * (lo + hi))])
    return idx


def band_window_mean(spectrum, wavelengths, window_nm) -> float:
    s = np.asarray(spectrum, dtype=np.float64)
    return float(s[window_bands(wavelengths, window_nm)].mean())


def ndvi(spectrum, wavelengths, spec: IndexSpec = NDVI_LANDSAT8) -> float:
    low = band_window_mean(spectrum, wavelengths, spec.low_window_nm)
    high = band_window_mean(spectrum, wavelengths, spec.high_window_nm)
    den = high + low
    if den == 0:
        raise UndefinedIndexError(f"{spec.name}: window means sum to zero")
    return (high - low) / den


def iso_index_slope(value: float) -> float:
    """Slope of the through-origin line of constant index in (low, high) space.

    Every point on ``high = slope * low`` has index ``value``.
    """
    v = float(value)
    if not -1.0 <= v <= 1.0 or np.isnan(v):
        raise ValueError(f"index value {value} outside [-1, 1]")
    if v == 1.0:
        raise ZeroDivisionError("iso-index line for value 1 is vertical (infinite slope)")
    return (v + 1.0) / (1.0 - v)


def index_map(cube: SpectralCube, spec: IndexSpec = NDVI_LANDSAT8) -> np.ndarray:
    """Per-pixel index as a (lines, samples) array; NaN where undefined."""
    low = window_bands(cube.wavelengths, spec.low_window_nm)
    high = window_bands(cube.wavelengths, spec.high_window_nm)
    values = kernels.normalized_difference(cube.pixels(), low, high)
    return values.reshape(cube.lines, cube.samples)
