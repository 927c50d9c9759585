"""Synthetic reflectance spectra with known, controllable features.

A material is a piecewise-linear continuum, an optional sigmoid red edge and a
set of Gaussian absorption dips. Samples add i.i.d. Gaussian noise per band
and are clipped to [0, 1.2].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectra_io import LabeledDataset, SpectralCube, check_wavelengths

CLIP_MAX = 1.2
DEFAULT_NOISE = 0.01


@dataclass(frozen=True)
class RedEdge:
    center_nm: float
    width_nm: float
    low: float
    high: float

    def __call__(self, wl):
        return self.low + (self.high - self.low) / (1.0 + np.exp(-(wl - self.center_nm) / self.width_nm))


@dataclass(frozen=True)
class Absorption:
    center_nm: float
    depth: float
    width_nm: float

    def __call__(self, wl):
        return self.depth * np.exp(-0.5 * ((wl - self.center_nm) / self.width_nm) ** 2)


@dataclass(frozen=True)
class MaterialModel:
    name: str
    baseline: tuple                      # ((nm, reflectance), ...) knots
    red_edge: RedEdge | None = None
    absorptions: tuple = ()
    noise_std: float = DEFAULT_NOISE

    def __post_init__(self):
        knots = tuple((float(a), float(b)) for a, b in self.baseline)
        if not knots:
            raise ValueError(f"{self.name}: baseline needs at least one knot")
        if any(k2[0] <= k1[0] for k1, k2 in zip(knots, knots[1:])):
            raise ValueError(f"{self.name}: baseline knots must have increasing wavelengths")
        for a in self.absorptions:
            if a.depth < 0 or a.width_nm <= 0:
                raise ValueError(f"{self.name}: absorption needs depth >= 0 and width > 0")
        if self.red_edge is not None and self.red_edge.width_nm <= 0:
            raise ValueError(f"{self.name}: red edge width must be > 0")
        if self.noise_std < 0:
            raise ValueError(f"{self.name}: noise_std must be >= 0")
        object.__setattr__(self, "baseline", knots)
        object.__setattr__(self, "absorptions", tuple(self.absorptions))

    def reflectance(self, wavelengths) -> np.ndarray:
        """Noiseless, unclipped analytic curve."""
        wl = np.asarray(wavelengths, dtype=np.float64)
        kx, ky = zip(*self.baseline)
        r = np.interp(wl, kx, ky)
        if self.red_edge is not None:
            r = r + self.red_edge(wl)
        for a in self.absorptions:
            r = r - a(wl)
        return r

    def to_dict(self) -> dict:
        d = {"name": self.name, "baseline": [list(k) for k in self.baseline],
             "absorptions": [vars(a) for a in self.absorptions], "noise_std": self.noise_std}
        d["red_edge"] = None if self.red_edge is None else vars(self.red_edge)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MaterialModel":
        edge = d.get("red_edge")
        return cls(
            d["name"],
            tuple(tuple(k) for k in d["baseline"]),
            RedEdge(**edge) if edge else None,
            tuple(Absorption(**a) for a in d.get("absorptions", ())),
            float(d.get("noise_std", DEFAULT_NOISE)),
        )


def save_materials(models, path) -> None:
    Path(path).write_text(json.dumps([m.to_dict() for m in models], indent=2) + "\n", encoding="utf-8")


def load_materials(path) -> list:
    return [MaterialModel.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

VEGETATION_GRID = np.linspace(400.0, 2400.0, 181)
POLYMER_GRID = np.linspace(400.0, 2450.0, 452)

VEGETATION_COUNTS = {"forest": 2580, "field1": 168, "field2_senesced": 104}
POLYMER_COUNTS = {
    "red_bubble_wrap": 3672,
    "clear_bubble_wrap": 3003,
    "glove_loc": 1200,
    "medicine_bottle": 1360,
    "red_lid": 2958,
    "ping_pong_ball": 225,
    "pvc_pipe": 5415,
    "pvc_extension_plug": 1818,
    "inflatable_football": 3196,
    "foam_packaging": 8900,
}

_WATER = (Absorption(1400.0, 0.12, 40.0), Absorption(1900.0, 0.18, 50.0))


def vegetation_preset() -> list:
    """Dense canopy, green field and senesced field; red edges at 715 nm of decreasing strength."""
    return [
        MaterialModel(
            "forest",
            ((400, 0.0), (500, 0.0), (550, 0.03), (600, 0.0), (1100, 0.0), (2400, -0.30)),
            RedEdge(715.0, 12.0, 0.02, 0.55),
            _WATER,
        ),
        MaterialModel(
            "field1",
            ((400, 0.0), (490, 0.0), (550, 0.07), (610, 0.0), (1100, 0.0), (2400, -0.20)),
            RedEdge(715.0, 14.0, 0.09, 0.46),
            _WATER,
        ),
        MaterialModel(
            "field2_senesced",
            ((400, -0.12), (650, 0.0), (1100, 0.0), (2400, -0.05)),
            RedEdge(715.0, 25.0, 0.20, 0.45),
            (Absorption(1400.0, 0.06, 40.0), Absorption(1900.0, 0.08, 50.0),
             Absorption(2100.0, 0.05, 60.0)),
        ),
    ]


def _polymer(name, level, tilt, dips, visible=None):
    # tilt: reflectance change from 400 nm to 2450 nm
    knots = [(400.0, level), (2450.0, level + tilt)]
    if visible is not None:
        knots = [(400.0, level + visible[0]), (visible[1], level + visible[0]),
                 (visible[1] + 40.0, level)] + knots[1:]
    return MaterialModel(name, tuple(knots), None, tuple(Absorption(*d) for d in dips))


def polymer_preset() -> list:
    """Ten plastics with distinct C-H / O-H style absorption patterns."""
    return [
        _polymer("red_bubble_wrap", 0.55, -0.05,
                 [(1210, 0.12, 20), (1730, 0.20, 20), (2310, 0.15, 25)], visible=(-0.40, 580.0)),
        _polymer("clear_bubble_wrap", 0.40, 0.00,
                 [(1210, 0.10, 20), (1730, 0.18, 20), (2310, 0.14, 25), (2350, 0.08, 15)]),
        _polymer("glove_loc", 0.62, -0.10,
                 [(1400, 0.15, 35), (1930, 0.25, 40), (2180, 0.10, 30)]),
        _polymer("medicine_bottle", 0.75, -0.15,
                 [(1190, 0.08, 15), (1390, 0.10, 20), (1720, 0.22, 18), (2300, 0.25, 30)]),
        _polymer("red_lid", 0.48, 0.05,
                 [(1680, 0.15, 20), (2140, 0.12, 25), (2460, 0.10, 30)], visible=(-0.35, 590.0)),
        _polymer("ping_pong_ball", 0.85, -0.20,
                 [(1660, 0.12, 25), (2080, 0.20, 30), (2270, 0.15, 25)]),
        _polymer("pvc_pipe", 0.30, 0.05,
                 [(1720, 0.10, 15), (2270, 0.12, 20), (2380, 0.07, 20)], visible=(-0.10, 520.0)),
        _polymer("pvc_extension_plug", 0.65, -0.05,
                 [(1200, 0.06, 15), (1710, 0.14, 15), (1760, 0.12, 15), (2270, 0.18, 20)]),
        _polymer("inflatable_football", 0.50, -0.10,
                 [(1150, 0.10, 25), (1540, 0.18, 30), (2020, 0.15, 30), (2340, 0.12, 20)],
                 visible=(-0.25, 560.0)),
        _polymer("foam_packaging", 0.95, -0.25,
                 [(1140, 0.10, 20), (1680, 0.25, 25), (2170, 0.15, 20), (2310, 0.20, 25)]),
    ]


PRESETS = {
    "vegetation": (vegetation_preset, VEGETATION_GRID, VEGETATION_COUNTS),
    "polymer": (polymer_preset, POLYMER_GRID, POLYMER_COUNTS),
}


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def generate_dataset(models, counts, wavelengths, seed: int) -> LabeledDataset:
    """``counts[i]`` noisy samples of ``models[i]``, classes in model order."""
    wl = check_wavelengths(wavelengths)
    counts = list(counts)
    if len(counts) != len(models):
        raise ValueError(f"{len(models)} models but {len(counts)} counts")
    if any(c < 1 for c in counts):
        raise ValueError("every class needs at least one sample")
    rng = np.random.default_rng(seed)
    blocks, labels = [], []
    for i, (m, n) in enumerate(zip(models, counts)):
        curve = m.reflectance(wl)
        noise = rng.normal(0.0, 1.0, size=(n, wl.size)) * m.noise_std
        blocks.append(np.clip(curve + noise, 0.0, CLIP_MAX))
        labels.append(np.full(n, i))
    return LabeledDataset(np.vstack(blocks), np.concatenate(labels),
                          tuple(m.name for m in models), wl)


def generate_preset(name: str, seed: int, counts=None) -> LabeledDataset:
    factory, grid, default_counts = PRESETS[name]
    return generate_dataset(factory(), counts or list(default_counts.values()), grid, seed)


def generate_cube(scene, models, wavelengths, seed: int):
    """Sample one spectrum per pixel from the material at that pixel.

    ``scene`` is a (lines, samples) integer array of indices into ``models``.
    Returns ``(SpectralCube, label_map)``.
    """
    wl = check_wavelengths(wavelengths)
    scene = np.asarray(scene)
    if scene.ndim != 2:
        raise ValueError("scene must be a 2-D array of material indices")
    if scene.size == 0 or scene.min() < 0 or scene.max() >= len(models):
        raise ValueError("scene has pixels not covered by any material")
    rng = np.random.default_rng(seed)
    curves = np.stack([m.reflectance(wl) for m in models])
    sigma = np.array([m.noise_std for m in models])
    flat = scene.ravel()
    noise = rng.normal(0.0, 1.0, size=(flat.size, wl.size)) * sigma[flat][:, None]
    pixels = np.clip(curves[flat] + noise, 0.0, CLIP_MAX)
    cube = SpectralCube(pixels.reshape(scene.shape + (wl.size,)), wl)
    return cube, scene.astype(np.int64)


def stripe_scene(lines: int, samples: int, n_materials: int) -> np.ndarray:
    """Vertical stripes, one per material, left to right."""
    cols = np.arange(samples) * n_materials // samples
    return np.broadcast_to(cols, (lines, samples)).copy()
