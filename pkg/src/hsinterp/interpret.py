"""Reading class evidence out of the trained weights.

Hidden neurons are tied to classes through the output layer: a neuron's row of
``w2`` says how strongly its activation votes for each class. The input
weights (columns of ``w1``) of a class's strongest neurons form a per-band
profile that can be laid over the class's mean spectrum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import kernels
from .mlp import MlpModel
from .spectra_io import nearest_band

PROFILE_HEADER = ("wavelength_nm", "class_mean_reflectance", "weight_mean", "weight_std")
N_ANGLES = 512


@dataclass(frozen=True)
class NeuronAssignment:
    neuron_index: int
    assigned_class: int
    assignment_weight: float


@dataclass(frozen=True)
class FeatureProfile:
    class_index: int
    neuron_indices: tuple
    weight_mean: np.ndarray
    weight_std: np.ndarray


@dataclass(frozen=True)
class PairSeparation:
    class_a: int
    class_b: int
    fraction: float
    slope: float
    upper_class: int
    n_points: int


def assign_neurons(model: MlpModel) -> list:
    cls = np.argmax(model.w2, axis=1)
    return [
        NeuronAssignment(i, int(c), float(model.w2[i, c])) for i, c in enumerate(cls)
    ]


def sort_neurons_for_display(model: MlpModel) -> np.ndarray:
    """Neuron order grouped by assigned class, strongest weight first within a group."""
    assignments = assign_neurons(model)
    cls = np.array([a.assigned_class for a in assignments])
    weight = np.array([a.assignment_weight for a in assignments])
    # lexsort: last key is primary; stable, so equal weights keep index order
    return np.lexsort((-weight, cls))


def top_k_neurons(model: MlpModel, class_index: int, k: int = 10) -> np.ndarray:
    """Indices of the k largest ``w2[:, class_index]`` (raw, not absolute), descending."""
    if not 1 <= k <= model.hidden_units:
        raise ValueError(f"k must be in [1, {model.hidden_units}], got {k}")
    col = model.w2[:, class_index]
    return np.argsort(-col, kind="stable")[:k]


def top_k_profile(model: MlpModel, class_index: int, k: int = 10) -> FeatureProfile:
    if not 0 <= class_index < model.n_classes:
        raise ValueError(f"class_index {class_index} out of range")
    chosen = top_k_neurons(model, class_index, k)
    cols = model.w1[:, chosen]
    return FeatureProfile(
        class_index,
        tuple(int(i) for i in chosen),
        cols.mean(axis=1),
        cols.std(axis=1),  # population std: k = 1 gives zeros
    )


def topk_assignment_overlap(model: MlpModel, class_index: int, k: int = 10) -> float:
    """Fraction of the class's top-k neurons whose argmax assignment is that class."""
    chosen = top_k_neurons(model, class_index, k)
    cls = np.argmax(model.w2[chosen], axis=1)
    return float(np.mean(cls == class_index))


def contrast_score(profile: FeatureProfile, wavelengths, low_window, high_window) -> float:
    """Mean profile weight in ``high_window`` minus that in ``low_window``."""
    wl = np.asarray(wavelengths, dtype=np.float64)
    out = []
    for window in (low_window, high_window):
        idx = np.flatnonzero((wl >= window[0]) & (wl <= window[1]))
        if idx.size == 0:
            raise ValueError(f"window {tuple(window)} nm contains no bands")
        out.append(profile.weight_mean[idx].mean())
    return float(out[1] - out[0])


def scan_slopes(n_angles: int = N_ANGLES) -> np.ndarray:
    """tan of ``n_angles`` evenly spaced angles strictly inside (0, pi/2)."""
    angles = (np.arange(n_angles) + 0.5) * (0.5 * np.pi / n_angles)
    return np.tan(angles)


def _best_line(x, y, in_a, slopes):
    """Best through-origin split of two groups. Returns (correct, slope, a_is_upper)."""
    a_up = kernels.slope_scan(x, y, in_a, slopes)
    b_up = kernels.slope_scan(x, y, ~in_a, slopes)
    best = max(a_up.max(), b_up.max())
    a_is_upper = bool(a_up.max() >= b_up.max())
    counts = a_up if a_is_upper else b_up
    hits = np.flatnonzero(counts == best)
    # middle of the first run of optimal slopes
    run_end = hits[0]
    while run_end + 1 < counts.size and counts[run_end + 1] == best:
        run_end += 1
    mid = 0.5 * (np.arctan(slopes[hits[0]]) + np.arctan(slopes[run_end]))
    return int(best), float(np.tan(mid)), a_is_upper


def ndvi_geometry_check(labels, spectra, wavelengths, red_nm: float = 656.0,
                        nir_nm: float = 802.0, n_angles: int = N_ANGLES) -> list:
    """Per class pair, the best 0-1 separation by a line through the origin.

    Samples are projected to (reflectance at ``red_nm``, reflectance at
    ``nir_nm``) using the nearest bands. Returns a :class:`PairSeparation`
    for every pair of classes present in ``labels``.
    """
    labels = np.asarray(labels)
    spectra = np.asarray(spectra, dtype=np.float64)
    present = np.unique(labels)
    if present.size < 2:
        return []
    x = spectra[:, nearest_band(wavelengths, red_nm)]
    y = spectra[:, nearest_band(wavelengths, nir_nm)]
    if not np.any(x) and not np.any(y):
        raise ValueError("all projected (red, nir) points are zero")
    slopes = scan_slopes(n_angles)
    report = []
    for a, b in combinations(present.tolist(), 2):
        sel = (labels == a) | (labels == b)
        best, slope, a_up = _best_line(x[sel], y[sel], labels[sel] == a, slopes)
        n = int(sel.sum())
        report.append(PairSeparation(a, b, best / n, slope, a if a_up else b, n))
    return report


def export_profile_csv(profile: FeatureProfile, class_mean_spectrum, wavelengths, path) -> None:
    wl = np.asarray(wavelengths, dtype=np.float64)
    mean_spec = np.asarray(class_mean_spectrum, dtype=np.float64)
    if not (wl.size == mean_spec.size == profile.weight_mean.size == profile.weight_std.size):
        raise ValueError("profile, class mean and wavelength lengths differ")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_HEADER)
        for row in zip(wl, mean_spec, profile.weight_mean, profile.weight_std):
            w.writerow([repr(float(v)) for v in row])


def export_assignments_csv(model: MlpModel, path) -> None:
    """neuron_index, assigned class, weight, display rank."""
    order = sort_neurons_for_display(model)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["neuron_index", "assigned_class", "class_name", "assignment_weight", "display_rank"])
        for a in assign_neurons(model):
            w.writerow([a.neuron_index, a.assigned_class, model.class_names[a.assigned_class],
                        repr(a.assignment_weight), int(rank[a.neuron_index])])
