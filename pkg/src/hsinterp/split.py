"""Deterministic stratified train/test split.

Randomness comes from ``numpy.random.Generator(PCG64(SeedSequence(seed)))``,
i.e. ``numpy.random.default_rng(seed)``. Classes are visited in class-index
order; each class's sample indices (in dataset order) are permuted with
``Generator.permutation`` and the first ``ceil(n_c * fraction)`` go to train.
Partitions list each class's indices in ascending order, classes in class
order, so both halves keep the source class ordering.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .spectra_io import LabeledDataset


@dataclass(frozen=True)
class SplitResult:
    train: LabeledDataset
    test: LabeledDataset
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int


def stratified_split(ds: LabeledDataset, train_fraction: float = 0.5, seed: int = 0) -> SplitResult:
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for c, name in enumerate(ds.class_names):
        members = np.flatnonzero(ds.labels == c)
        n_c = members.size
        if n_c < 2:
            raise ValueError(f"class {name!r} has {n_c} sample(s); need at least 2 to split")
        n_train = math.ceil(n_c * train_fraction)
        if n_train >= n_c:
            raise ValueError(
                f"class {name!r}: fraction {train_fraction} leaves no test samples out of {n_c}"
            )
        shuffled = rng.permutation(members)
        train_parts.append(np.sort(shuffled[:n_train]))
        test_parts.append(np.sort(shuffled[n_train:]))
    train_idx = np.concatenate(train_parts)
    test_idx = np.concatenate(test_parts)
    return SplitResult(ds.subset(train_idx), ds.subset(test_idx), train_idx, test_idx, seed)


def write_partition_csv(result: SplitResult, path) -> None:
    """Audit file: one ``index,partition`` row per source sample."""
    rows = [(int(i), "train") for i in result.train_indices]
    rows += [(int(i), "test") for i in result.test_indices]
    rows.sort()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "partition"])
        w.writerows(rows)
