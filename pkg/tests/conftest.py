import numpy as np
import pytest

from hsinterp.spectra_io import LabeledDataset


def make_dataset(rng, n_per_class=(5, 5), bands=4, spread=0.05):
    """Gaussian blobs with random centers in (0.1, 0.9)."""
    wl = 400.0 + 50.0 * np.arange(bands)
    centers = rng.uniform(0.1, 0.9, size=(len(n_per_class), bands))
    x = np.vstack([c + rng.normal(0, spread, (n, bands)) for c, n in zip(centers, n_per_class)])
    y = np.repeat(np.arange(len(n_per_class)), n_per_class)
    return LabeledDataset(x, y, [f"class{i}" for i in range(len(n_per_class))], wl)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def blobs(rng):
    return make_dataset(rng, (40, 40), bands=6)


ACCEPTANCE_LINES = []


def record(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
