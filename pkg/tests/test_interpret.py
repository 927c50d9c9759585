import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsinterp.interpret import (
    PROFILE_HEADER, FeatureProfile, assign_neurons, contrast_score, export_assignments_csv,
    export_profile_csv, ndvi_geometry_check, scan_slopes, sort_neurons_for_display,
    top_k_neurons, top_k_profile, topk_assignment_overlap,
)
from hsinterp.mlp import MlpModel


def _model(w2, w1=None, bands=4):
    w2 = np.asarray(w2, dtype=float)
    hidden, classes = w2.shape
    if w1 is None:
        w1 = np.arange(bands * hidden, dtype=float).reshape(bands, hidden)
    return MlpModel(w1, np.zeros(hidden), w2, np.zeros(classes),
                    400.0 + 100 * np.arange(np.shape(w1)[0]), [f"c{i}" for i in range(classes)])


def _random(seed, bands=6, hidden=20, classes=3):
    rng = np.random.default_rng(seed)
    return MlpModel(rng.normal(size=(bands, hidden)), rng.normal(size=hidden),
                    rng.normal(size=(hidden, classes)), rng.normal(size=classes),
                    400.0 + 100 * np.arange(bands), [f"c{i}" for i in range(classes)])


def test_assign_rows():
    m = _model([[0.5, -0.1, 0.2], [0.0, 0.0, 0.0], [0.1, 0.2, 0.9]])
    a = assign_neurons(m)
    assert [x.assigned_class for x in a] == [0, 0, 2]
    assert a[0].assignment_weight == 0.5


def test_assign_total():
    m = _random(0, hidden=128)
    a = assign_neurons(m)
    assert sorted(x.neuron_index for x in a) == list(range(128))


@given(st.floats(1e-3, 1e3))
def test_assign_scale_invariant(alpha):
    m = _random(1)
    scaled = MlpModel(m.w1, m.b1, m.w2 * alpha, m.b2, m.wavelengths, m.class_names)
    assert [x.assigned_class for x in assign_neurons(m)] == \
        [x.assigned_class for x in assign_neurons(scaled)]


def test_sort_hand_example():
    # neurons assigned [1, 0, 1] with weights [0.3, 0.9, 0.7]
    m = _model([[0.0, 0.3], [0.9, 0.0], [0.0, 0.7]])
    assert sort_neurons_for_display(m).tolist() == [1, 2, 0]


def test_sort_single_class_descending():
    w = np.array([0.2, 0.8, 0.5, 0.1])
    m = _model(np.stack([w, w - 5], axis=1))
    assert sort_neurons_for_display(m).tolist() == [1, 2, 0, 3]


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_sort_is_permutation(seed):
    m = _random(seed, hidden=50)
    order = sort_neurons_for_display(m)
    assert sorted(order.tolist()) == list(range(50))
    cls = np.argmax(m.w2[order], axis=1)
    assert np.all(np.diff(cls) >= 0)


def test_top1_profile():
    m = _random(2)
    p = top_k_profile(m, 1, k=1)
    j = int(np.argmax(m.w2[:, 1]))
    assert p.neuron_indices == (j,)
    np.testing.assert_array_equal(p.weight_mean, m.w1[:, j])
    np.testing.assert_array_equal(p.weight_std, 0.0)


def test_all_neurons_profile_matches_column_stats():
    m = _random(3)
    p = top_k_profile(m, 0, k=m.hidden_units)
    for b in range(m.bands):
        col = list(m.w1[b])
        mu = sum(col) / len(col)
        sd = (sum((v - mu) ** 2 for v in col) / len(col)) ** 0.5
        assert p.weight_mean[b] == pytest.approx(mu, abs=1e-12)
        assert p.weight_std[b] == pytest.approx(sd, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_top10_matches_sort_oracle(seed):
    m = _random(seed, hidden=128)
    for c in range(3):
        ranked = sorted(range(128), key=lambda i: m.w2[i, c], reverse=True)
        assert set(top_k_profile(m, c, 10).neuron_indices) == set(ranked[:10])
        assert len(set(top_k_profile(m, c, 10).neuron_indices)) == 10


def test_top_k_uses_raw_weights():
    # large negative weight must not be selected
    m = _model([[-9.0, 0.0], [0.5, 0.0], [0.1, 0.0]])
    assert top_k_neurons(m, 0, 2).tolist() == [1, 2]


def test_top_k_bounds():
    with pytest.raises(ValueError):
        top_k_profile(_random(0), 0, k=21)


def test_overlap_fraction():
    m = _model([[1.0, 0.0], [0.9, 2.0], [0.8, 0.0]])
    # top-2 for class 0: neurons 0 and 1; neuron 1 is assigned to class 1
    assert topk_assignment_overlap(m, 0, 2) == 0.5


WL = np.array([600.0, 650.0, 660.0, 800.0, 860.0, 870.0])


def _profile(mean):
    return FeatureProfile(0, (0,), np.asarray(mean, float), np.zeros(len(mean)))


def test_contrast_zero_and_two():
    assert contrast_score(_profile([0, 0.3, 0.3, 0, 0.3, 0.3]), WL, (640, 670), (850, 880)) == 0.0
    assert contrast_score(_profile([0, -1, -1, 0, 1, 1]), WL, (640, 670), (850, 880)) == 2.0


@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_contrast_antisymmetric(vals):
    p = _profile(vals)
    assert contrast_score(p, WL, (640, 670), (850, 880)) == \
        -contrast_score(p, WL, (850, 880), (640, 670))


def test_contrast_empty_window():
    with pytest.raises(ValueError, match="no bands"):
        contrast_score(_profile([0] * 6), WL, (700, 750), (850, 880))


# ---------------------------------------------------------------- geometry

def _slope2_fixture(n=200, seed=0):
    rng = np.random.default_rng(seed)
    red = rng.uniform(0.05, 0.4, n)
    above = rng.uniform(2.05, 3.0, n)    # class 0: slope > 2
    below = rng.uniform(1.2, 1.95, n)    # class 1: slope < 2
    wl = np.array([656.0, 802.0])
    x = np.concatenate([np.stack([red, red * above], 1), np.stack([red, red * below], 1)])
    y = np.repeat([0, 1], n)
    return x, y, wl


def test_slope2_fixture():
    x, y, wl = _slope2_fixture()
    (r,) = ndvi_geometry_check(y, x, wl)
    assert r.fraction == 1.0
    assert 1.8 <= r.slope <= 2.2
    assert r.upper_class == 0


def test_geometry_single_class():
    x, y, wl = _slope2_fixture()
    assert ndvi_geometry_check(np.zeros_like(y), x, wl) == []


def test_geometry_degenerate():
    with pytest.raises(ValueError):
        ndvi_geometry_check([0, 1], np.zeros((2, 2)), [656.0, 802.0])


def test_geometry_brute_force(rng):
    # overlapping classes: compare against a direct per-slope count
    x = rng.uniform(0.01, 1, (150, 2))
    y = (x[:, 1] / x[:, 0] + rng.normal(0, 0.5, 150) > 1.3).astype(int)
    (r,) = ndvi_geometry_check(y, x, [656.0, 802.0])
    best = 0
    for s in scan_slopes():
        up = x[:, 1] > s * x[:, 0]
        best = max(best, np.sum(up == (y == 0)), np.sum(up == (y == 1)))
    assert r.fraction == best / 150
    assert 0.0 <= r.fraction <= 1.0


def test_scan_slopes():
    s = scan_slopes()
    assert s.size == 512 and np.all(np.diff(s) > 0) and s[0] > 0 and np.isfinite(s[-1])


# ---------------------------------------------------------------- exports

def test_profile_csv(tmp_path):
    prof = FeatureProfile(0, (1, 2), np.array([0.1, -0.2, 1 / 3]), np.array([0.0, 0.5, 2 / 3]))
    export_profile_csv(prof, [0.05, 0.1, 0.4], [650.0, 700.0, 860.0], tmp_path / "p.csv")
    text = (tmp_path / "p.csv").read_text()
    assert text.splitlines()[0] == "wavelength_nm,class_mean_reflectance,weight_mean,weight_std"
    rows = list(csv.reader(text.splitlines()[1:]))
    assert len(rows) == 3 and all(len(r) == 4 for r in rows)
    assert float(rows[2][2]) == 1 / 3 and float(rows[2][3]) == 2 / 3
    assert ",".join(PROFILE_HEADER) == text.splitlines()[0]


def test_profile_csv_length_mismatch(tmp_path):
    prof = FeatureProfile(0, (1,), np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        export_profile_csv(prof, [0.1, 0.2], [1.0, 2.0, 3.0], tmp_path / "p.csv")


def test_assignments_csv(tmp_path):
    m = _model([[0.0, 0.3], [0.9, 0.0], [0.0, 0.7]])
    export_assignments_csv(m, tmp_path / "a.csv")
    rows = list(csv.DictReader(open(tmp_path / "a.csv")))
    assert [r["display_rank"] for r in rows] == ["2", "0", "1"]
