"""Shallow classifier: dense(ReLU) -> inverted dropout -> dense(softmax).

Trained from scratch with mini-batch Adam on mean cross-entropy. Defaults
follow the usual Keras ones: Glorot-uniform weights, zero biases, lr 1e-3,
betas 0.9/0.999, epsilon 1e-7, batch 32. Inputs are raw reflectance; no
normalization is applied so the first-layer weights stay comparable to
reflectance spectra.

All randomness (init, per-epoch shuffles, dropout masks) is drawn in that
order from a single ``numpy.random.default_rng(cfg.seed)``.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectra_io import LabeledDataset, check_wavelengths

MODEL_MAGIC = b"HSINTERP-MLP\n"
MODEL_VERSION = 1
PARAM_NAMES = ("w1", "b1", "w2", "b2")


class ShapeError(ValueError):
    pass


class TrainingDivergedError(FloatingPointError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"non-finite loss {loss} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class MlpConfig:
    hidden_units: int = 128
    dropout_rate: float = 0.2
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True)
class MlpModel:
    """Weights are stored input-major: ``w1`` is (bands, hidden), ``w2`` is (hidden, classes)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    wavelengths: np.ndarray
    class_names: tuple

    def __post_init__(self):
        wl = check_wavelengths(self.wavelengths)
        arrs = {n: np.array(getattr(self, n), dtype=np.float64) for n in PARAM_NAMES}
        names = tuple(str(c) for c in self.class_names)
        bands, hidden = arrs["w1"].shape if arrs["w1"].ndim == 2 else (None, None)
        if bands is None or bands != wl.size:
            raise ShapeError(f"w1 shape {arrs['w1'].shape} does not match {wl.size} bands")
        if arrs["b1"].shape != (hidden,):
            raise ShapeError(f"b1 shape {arrs['b1'].shape}, expected ({hidden},)")
        if arrs["w2"].shape != (hidden, len(names)):
            raise ShapeError(f"w2 shape {arrs['w2'].shape}, expected ({hidden}, {len(names)})")
        if arrs["b2"].shape != (len(names),):
            raise ShapeError(f"b2 shape {arrs['b2'].shape}, expected ({len(names)},)")
        for n, a in arrs.items():
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{n} contains non-finite values")
            a.flags.writeable = False
            object.__setattr__(self, n, a)
        object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "class_names", names)

    @property
    def bands(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_units(self) -> int:
        return self.w1.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def params(self) -> dict:
        return {n: getattr(self, n) for n in PARAM_NAMES}

    def with_params(self, params: dict) -> "MlpModel":
        return MlpModel(params["w1"], params["b1"], params["w2"], params["b2"],
                        self.wavelengths, self.class_names)


@dataclass(frozen=True)
class TrainReport:
    epoch_loss: tuple
    train_accuracy: float
    elapsed_s: float = field(compare=False)


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_model(rng, wavelengths, class_names, hidden_units: int) -> MlpModel:
    bands, n_classes = len(wavelengths), len(class_names)
    w1 = glorot_uniform(rng, bands, hidden_units)
    w2 = glorot_uniform(rng, hidden_units, n_classes)
    return MlpModel(w1, np.zeros(hidden_units), w2, np.zeros(n_classes), wavelengths, class_names)


def _as_input(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.bands:
        raise ShapeError(f"input has shape {x.shape}; model expects (n, {model.bands})")
    return x


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def logits(model: MlpModel, x) -> np.ndarray:
    x = _as_input(model, x)
    h = np.maximum(x @ model.w1 + model.b1, 0.0)
    return h @ model.w2 + model.b2


def forward(model: MlpModel, x) -> np.ndarray:
    """Class probabilities, inference mode (no dropout)."""
    return softmax(logits(model, x))


def predict(model: MlpModel, x) -> np.ndarray:
    # argmax returns the first maximum, so ties go to the lower class index
    return np.argmax(forward(model, x), axis=1)


def _remap_labels(model: MlpModel, ds: LabeledDataset) -> np.ndarray:
    if ds.bands != model.bands:
        raise ShapeError(f"dataset has {ds.bands} bands; model expects {model.bands}")
    lookup = {name: i for i, name in enumerate(model.class_names)}
    unknown = [n for n in ds.class_names if n not in lookup]
    if unknown:
        raise ValueError(f"dataset classes unknown to the model: {unknown}")
    table = np.array([lookup[n] for n in ds.class_names])
    return table[ds.labels]


def accuracy(model: MlpModel, ds: LabeledDataset) -> float:
    """Fraction of samples whose predicted class name equals the label's."""
    y = _remap_labels(model, ds)
    return float(np.mean(predict(model, ds.spectra) == y))


def dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    """Inverted-dropout multiplier: 0 with probability ``rate``, else 1/(1-rate)."""
    keep = 1.0 - rate
    return (rng.random(shape) < keep) / keep


def loss_and_grads(params: dict, x: np.ndarray, y: np.ndarray, mask=None):
    """Mean cross-entropy and its gradients for one batch.

    ``mask`` multiplies the hidden activations (inverted dropout); ``None``
    means inference behaviour. ReLU'(0) is taken as 0.
    """
    w1, b1, w2, b2 = (params[n] for n in PARAM_NAMES)
    n = x.shape[0]
    pre = x @ w1 + b1
    active = pre > 0.0
    h = np.where(active, pre, 0.0)
    if mask is not None:
        h = h * mask
    z = h @ w2 + b2
    zmax = z.max(axis=1, keepdims=True)
    shifted = z - zmax
    lse = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(n)
    loss = float(np.mean(lse - shifted[rows, y]))

    dz = np.exp(shifted - lse[:, None])
    dz[rows, y] -= 1.0
    dz /= n
    g_w2 = h.T @ dz
    g_b2 = dz.sum(axis=0)
    dh = dz @ w2.T
    if mask is not None:
        dh = dh * mask
    dpre = np.where(active, dh, 0.0)
    g_w1 = x.T @ dpre
    g_b1 = dpre.sum(axis=0)
    return loss, {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2}


class Adam:
    """Adam with the epsilon-hat form used by Keras."""

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-7):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        lr_t = self.lr * np.sqrt(1.0 - self.beta2 ** self.t) / (1.0 - self.beta1 ** self.t)
        for k, g in grads.items():
            if k not in self.m:
                self.m[k] = np.zeros_like(g)
                self.v[k] = np.zeros_like(g)
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            params[k] -= lr_t * m / (np.sqrt(v) + self.epsilon)


def train(ds: LabeledDataset, cfg: MlpConfig = MlpConfig()):
    """Fit a model on ``ds``; returns ``(MlpModel, TrainReport)``."""
    if ds.n_samples == 0:
        raise ValueError("empty dataset")
    if ds.n_classes < 2:
        raise ValueError("need at least 2 classes to train a classifier")
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    model = init_model(rng, ds.wavelengths, ds.class_names, cfg.hidden_units)
    params = {k: v.copy() for k, v in model.params().items()}
    opt = Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    x, y = ds.spectra, ds.labels
    n = ds.n_samples
    epoch_loss = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            mask = None
            if cfg.dropout_rate > 0:
                mask = dropout_mask(rng, (idx.size, cfg.hidden_units), cfg.dropout_rate)
            loss, grads = loss_and_grads(params, x[idx], y[idx], mask)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, loss)
            batch_losses.append(loss)
            opt.step(params, grads)
        epoch_loss.append(float(np.mean(batch_losses)))
    for k, v in params.items():
        if not np.all(np.isfinite(v)):
            raise TrainingDivergedError(cfg.epochs, float("nan"))
    model = model.with_params(params)
    acc = float(np.mean(predict(model, x) == y))
    return model, TrainReport(tuple(epoch_loss), acc, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# gradient check
# ---------------------------------------------------------------------------

FD_STEP = 1e-5
# only guards 0/0 for exactly-zero gradients (dead units, zero inputs)
REL_ERR_FLOOR = 1e-12


def gradient_check(cfg: MlpConfig, ds: LabeledDataset) -> float:
    """Max relative error between backprop and central differences.

    Builds a model from ``cfg.seed`` (Glorot weights plus small random biases)
    and checks every parameter with dropout disabled.
    """
    if ds.n_samples > 20 or ds.bands > 10:
        raise ValueError("gradient_check is meant for <= 20 samples and <= 10 bands")
    rng = np.random.default_rng(cfg.seed)
    model = init_model(rng, ds.wavelengths, ds.class_names, cfg.hidden_units)
    params = {k: v.copy() for k, v in model.params().items()}
    params["b1"] += rng.normal(0.0, 0.1, params["b1"].shape)
    params["b2"] += rng.normal(0.0, 0.1, params["b2"].shape)
    x, y = ds.spectra, ds.labels
    _, analytic = loss_and_grads(params, x, y)
    worst = 0.0
    for name in PARAM_NAMES:
        p = params[name]
        flat = p.reshape(-1)
        g = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + FD_STEP
            lp, _ = loss_and_grads(params, x, y)
            flat[i] = orig - FD_STEP
            lm, _ = loss_and_grads(params, x, y)
            flat[i] = orig
            num = (lp - lm) / (2.0 * FD_STEP)
            err = abs(num - g[i]) / max(abs(num) + abs(g[i]), REL_ERR_FLOOR)
            worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def save_model(model: MlpModel, path) -> None:
    """Magic line, one JSON header line, then little-endian float64 payloads (row-major)."""
    header = {
        "version": MODEL_VERSION,
        "bands": model.bands,
        "hidden_units": model.hidden_units,
        "n_classes": model.n_classes,
        "dtype": "<f8",
        "arrays": [[n, list(getattr(model, n).shape)] for n in PARAM_NAMES],
        "wavelengths": [float(w) for w in model.wavelengths],
        "class_names": list(model.class_names),
    }
    payload = b"".join(
        np.ascontiguousarray(getattr(model, n), dtype="<f8").tobytes() for n in PARAM_NAMES
    )
    header["payload_bytes"] = len(payload)
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(payload)


def load_model(path) -> MlpModel:
    raw = Path(path).read_bytes()
    if not raw.startswith(MODEL_MAGIC):
        raise ModelFormatError(f"{path}: not a model file")
    rest = raw[len(MODEL_MAGIC):]
    nl = rest.find(b"\n")
    if nl < 0:
        raise ModelFormatError(f"{path}: truncated header")
    try:
        header = json.loads(rest[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: corrupt header ({exc})") from None
    if header.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"{path}: unsupported version {header.get('version')!r}")
    payload = rest[nl + 1:]
    if len(payload) != header.get("payload_bytes"):
        raise ModelFormatError(
            f"{path}: payload is {len(payload)} bytes, header says {header.get('payload_bytes')}"
        )
    arrays, offset = {}, 0
    try:
        for name, shape in header["arrays"]:
            count = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
            arrays[name] = arr.reshape(shape).astype(np.float64)
            offset += count * 8
        if offset != len(payload) or set(arrays) != set(PARAM_NAMES):
            raise ModelFormatError(f"{path}: array table does not match payload")
        return MlpModel(arrays["w1"], arrays["b1"], arrays["w2"], arrays["b2"],
                        header["wavelengths"], header["class_names"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: {exc}") from None
