"""Hand-rolled MLP surrogate of a beam table: (beam az, beam el, rotation) -> power.

Deliberately dependency-free numerics (numpy only): forward, backprop, and
Adam are spelled out so they can be verified against finite differences.
Training is bit-reproducible for a fixed (records, specs, seed) triple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import nmse
from .datasets import BeampatternTable
from .errors import DomainError, ModelFormatError

__all__ = [
    "MlpSpec",
    "TrainSpec",
    "MlpModel",
    "flatten_table",
    "split_records",
    "train",
    "gradient_check",
    "save_model",
    "load_model",
]

_MODEL_MAGIC = "risbeam-mlp v1"


@dataclass(frozen=True)
class MlpSpec:
    hidden_layers: int = 3
    hidden_width: int = 16
    input_dim: int = 3
    output_dim: int = 1
    activation: str = "tanh"

    def __post_init__(self) -> None:
        if self.hidden_layers < 1 or self.hidden_width < 1:
            raise DomainError("need at least one hidden layer of width >= 1")
        if self.input_dim < 1 or self.output_dim < 1:
            raise DomainError("input_dim and output_dim must be >= 1")
        if self.activation != "tanh":
            raise DomainError(f"unsupported activation {self.activation!r}")

    def layer_shapes(self) -> list[tuple[int, int]]:
        dims = (
            [self.input_dim]
            + [self.hidden_width] * self.hidden_layers
            + [self.output_dim]
        )
        return list(zip(dims[:-1], dims[1:]))


@dataclass(frozen=True)
class TrainSpec:
    epochs: int = 750
    batch_size: int = 100
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    split_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise DomainError("epochs must be >= 0")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if not 0.0 < self.split_fraction < 1.0:
            raise DomainError("split_fraction must be in (0, 1)")
        if self.learning_rate <= 0:
            raise DomainError("learning_rate must be > 0")


@dataclass(eq=False)
class MlpModel:
    """Trained network plus the normalization constants baked in at fit time."""

    spec: MlpSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input_lo: np.ndarray
    input_hi: np.ndarray
    target_mean: float
    target_std: float

    def __post_init__(self) -> None:
        shapes = self.spec.layer_shapes()
        if len(self.weights) != len(shapes) or len(self.biases) != len(shapes):
            raise DomainError("layer count does not match the declared shape")
        for (fan_in, fan_out), w, b in zip(shapes, self.weights, self.biases):
            if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
                raise DomainError(
                    f"layer shape mismatch: got {w.shape}/{b.shape}, "
                    f"want {(fan_in, fan_out)}"
                )
        self.input_lo = np.asarray(self.input_lo, dtype=float)
        self.input_hi = np.asarray(self.input_hi, dtype=float)
        if self.input_lo.shape != (self.spec.input_dim,) or self.input_hi.shape != (
            self.spec.input_dim,
        ):
            raise DomainError("normalization constants do not match input_dim")
        finite = (
            np.all(np.isfinite(self.input_lo))
            and np.all(np.isfinite(self.input_hi))
            and math.isfinite(self.target_mean)
            and math.isfinite(self.target_std)
        )
        if not finite or self.target_std <= 0:
            raise DomainError("normalization constants must be finite, std > 0")

    def normalize_inputs(self, raw: np.ndarray) -> np.ndarray:
        span = np.where(self.input_hi > self.input_lo, self.input_hi - self.input_lo, 1.0)
        return 2.0 * (raw - self.input_lo) / span - 1.0

    def forward(self, normalized: np.ndarray) -> np.ndarray:
        h = normalized
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.tanh(h)
        return h

    def predict(self, beam_azimuth_deg, beam_elevation_deg, rotation_deg) -> float:
        raw = np.array(
            [[beam_azimuth_deg, beam_elevation_deg, rotation_deg]], dtype=float
        )
        return float(self.predict_batch(raw)[0])

    def predict_batch(self, raw: np.ndarray) -> np.ndarray:
        raw = np.asarray(raw, dtype=float)
        if raw.ndim != 2 or raw.shape[1] != self.spec.input_dim:
            raise DomainError(f"expected (n, {self.spec.input_dim}) inputs, got {raw.shape}")
        out = self.forward(self.normalize_inputs(raw))
        return out[:, 0] * self.target_std + self.target_mean


def flatten_table(table: BeampatternTable) -> np.ndarray:
    """Table cells as (beam az, beam el, rotation, power) records, row-major."""
    rows, cols = table.power_dbm.shape
    az = np.repeat(table.beams[:, 0], cols)
    el = np.repeat(table.beams[:, 1], cols)
    rot = np.tile(table.rotations, rows)
    return np.column_stack([az, el, rot, table.power_dbm.reshape(-1)])


def split_records(
    records: np.ndarray, train_spec: TrainSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle-split into (train_indices, val_indices).

    Exposed separately so callers can reproduce exactly which records the
    trainer saw; train() uses this function with the same spec.
    """
    records = np.asarray(records, dtype=float)
    if records.ndim != 2 or records.shape[1] < 2:
        raise DomainError(f"records must be (n, features+1), got {records.shape}")
    permutation = np.random.default_rng(train_spec.seed).permutation(records.shape[0])
    cut = int(records.shape[0] * train_spec.split_fraction)
    if cut == 0 or cut == records.shape[0]:
        raise DomainError("split leaves an empty train or validation set")
    return permutation[:cut], permutation[cut:]


def _init_params(
    spec: MlpSpec, rng: np.random.Generator, zero_head: bool
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    weights, biases = [], []
    shapes = spec.layer_shapes()
    for i, (fan_in, fan_out) in enumerate(shapes):
        if zero_head and i == len(shapes) - 1:
            weights.append(np.zeros((fan_in, fan_out)))
        else:
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward_states(
    weights: list[np.ndarray], biases: list[np.ndarray], x: np.ndarray
) -> list[np.ndarray]:
    # activations[0] is the input; activations[i+1] the output of layer i.
    activations = [x]
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = activations[-1] @ w + b
        activations.append(np.tanh(z) if i < last else z)
    return activations


def _gradients(
    weights: list[np.ndarray],
    biases: list[np.ndarray],
    x: np.ndarray,
    y: np.ndarray,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """MSE loss and its gradients for one batch (normalized spaces)."""
    activations = _forward_states(weights, biases, x)
    out = activations[-1]
    diff = out - y
    loss = float(np.mean(diff**2))
    n = x.shape[0]
    # d loss / d out; the mean runs over every output entry.
    delta = 2.0 * diff / (n * y.shape[1])
    grad_w = [np.empty_like(w) for w in weights]
    grad_b = [np.empty_like(b) for b in biases]
    for i in range(len(weights) - 1, -1, -1):
        grad_w[i] = activations[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (1.0 - activations[i] ** 2)
    return loss, grad_w, grad_b


def train(
    records: np.ndarray,
    mlp_spec: MlpSpec = MlpSpec(),
    train_spec: TrainSpec = TrainSpec(),
    epoch_loss_out: list[float] | None = None,
) -> tuple[MlpModel, float, float]:
    """Mini-batch Adam on MSE; returns (model, train NMSE, val NMSE).

    Normalization constants come from the training split only: inputs map
    per-feature to [-1, 1], targets to zero mean and unit variance. When
    `epoch_loss_out` is given, the full-training-set loss is appended after
    every epoch.
    """
    records = np.asarray(records, dtype=float)
    if records.ndim != 2 or records.shape[1] != mlp_spec.input_dim + 1:
        raise DomainError(
            f"records must be (n, {mlp_spec.input_dim + 1}), got {records.shape}"
        )
    if not np.all(np.isfinite(records)):
        raise DomainError("records contain non-finite values")
    if records.shape[0] < 2 * train_spec.batch_size:
        raise DomainError(
            f"need at least {2 * train_spec.batch_size} records, "
            f"got {records.shape[0]}"
        )

    train_idx, val_idx = split_records(records, train_spec)
    train_x_raw = records[train_idx, :-1]
    train_y_raw = records[train_idx, -1]
    val_x_raw = records[val_idx, :-1]
    val_y_raw = records[val_idx, -1]

    lo = train_x_raw.min(axis=0)
    hi = train_x_raw.max(axis=0)
    mean = float(train_y_raw.mean())
    std = float(train_y_raw.std())
    if std == 0.0:
        std = 1.0

    # Same generator continues from the split permutation draw: the whole
    # training trajectory is a function of train_spec.seed.
    rng = np.random.default_rng(train_spec.seed)
    rng.permutation(records.shape[0])  # replay the split draw
    weights, biases = _init_params(mlp_spec, rng, zero_head=True)

    model = MlpModel(
        spec=mlp_spec,
        weights=weights,
        biases=biases,
        input_lo=lo,
        input_hi=hi,
        target_mean=mean,
        target_std=std,
    )
    x = model.normalize_inputs(train_x_raw)
    y = ((train_y_raw - mean) / std)[:, None]

    moments1_w = [np.zeros_like(w) for w in weights]
    moments2_w = [np.zeros_like(w) for w in weights]
    moments1_b = [np.zeros_like(b) for b in biases]
    moments2_b = [np.zeros_like(b) for b in biases]
    b1, b2, eps, lr = (
        train_spec.adam_beta1,
        train_spec.adam_beta2,
        train_spec.adam_eps,
        train_spec.learning_rate,
    )
    step = 0
    for _ in range(train_spec.epochs):
        order = rng.permutation(x.shape[0])
        for start in range(0, x.shape[0], train_spec.batch_size):
            batch = order[start : start + train_spec.batch_size]
            _, grad_w, grad_b = _gradients(weights, biases, x[batch], y[batch])
            step += 1
            correct1 = 1.0 - b1**step
            correct2 = 1.0 - b2**step
            for params, grads, m1, m2 in (
                (weights, grad_w, moments1_w, moments2_w),
                (biases, grad_b, moments1_b, moments2_b),
            ):
                for p, g, m, v in zip(params, grads, m1, m2):
                    m *= b1
                    m += (1.0 - b1) * g
                    v *= b2
                    v += (1.0 - b2) * g**2
                    p -= lr * (m / correct1) / (np.sqrt(v / correct2) + eps)
        if epoch_loss_out is not None:
            loss, _, _ = _gradients(weights, biases, x, y)
            epoch_loss_out.append(loss)

    train_nmse = nmse(model.predict_batch(train_x_raw), train_y_raw)
    val_nmse = nmse(model.predict_batch(val_x_raw), val_y_raw)
    return model, train_nmse, val_nmse


def gradient_check(
    mlp_spec: MlpSpec = MlpSpec(),
    seed: int = 0,
    *,
    batch_size: int = 8,
    step: float = 1e-5,
    flip_sign: bool = False,
) -> float:
    """Max relative error of backprop against central finite differences.

    Runs on a randomly initialized model (including the output head) and a
    random batch in normalized space. `flip_sign` negates the analytic
    gradient first; a correct implementation then reports an error near 2,
    which is the self-test that the check can actually catch a bug.
    """
    rng = np.random.default_rng(seed)
    weights, biases = _init_params(mlp_spec, rng, zero_head=False)
    for b in biases:
        b += rng.uniform(-0.1, 0.1, size=b.shape)
    x = rng.uniform(-1.0, 1.0, size=(batch_size, mlp_spec.input_dim))
    y = rng.uniform(-1.0, 1.0, size=(batch_size, mlp_spec.output_dim))

    _, grad_w, grad_b = _gradients(weights, biases, x, y)
    if flip_sign:
        grad_w = [-g for g in grad_w]
        grad_b = [-g for g in grad_b]

    def loss_now() -> float:
        loss, _, _ = _gradients(weights, biases, x, y)
        return loss

    worst = 0.0
    for params, grads in ((weights, grad_w), (biases, grad_b)):
        for p, g in zip(params, grads):
            flat = p.reshape(-1)
            for i in range(flat.size):
                keep = flat[i]
                flat[i] = keep + step
                up = loss_now()
                flat[i] = keep - step
                down = loss_now()
                flat[i] = keep
                numeric = (up - down) / (2.0 * step)
                analytic = float(g.reshape(-1)[i])
                denom = max(abs(analytic), abs(numeric), 1e-8)
                worst = max(worst, abs(analytic - numeric) / denom)
    return worst


def _format_vector(values: np.ndarray) -> str:
    return " ".join("%.17g" % v for v in np.asarray(values, dtype=float).reshape(-1))


def save_model(model: MlpModel, path) -> None:
    """Versioned text serialization; identical models produce identical bytes."""
    spec = model.spec
    lines = [
        _MODEL_MAGIC,
        f"spec {spec.hidden_layers} {spec.hidden_width} "
        f"{spec.input_dim} {spec.output_dim} {spec.activation}",
        "input_lo " + _format_vector(model.input_lo),
        "input_hi " + _format_vector(model.input_hi),
        "target_mean " + _format_vector(np.array([model.target_mean])),
        "target_std " + _format_vector(np.array([model.target_std])),
    ]
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        lines.append(f"layer {i} {w.shape[0]} {w.shape[1]}")
        for row in w:
            lines.append("w " + _format_vector(row))
        lines.append("b " + _format_vector(b))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_floats(body: str, count: int, where: str) -> np.ndarray:
    parts = body.split()
    if len(parts) != count:
        raise ModelFormatError(f"{where}: expected {count} values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ModelFormatError(f"{where}: {exc}") from exc


def load_model(path) -> MlpModel:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != _MODEL_MAGIC:
        raise ModelFormatError(
            f"not a recognized model file (expected first line {_MODEL_MAGIC!r})"
        )
    if len(lines) < 6 or not lines[1].startswith("spec "):
        raise ModelFormatError("missing spec line")
    spec_parts = lines[1].split()
    if len(spec_parts) != 6:
        raise ModelFormatError(f"spec line has {len(spec_parts)} fields, want 6")
    try:
        spec = MlpSpec(
            hidden_layers=int(spec_parts[1]),
            hidden_width=int(spec_parts[2]),
            input_dim=int(spec_parts[3]),
            output_dim=int(spec_parts[4]),
            activation=spec_parts[5],
        )
    except (ValueError, DomainError) as exc:
        raise ModelFormatError(f"bad spec line: {exc}") from exc

    def expect(index: int, prefix: str) -> str:
        if index >= len(lines) or not lines[index].startswith(prefix + " "):
            raise ModelFormatError(f"line {index + 1}: expected {prefix!r}")
        return lines[index][len(prefix) + 1 :]

    lo = _parse_floats(expect(2, "input_lo"), spec.input_dim, "input_lo")
    hi = _parse_floats(expect(3, "input_hi"), spec.input_dim, "input_hi")
    mean = float(_parse_floats(expect(4, "target_mean"), 1, "target_mean")[0])
    std = float(_parse_floats(expect(5, "target_std"), 1, "target_std")[0])

    weights, biases = [], []
    cursor = 6
    for i, (fan_in, fan_out) in enumerate(spec.layer_shapes()):
        header = expect(cursor, "layer")
        if header.split() != [str(i), str(fan_in), str(fan_out)]:
            raise ModelFormatError(
                f"line {cursor + 1}: expected 'layer {i} {fan_in} {fan_out}'"
            )
        cursor += 1
        rows = []
        for _ in range(fan_in):
            rows.append(_parse_floats(expect(cursor, "w"), fan_out, f"layer {i} w"))
            cursor += 1
        weights.append(np.vstack(rows))
        biases.append(_parse_floats(expect(cursor, "b"), fan_out, f"layer {i} b"))
        cursor += 1
    if any(line.strip() for line in lines[cursor:]):
        raise ModelFormatError(f"line {cursor + 1}: trailing content after last layer")
    try:
        return MlpModel(
            spec=spec,
            weights=weights,
            biases=biases,
            input_lo=lo,
            input_hi=hi,
            target_mean=mean,
            target_std=std,
        )
    except DomainError as exc:
        raise ModelFormatError(str(exc)) from exc
