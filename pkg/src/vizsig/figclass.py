"""Feedforward classifier over figure embedding vectors.

A plain numpy multilayer perceptron: rectified-linear hidden layers with
inverted dropout, softmax cross-entropy loss, mini-batch gradient descent
with inverse-time learning-rate decay (lr_t = lr0 / (1 + decay * epoch)).
Everything runs in float64 and is bitwise reproducible for a fixed seed and
thread count. `gradient_check` compares every analytic parameter gradient
against central finite differences.

The class set is whatever the training labels contain; DEFAULT_CLASSES is
the canonical three-way figure-type labeling this classifier was built for,
and label files may use any set (for example the five-way
Diagram/Plot/Table/Photo/Equation profiling).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .container import read_container, write_container
from .errors import TrainingDivergedError

DEFAULT_HIDDEN = (512, 128)
DEFAULT_CLASSES = ("embedding-visualization", "negative", "neural-network-diagram")


@dataclass(frozen=True)
class MlpConfig:
    """Layer sizes run input -> hidden... -> class count; at least one hidden."""

    layer_sizes: tuple[int, ...]
    dropout_rate: float = 0.5
    learning_rate: float = 0.001
    decay: float = 0.001
    epochs: int = 150
    batch_size: int = 256
    seed: int = 0

    def __post_init__(self):
        if len(self.layer_sizes) < 3:
            raise ValueError("need at least one hidden layer")
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError("layer sizes must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.decay < 0:
            raise ValueError("decay must be non-negative")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass(frozen=True)
class TrainingHistory:
    loss: tuple[float, ...]
    val_accuracy: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class MlpModel:
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    classes: tuple[str, ...]
    config: MlpConfig
    history: TrainingHistory

    def __post_init__(self):
        sizes = self.config.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("one weight matrix and bias per layer transition")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise ValueError(f"layer {i}: shapes do not chain {w.shape} {b.shape}")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError(f"layer {i}: non-finite parameters")
        if len(self.classes) != sizes[-1]:
            raise ValueError("class count must equal the output width")


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def init_params(
    config: MlpConfig, rng: np.random.Generator
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """He-scaled normal weights, zero biases."""
    weights, biases = [], []
    sizes = config.layer_sizes
    for i in range(len(sizes) - 1):
        scale = np.sqrt(2.0 / sizes[i])
        weights.append(rng.normal(0.0, scale, size=(sizes[i], sizes[i + 1])))
        biases.append(np.zeros(sizes[i + 1]))
    return weights, biases


def loss_and_gradients(
    weights: Sequence[np.ndarray],
    biases: Sequence[np.ndarray],
    x: np.ndarray,
    y_index: np.ndarray,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[float, list[np.ndarray], list[np.ndarray], np.ndarray]:
    """Mean softmax cross-entropy and its parameter gradients for one batch.

    Returns (loss, weight grads, bias grads, probabilities). Dropout masks,
    when active, use inverted scaling so inference needs no rescaling.
    """
    n_layers = len(weights)
    activations = [np.asarray(x, dtype=np.float64)]
    pre_acts: list[np.ndarray] = []
    masks: list[np.ndarray | None] = []
    a = activations[0]
    for layer in range(n_layers - 1):
        z = a @ weights[layer] + biases[layer]
        a = np.maximum(z, 0.0)
        if dropout_rate > 0.0:
            if rng is None:
                raise ValueError("dropout requires an RNG")
            mask = (rng.random(a.shape) >= dropout_rate) / (1.0 - dropout_rate)
            a = a * mask
        else:
            mask = None
        pre_acts.append(z)
        masks.append(mask)
        activations.append(a)
    logits = a @ weights[-1] + biases[-1]
    probs = softmax(logits)
    n = x.shape[0]
    # log(0) -> inf is deliberate: the trainer detects divergence from the loss
    with np.errstate(divide="ignore"):
        loss = float(-np.log(probs[np.arange(n), y_index]).sum() / n)

    grad_w = [np.empty(0)] * n_layers
    grad_b = [np.empty(0)] * n_layers
    delta = probs.copy()
    delta[np.arange(n), y_index] -= 1.0
    delta /= n
    for layer in range(n_layers - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ weights[layer].T
            if masks[layer - 1] is not None:
                delta = delta * masks[layer - 1]
            delta = delta * (pre_acts[layer - 1] > 0.0)
    return loss, grad_w, grad_b, probs


def _encode_labels(labels: Sequence[str], classes: tuple[str, ...]) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    try:
        return np.array([index[lab] for lab in labels], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"label {exc} outside the class set {classes}") from None


def train(
    config: MlpConfig,
    train_set: tuple[np.ndarray, Sequence[str]],
    val_set: tuple[np.ndarray, Sequence[str]] | None = None,
) -> MlpModel:
    """Mini-batch gradient descent on softmax cross-entropy.

    Classes are the sorted unique training labels; the input width and
    class count must match the configured layer sizes. Aborts with
    diagnostics if the loss goes non-finite.
    """
    x, labels = train_set
    x = np.asarray(x, dtype=np.float64)
    classes = tuple(sorted(set(labels)))
    if x.ndim != 2 or x.shape[1] != config.layer_sizes[0]:
        raise ValueError(
            f"training vectors are {x.shape[1] if x.ndim == 2 else '?'}-wide, "
            f"config expects {config.layer_sizes[0]}"
        )
    if len(classes) != config.layer_sizes[-1]:
        raise ValueError(
            f"{len(classes)} classes for an output width of {config.layer_sizes[-1]}"
        )
    y = _encode_labels(labels, classes)
    val_xy = None
    if val_set is not None:
        val_x = np.asarray(val_set[0], dtype=np.float64)
        val_xy = (val_x, _encode_labels(val_set[1], classes))

    rng = np.random.default_rng(config.seed)
    weights, biases = init_params(config, rng)
    n = x.shape[0]
    losses: list[float] = []
    val_accs: list[float] = []
    for epoch in range(config.epochs):
        lr = config.learning_rate / (1.0 + config.decay * epoch)
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grad_w, grad_b, _ = loss_and_gradients(
                weights,
                biases,
                x[batch],
                y[batch],
                dropout_rate=config.dropout_rate,
                rng=rng,
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch offset {start} (lr={lr})"
                )
            epoch_loss += loss * batch.size
            for layer in range(len(weights)):
                weights[layer] = weights[layer] - lr * grad_w[layer]
                biases[layer] = biases[layer] - lr * grad_b[layer]
        losses.append(epoch_loss / n)
        if val_xy is not None:
            probs = _forward_inference(weights, biases, val_xy[0])
            val_accs.append(float((probs.argmax(axis=1) == val_xy[1]).mean()))
    return MlpModel(
        weights=tuple(weights),
        biases=tuple(biases),
        classes=classes,
        config=config,
        history=TrainingHistory(loss=tuple(losses), val_accuracy=tuple(val_accs)),
    )


def _forward_inference(
    weights: Sequence[np.ndarray], biases: Sequence[np.ndarray], x: np.ndarray
) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    for layer in range(len(weights) - 1):
        a = np.maximum(a @ weights[layer] + biases[layer], 0.0)
    return softmax(a @ weights[-1] + biases[-1])


def predict(
    model: MlpModel, vectors: np.ndarray
) -> tuple[list[str], np.ndarray]:
    """Class label and probability vector per row; dropout is off.

    Ties in the probabilities resolve to the lowest class index.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.config.layer_sizes[0]:
        raise ValueError(
            f"vectors are {x.shape[1] if x.ndim == 2 else '?'}-wide, model expects "
            f"{model.config.layer_sizes[0]}"
        )
    probs = _forward_inference(model.weights, model.biases, x)
    labels = [model.classes[i] for i in probs.argmax(axis=1)]
    return labels, probs


@dataclass(frozen=True, eq=False)
class EvalReport:
    classes: tuple[str, ...]
    accuracy: float
    precision: dict[str, float | None]  # None marks 0/0 (no predictions)
    recall: dict[str, float | None]  # None marks 0/0 (no true examples)
    confusion: np.ndarray  # rows = true, cols = predicted

    def summary(self) -> str:
        lines = [f"accuracy: {self.accuracy:.4f}"]
        for c in self.classes:
            p = self.precision[c]
            r = self.recall[c]
            lines.append(
                f"{c}: precision="
                f"{'undefined' if p is None else f'{p:.4f}'} "
                f"recall={'undefined' if r is None else f'{r:.4f}'}"
            )
        return "\n".join(lines)


def evaluate(model: MlpModel, test_set: tuple[np.ndarray, Sequence[str]]) -> EvalReport:
    x, labels = test_set
    if len(labels) == 0:
        raise ValueError("empty test set")
    y_true = _encode_labels(labels, model.classes)
    predicted, _ = predict(model, np.asarray(x, dtype=np.float64))
    y_pred = _encode_labels(predicted, model.classes)
    n_classes = len(model.classes)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        confusion[t, p] += 1
    accuracy = float(np.trace(confusion) / confusion.sum())
    precision: dict[str, float | None] = {}
    recall: dict[str, float | None] = {}
    for i, c in enumerate(model.classes):
        col = confusion[:, i].sum()
        row = confusion[i, :].sum()
        precision[c] = float(confusion[i, i] / col) if col else None
        recall[c] = float(confusion[i, i] / row) if row else None
    return EvalReport(
        classes=model.classes,
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        confusion=confusion,
    )


def split_dataset(
    vectors: np.ndarray, labels: Sequence[str], seed: int = 0
) -> tuple[
    tuple[np.ndarray, list[str]],
    tuple[np.ndarray, list[str]],
    tuple[np.ndarray, list[str]],
]:
    """Stratified 8:1:1 split, deterministic per seed.

    Every class needs at least 10 examples. Partitions are disjoint and
    exhaustive; per-class counts are exact up to integer rounding.
    """
    x = np.asarray(vectors)
    labels = list(labels)
    if x.shape[0] != len(labels):
        raise ValueError("vectors and labels must align")
    rng = np.random.default_rng(seed)
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    splits: tuple[list[int], list[int], list[int]] = ([], [], [])
    for lab in sorted(by_class):
        idx = np.array(by_class[lab])
        if idx.size < 10:
            raise ValueError(f"class '{lab}' has {idx.size} examples, need >= 10")
        idx = idx[rng.permutation(idx.size)]
        n = idx.size
        n_train = (8 * n + 5) // 10
        n_val = (n - n_train + 1) // 2
        splits[0].extend(idx[:n_train])
        splits[1].extend(idx[n_train : n_train + n_val])
        splits[2].extend(idx[n_train + n_val :])
    return tuple(  # type: ignore[return-value]
        (x[part], [labels[i] for i in part]) for part in splits
    )


def gradient_check(
    config: MlpConfig,
    sample: tuple[np.ndarray, Sequence[str]],
    h: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Runs in float64 with dropout disabled; meant for small layer sizes.
    """
    x, labels = sample
    x = np.asarray(x, dtype=np.float64)
    classes = tuple(sorted(set(labels)))
    y = _encode_labels(labels, classes)
    rng = np.random.default_rng(config.seed)
    weights, biases = init_params(config, rng)

    def loss_at() -> float:
        loss, _, _, _ = loss_and_gradients(weights, biases, x, y, dropout_rate=0.0)
        return loss

    _, grad_w, grad_b, _ = loss_and_gradients(weights, biases, x, y, dropout_rate=0.0)
    worst = 0.0
    for params, grads in ((weights, grad_w), (biases, grad_b)):
        for param, grad in zip(params, grads):
            flat = param.reshape(-1)
            gflat = grad.reshape(-1)
            for idx in range(flat.size):
                original = flat[idx]
                flat[idx] = original + h
                up = loss_at()
                flat[idx] = original - h
                down = loss_at()
                flat[idx] = original
                numeric = (up - down) / (2.0 * h)
                denom = max(abs(gflat[idx]) + abs(numeric), 1e-8)
                worst = max(worst, abs(gflat[idx] - numeric) / denom)
    return worst


def save_model(model: MlpModel, path: Union[str, Path]) -> None:
    sections: dict[str, Union[np.ndarray, str]] = {}
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        sections[f"w{i}"] = w
        sections[f"b{i}"] = b
    sections["meta"] = json.dumps(
        {
            "classes": list(model.classes),
            "layer_sizes": list(model.config.layer_sizes),
            "dropout_rate": model.config.dropout_rate,
            "learning_rate": model.config.learning_rate,
            "decay": model.config.decay,
            "epochs": model.config.epochs,
            "batch_size": model.config.batch_size,
            "seed": model.config.seed,
            "history_loss": list(model.history.loss),
            "history_val_accuracy": list(model.history.val_accuracy),
        }
    )
    write_container(sections, path)


def load_model(path: Union[str, Path]) -> MlpModel:
    sections = read_container(path)
    meta = json.loads(sections["meta"])
    config = MlpConfig(
        layer_sizes=tuple(meta["layer_sizes"]),
        dropout_rate=meta["dropout_rate"],
        learning_rate=meta["learning_rate"],
        decay=meta["decay"],
        epochs=meta["epochs"],
        batch_size=meta["batch_size"],
        seed=meta["seed"],
    )
    n_layers = len(config.layer_sizes) - 1
    return MlpModel(
        weights=tuple(sections[f"w{i}"] for i in range(n_layers)),
        biases=tuple(sections[f"b{i}"] for i in range(n_layers)),
        classes=tuple(meta["classes"]),
        config=config,
        history=TrainingHistory(
            loss=tuple(meta["history_loss"]),
            val_accuracy=tuple(meta["history_val_accuracy"]),
        ),
    )


def write_labels_csv(
    labels: dict[str, str], path: Union[str, Path], comment: str | None = None
) -> None:
    """Label file: ``figure_id,label`` lines."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        for fid in labels:
            writer.writerow([fid, labels[fid]])


def read_labels_csv(path: Union[str, Path]) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: malformed label row {row!r}")
            out[row[0]] = row[1]
    return out


def write_confusion_csv(
    report: EvalReport, path: Union[str, Path], comment: str | None = None
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["true\\predicted"] + list(report.classes))
        for i, c in enumerate(report.classes):
            writer.writerow([c] + [int(v) for v in report.confusion[i]])
