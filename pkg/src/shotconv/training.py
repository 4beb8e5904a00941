"""Mini-batch SGD training over labeled snippets.

The training loop is deterministic: the held-out split, per-epoch
shuffles, batch boundaries and gradient accumulation order are all fixed
functions of the config seed, so identical inputs give bit-identical
final parameters at a fixed precision. Gradients are averaged over the
batch, keeping the learning rate meaningful across batch sizes. The
update is plain SGD: no momentum, no weight decay, no schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SnippetDataset
from .model import (
    WINDOW,
    backward_from_cache,
    forward_logits_batch,
    forward_with_cache,
    sgd_step,
)
from .volume import softmax, softmax_cross_entropy

# Center labels store 1 = same shot; the head's class order is
# (p_same, p_transition), so the cross-entropy class index is 1 - label.


@dataclass
class TrainConfig:
    learning_rate: float = 0.02
    batch_size: int = 32
    epochs: int = 30
    seed: int = 0
    eval_fraction: float = 0.1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if not 0.0 <= self.eval_fraction < 1.0:
            raise ValueError(
                f"eval_fraction must lie in [0, 1), got {self.eval_fraction}"
            )


@dataclass(frozen=True)
class SnippetMetrics:
    """Binary metrics on center labels; "transition" is the positive class."""

    accuracy: float
    precision: float
    recall: float

    @property
    def f1(self):
        if self.precision + self.recall == 0:
            return 0.0
        return 2 * self.precision * self.recall / (self.precision + self.recall)

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    holdout: SnippetMetrics | None = None

    def to_dict(self):
        d = {"epoch": self.epoch, "train_loss": self.train_loss}
        if self.holdout is not None:
            d.update({f"holdout_{k}": v for k, v in self.holdout.to_dict().items()})
        return d


def _as_xy(dataset):
    if isinstance(dataset, SnippetDataset):
        return dataset.frames, dataset.center_labels
    frames, labels = dataset
    return np.asarray(frames), np.asarray(labels)


def metrics_from_predictions(true_transition, pred_transition):
    """Accuracy/precision/recall with "transition" as the positive class."""
    true_transition = np.asarray(true_transition, dtype=bool)
    pred_transition = np.asarray(pred_transition, dtype=bool)
    tp = int(np.sum(true_transition & pred_transition))
    fp = int(np.sum(~true_transition & pred_transition))
    fn = int(np.sum(true_transition & ~pred_transition))
    correct = int(np.sum(true_transition == pred_transition))
    total = true_transition.size
    return SnippetMetrics(
        accuracy=correct / total if total else 0.0,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        recall=tp / (tp + fn) if tp + fn else 0.0,
    )


def predict_centers(params, frames, batch_size=64):
    """Center-pair outputs for many snippets.

    Returns ``(labels, probs)``: predicted center labels (1 = same shot)
    and (p_same, p_transition) pairs, computed in batches.
    """
    frames = np.asarray(frames)
    if frames.ndim != 5 or frames.shape[1] != WINDOW:
        raise ValueError(
            f"expected snippets of shape (n, {WINDOW}, 64, 64, 3), got {frames.shape}"
        )
    probs = np.empty((frames.shape[0], 2), dtype=np.float64)
    for lo in range(0, frames.shape[0], batch_size):
        batch = frames[lo : lo + batch_size]
        logits = forward_logits_batch(params, batch)[:, 0, :]
        probs[lo : lo + batch.shape[0]] = softmax(logits, axis=-1)
    labels = (probs[:, 0] >= probs[:, 1]).astype(np.uint8)
    return labels, probs


def evaluate_snippets(params, frames, center_labels, batch_size=64):
    """Accuracy/precision/recall of center-label predictions."""
    frames = np.asarray(frames)
    center_labels = np.asarray(center_labels)
    if frames.shape[0] == 0:
        raise ValueError("no snippets to evaluate")
    predicted, _ = predict_centers(params, frames, batch_size)
    return metrics_from_predictions(center_labels == 0, predicted == 0)


def train(params, dataset, config=None, progress=None):
    """Train ``params`` on a snippet dataset.

    ``dataset`` is a :class:`SnippetDataset` or a ``(frames, labels)``
    pair with frames ``(n, 10, 64, 64, 3)`` in [0, 1] and center labels
    in {0, 1}. Returns ``(params, history)`` with one
    :class:`EpochStats` per epoch; ``progress`` (if given) is called with
    each EpochStats as it completes.
    """
    config = config or TrainConfig()
    frames, labels = _as_xy(dataset)
    n = frames.shape[0]
    if n == 0:
        raise ValueError("empty dataset")
    if frames.ndim != 5 or frames.shape[1:] != (WINDOW, 64, 64, 3):
        raise ValueError(
            f"expected snippets of shape (n, {WINDOW}, 64, 64, 3), got {frames.shape}"
        )
    if labels.shape != (n,):
        raise ValueError(f"expected {n} center labels, got shape {labels.shape}")

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(n)
    n_eval = int(round(config.eval_fraction * n))
    eval_idx = order[:n_eval]
    train_idx = order[n_eval:]
    if train_idx.size == 0:
        raise ValueError("eval_fraction leaves no training snippets")

    classes = (1 - labels.astype(np.int64))  # class 1 = transition
    history = []
    for epoch in range(1, config.epochs + 1):
        epoch_order = train_idx[rng.permutation(train_idx.size)]
        loss_sum = 0.0
        for lo in range(0, epoch_order.size, config.batch_size):
            idx = epoch_order[lo : lo + config.batch_size]
            batch = frames[idx]
            target = classes[idx][:, np.newaxis]
            logits, caches = forward_with_cache(params, batch)
            losses, dlogits = softmax_cross_entropy(logits, target)
            loss_sum += float(losses.sum())
            dlogits /= idx.size
            grads = backward_from_cache(params, caches, dlogits)
            params = sgd_step(params, grads, config.learning_rate)
        holdout = None
        if eval_idx.size:
            holdout = evaluate_snippets(
                params, frames[eval_idx], labels[eval_idx], config.batch_size
            )
        stats = EpochStats(
            epoch=epoch,
            train_loss=loss_sum / train_idx.size,
            holdout=holdout,
        )
        history.append(stats)
        if progress is not None:
            progress(stats)
    return params, history
