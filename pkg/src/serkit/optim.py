"""Loss, Adam updates, the training loop, and accuracy metrics.

The default regime mirrors the chosen experiment: 125 epochs, batch 16,
Adam at lr 1e-3. Training is bitwise deterministic for a fixed seed:
shuffling and dropout draw from named streams derived from it.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidTarget, NonFiniteLoss, ShapeMismatch
from .rng import stream

#: probability floor inside the log, keeps saturated softmax finite
LOSS_FLOOR = 1e-12


def cross_entropy(probs: np.ndarray, targets) -> float:
    """Mean negative log-likelihood of the target classes."""
    n, k = probs.shape
    t = np.asarray(targets)
    if t.shape != (n,):
        raise ShapeMismatch(f"targets shape {t.shape} does not match {n} rows")
    if t.size and (t.min() < 0 or t.max() >= k):
        raise InvalidTarget(f"targets must lie in 0..{k - 1}")
    picked = probs[np.arange(n), t]
    return float(-np.mean(np.log(np.maximum(picked, LOSS_FLOOR))))


def softmax_cross_entropy_grad(probs: np.ndarray, targets) -> np.ndarray:
    """Gradient of mean cross-entropy w.r.t. the pre-softmax logits."""
    n = probs.shape[0]
    grad = probs.copy()
    grad[np.arange(n), np.asarray(targets)] -= 1.0
    return grad / n


class Adam:
    """Adaptive moment estimation over a fixed list of parameter arrays.

    step(): t += 1; m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2;
    theta <- theta - lr * mhat / (sqrt(vhat) + eps) with bias-corrected
    mhat = m/(1-b1^t), vhat = v/(1-b2^t). Updates happen in place.
    """

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params: list, grads: list) -> None:
        if len(params) != len(grads):
            raise ShapeMismatch(f"{len(params)} params vs {len(grads)} grads")
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if g.shape != p.shape:
                raise ShapeMismatch(f"gradient shape {g.shape} vs parameter {p.shape}")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= (self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)).astype(p.dtype)


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 125
    batch_size: int = 16
    seed: int = 0
    lr: float = 1e-3
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float | None = None


@dataclass
class TrainingHistory:
    records: list = field(default_factory=list)

    @property
    def losses(self):
        return [r.train_loss for r in self.records]

    @property
    def accuracies(self):
        return [r.train_acc for r in self.records]


def train(model, train_set, config: TrainingConfig, val_set=None):
    """Run the epoch/batch loop with Adam; returns (model, history).

    ``train_set`` items carry ``features`` and ``label.class_index``. Each
    epoch: seeded shuffle, fixed-size batches (short final batch kept),
    train-mode forward, combined softmax/cross-entropy backward, one Adam
    step. Loss and accuracy are accumulated from the train-mode forwards.
    """
    examples = list(train_set)
    if not examples:
        raise ValueError("train_set is empty")
    targets = np.array([e.label.class_index for e in examples])
    features = [e.features for e in examples]

    shuffle_rng = stream(config.seed, "shuffle")
    model.set_dropout_rng(stream(config.seed, "dropout"))
    optimizer = Adam(lr=config.lr)
    params = model.parameter_list()
    history = TrainingHistory()

    n = len(examples)
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n) if config.shuffle else np.arange(n)
        total_loss = 0.0
        total_correct = 0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            xb = model.prepare_batch([features[i] for i in idx])
            tb = targets[idx]
            probs = model.forward(xb, train=True)
            loss = cross_entropy(probs, tb)
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}",
                    epoch=epoch, batch=start // config.batch_size)
            total_loss += loss * len(idx)
            total_correct += int((probs.argmax(axis=1) == tb).sum())
            model.backward(softmax_cross_entropy_grad(probs, tb))
            optimizer.step(params, model.grad_list())

        val_acc = None
        if val_set is not None:
            val_acc = _eval_accuracy(model, val_set)
        history.records.append(EpochRecord(epoch=epoch, train_loss=total_loss / n,
                                           train_acc=total_correct / n, val_acc=val_acc))
    return model, history


def _eval_accuracy(model, examples) -> float:
    examples = list(examples)
    targets = np.array([e.label.class_index for e in examples])
    xb = model.prepare_batch([e.features for e in examples])
    probs = model.forward(xb, train=False)
    return categorical_accuracy(probs, targets)


def categorical_accuracy(probs: np.ndarray, targets) -> float:
    """Fraction of rows whose argmax (first index on ties) hits the target."""
    return float(np.mean(probs.argmax(axis=1) == np.asarray(targets)))


def topk_accuracy(probs: np.ndarray, targets, k: int) -> float:
    """Fraction of rows whose target is among the k top classes.

    Ranking ties resolve toward the lower class index (stable sort on
    descending probability).
    """
    n, n_classes = probs.shape
    if not 1 <= k <= n_classes:
        raise ValueError(f"k must be in 1..{n_classes}, got {k}")
    top = np.argsort(-probs, axis=1, kind="stable")[:, :k]
    return float(np.mean(np.any(top == np.asarray(targets)[:, None], axis=1)))


def write_history(path, history: TrainingHistory) -> None:
    """CSV export: epoch, train_loss, train_acc[, val_acc]."""
    has_val = any(r.val_acc is not None for r in history.records)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("epoch", "train_loss", "train_acc") + (("val_acc",) if has_val else ()))
        for r in history.records:
            row = [r.epoch, f"{r.train_loss:.8f}", f"{r.train_acc:.6f}"]
            if has_val:
                row.append("" if r.val_acc is None else f"{r.val_acc:.6f}")
            writer.writerow(row)
