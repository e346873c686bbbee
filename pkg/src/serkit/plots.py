"""Figure rendering for the report paths (training curves, confusion heatmap)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dataset import CLASS_LABELS


def plot_training_curves(history, path) -> None:
    """Loss and accuracy per epoch, written as one two-panel figure."""
    epochs = [r.epoch for r in history.records]
    fig, (ax_loss, ax_acc) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax_loss.plot(epochs, history.losses, color="tab:red")
    ax_loss.set_ylabel("train loss")
    ax_loss.grid(alpha=0.3)
    ax_acc.plot(epochs, history.accuracies, color="tab:blue", label="train")
    val = [(r.epoch, r.val_acc) for r in history.records if r.val_acc is not None]
    if val:
        ax_acc.plot(*zip(*val), color="tab:green", label="held-out")
        ax_acc.legend()
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(0, 1.02)
    ax_acc.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_confusion(confusion, path) -> None:
    """Annotated heatmap of the 12x12 confusion counts."""
    confusion = np.asarray(confusion)
    labels = [str(c) for c in CLASS_LABELS]
    fig, ax = plt.subplots(figsize=(9, 8))
    im = ax.imshow(confusion, cmap="Blues")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(len(labels)), labels, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    threshold = confusion.max() / 2 if confusion.max() else 0.5
    for i in range(confusion.shape[0]):
        for j in range(confusion.shape[1]):
            if confusion[i, j]:
                ax.text(j, i, str(int(confusion[i, j])), ha="center", va="center",
                        fontsize=7,
                        color="white" if confusion[i, j] > threshold else "black")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
