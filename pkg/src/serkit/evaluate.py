"""Blind-set evaluation: accuracy, top-5 containment, confusion, error list."""

import json
from dataclasses import dataclass

import numpy as np

from .dataset import CLASS_LABELS, ClassLabel
from .errors import ShapeMismatch
from .optim import categorical_accuracy, topk_accuracy


@dataclass(frozen=True)
class EvalReport:
    n: int
    top1_accuracy: float
    top5_accuracy: float
    #: rows = actual class, cols = predicted class
    confusion: np.ndarray
    #: (source_id, actual, predicted) for each miss, in evaluation order
    errors: tuple
    #: accuracy with genders collapsed (right emotion, either gender)
    emotion_accuracy: float


def evaluate(model, test_set) -> EvalReport:
    """One eval-mode prediction per example; deterministic for fixed inputs."""
    examples = list(test_set)
    if not examples:
        raise ValueError("test_set is empty")
    expected_shape = getattr(model, "input_shape", None)
    if expected_shape is not None:
        for e in examples:
            shape = np.asarray(e.features).shape
            if shape != tuple(expected_shape[1:]):
                raise ShapeMismatch(
                    f"{e.source_id}: features {shape} do not match model input "
                    f"{tuple(expected_shape[1:])}"
                )
    targets = np.array([e.label.class_index for e in examples])
    # eval-mode forwards are per-example independent, so chunking only
    # bounds memory
    chunks = []
    for start in range(0, len(examples), 32):
        xb = model.prepare_batch([e.features for e in examples[start:start + 32]])
        chunks.append(model.forward(xb, train=False))
    probs = np.concatenate(chunks, axis=0)

    predicted = probs.argmax(axis=1)
    k = len(model.class_labels)
    confusion = np.zeros((k, k), dtype=int)
    errors = []
    for example, actual, pred in zip(examples, targets, predicted):
        confusion[actual, pred] += 1
        if actual != pred:
            errors.append((example.source_id, ClassLabel.from_index(int(actual)),
                           ClassLabel.from_index(int(pred))))

    emotion_hits = sum(
        model.class_labels[a].emotion == model.class_labels[p].emotion
        for a, p in zip(targets, predicted)
    )
    return EvalReport(
        n=len(examples),
        top1_accuracy=categorical_accuracy(probs, targets),
        top5_accuracy=topk_accuracy(probs, targets, k=min(5, k)),
        confusion=confusion,
        errors=tuple(errors),
        emotion_accuracy=emotion_hits / len(examples),
    )


def format_report(report: EvalReport) -> str:
    """Plain-text report: metrics, labeled confusion matrix, misprediction list."""
    lines = [
        f"examples evaluated: {report.n}",
        f"top-1 accuracy:     {report.top1_accuracy:.4f} ({report.top1_accuracy * 100:.2f}%)",
        f"top-5 accuracy:     {report.top5_accuracy:.4f} ({report.top5_accuracy * 100:.2f}%)",
        f"emotion-only accuracy (genders collapsed): {report.emotion_accuracy:.4f}",
        "",
        "confusion matrix (rows = actual, cols = predicted):",
    ]
    for i, label in enumerate(CLASS_LABELS):
        lines.append(f"  {i:2d} = {label}")
    header = "actual\\pred " + " ".join(f"{i:4d}" for i in range(len(CLASS_LABELS)))
    lines.append(header)
    for i, row in enumerate(report.confusion):
        lines.append(f"{i:11d} " + " ".join(f"{int(v):4d}" for v in row))

    lines.append("")
    lines.append(f"{len(report.errors)} errors (actual -> predicted):")
    for source_id, actual, pred in report.errors:
        lines.append(f"  {source_id}: {actual} -> {pred}")
    return "\n".join(lines) + "\n"


def report_to_dict(report: EvalReport) -> dict:
    return {
        "n": report.n,
        "top1_accuracy": report.top1_accuracy,
        "top5_accuracy": report.top5_accuracy,
        "emotion_accuracy": report.emotion_accuracy,
        "confusion": report.confusion.tolist(),
        "class_labels": [str(c) for c in CLASS_LABELS],
        "errors": [{"source_id": s, "actual": str(a), "predicted": str(p)}
                   for s, a, p in report.errors],
    }


def write_report_json(path, report: EvalReport) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
