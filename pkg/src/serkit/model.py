"""The classifier: four conv blocks, a dense head, and a binary model file.

Architecture: 4 x [conv 3x3 (pad 1) -> batchnorm -> ELU -> maxpool 2x2 ->
dropout 0.25] at widths 16/32/64/128, then flatten -> dense 256 -> ELU ->
dropout 0.5 -> dense 12 -> softmax over the joint gender x emotion classes.
Inputs are standardized per example (subtract mean, divide by std) before
the first layer.
"""

import json
import zlib
from dataclasses import dataclass

import numpy as np

from .dataset import CLASS_LABELS, ClassLabel
from .errors import ChecksumFailure, ShapeMismatch, TruncatedFile, VersionMismatch
from .rng import stream
from .tensor_nn import (
    ELU,
    BatchNorm2d,
    Conv2d,
    Dense,
    Dropout,
    Flatten,
    MaxPool2d,
    softmax,
)

INPUT_SHAPE = (1, 128, 130)
CONV_WIDTHS = (16, 32, 64, 128)
HIDDEN_UNITS = 256
CONV_DROPOUT = 0.25
HEAD_DROPOUT = 0.5

MODEL_MAGIC = b"SERM"
MODEL_VERSION = 1

#: standard-deviation floor for per-input standardization
STD_FLOOR = 1e-6


@dataclass(frozen=True)
class PredictionResult:
    """All 12 classes ranked by probability (ties toward lower index)."""

    ranked: tuple  # of (ClassLabel, float)

    @property
    def top1(self) -> ClassLabel:
        return self.ranked[0][0]


class SerModel:
    """Ordered layer stack plus the metadata needed to serve predictions."""

    def __init__(self, layers, input_shape=INPUT_SHAPE, class_labels=CLASS_LABELS,
                 version=MODEL_VERSION):
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.class_labels = tuple(class_labels)
        self.version = version
        self.file_checksum = None  # set by load_model

    # -- forward/backward over the stack (softmax applied after the stack,
    #    so the loss gradient can enter at the logits) --

    def forward(self, x, train=False):
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return softmax(x)

    def backward(self, dlogits):
        grad = dlogits
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def parameter_list(self) -> list:
        return [p for layer in self.layers for p in layer.params().values()]

    def grad_list(self) -> list:
        return [g for layer in self.layers for g in layer.grads().values()]

    def named_tensors(self):
        """(name, kind, array) triples in stack order; defines file layout."""
        for i, layer in enumerate(self.layers):
            for name, arr in layer.params().items():
                yield f"layers.{i}.{name}", "param", arr
            for name, arr in layer.buffers().items():
                yield f"layers.{i}.{name}", "buffer", arr

    def set_dropout_rng(self, rng) -> None:
        for layer in self.layers:
            if isinstance(layer, Dropout):
                layer.rng = rng

    @property
    def dtype(self):
        return self.parameter_list()[0].dtype

    def prepare_batch(self, features_list) -> np.ndarray:
        """Standardize each feature matrix and stack into (N, 1, H, W)."""
        rows = [standardize(np.asarray(f, dtype=np.float64)) for f in features_list]
        return np.stack(rows)[:, None, :, :].astype(self.dtype)


def standardize(values: np.ndarray) -> np.ndarray:
    """Zero-mean, unit-std per input, with the std floored at 1e-6."""
    return (values - values.mean()) / max(float(values.std()), STD_FLOOR)


def _architecture(input_shape):
    in_ch = input_shape[0]
    arch = []
    for width in CONV_WIDTHS:
        arch += [
            {"type": "conv2d", "in_channels": in_ch, "out_channels": width,
             "kernel_size": 3, "stride": 1, "padding": 1},
            {"type": "batchnorm2d", "channels": width},
            {"type": "elu"},
            {"type": "maxpool2d"},
            {"type": "dropout", "rate": CONV_DROPOUT},
        ]
        in_ch = width
    arch.append({"type": "flatten"})
    # spatial dims halve (flooring) at each of the four pools
    h, w = input_shape[1], input_shape[2]
    flat = CONV_WIDTHS[-1] * (h // 16) * (w // 16)
    arch += [
        {"type": "dense", "in_features": flat, "out_features": HIDDEN_UNITS},
        {"type": "elu"},
        {"type": "dropout", "rate": HEAD_DROPOUT},
        {"type": "dense", "in_features": HIDDEN_UNITS, "out_features": len(CLASS_LABELS)},
    ]
    return arch


def _layer_from_config(cfg, rng=None, dtype=np.float32):
    kind = cfg["type"]
    if kind == "conv2d":
        return Conv2d(cfg["in_channels"], cfg["out_channels"], cfg["kernel_size"],
                      cfg["stride"], cfg["padding"], rng=rng, dtype=dtype)
    if kind == "batchnorm2d":
        return BatchNorm2d(cfg["channels"], dtype=dtype)
    if kind == "elu":
        return ELU()
    if kind == "maxpool2d":
        return MaxPool2d()
    if kind == "dropout":
        return Dropout(cfg["rate"])
    if kind == "flatten":
        return Flatten()
    if kind == "dense":
        return Dense(cfg["in_features"], cfg["out_features"], rng=rng, dtype=dtype)
    raise ValueError(f"unknown layer type {kind!r}")


def build_ser_model(seed: int, input_shape=INPUT_SHAPE, dtype=np.float32) -> SerModel:
    """Fresh model with fan-in uniform weights from the seeded init stream."""
    rng = stream(seed, "init")
    layers = [_layer_from_config(cfg, rng=rng, dtype=dtype)
              for cfg in _architecture(input_shape)]
    return SerModel(layers, input_shape=input_shape)


def predict(model: SerModel, features) -> PredictionResult:
    """Eval-mode forward on one canonical feature matrix, all classes ranked."""
    values = np.asarray(features, dtype=np.float64)
    if values.shape != model.input_shape[1:]:
        raise ShapeMismatch(
            f"features shape {values.shape} does not match model input {model.input_shape[1:]}"
        )
    x = standardize(values)[None, None, :, :].astype(model.dtype)
    probs = model.forward(x, train=False)[0]
    order = np.argsort(-probs, kind="stable")
    ranked = tuple((model.class_labels[i], float(probs[i])) for i in order)
    return PredictionResult(ranked=ranked)


# -- model file: magic, u32 version, u32 header length, JSON header,
#    float32 LE tensor payload in stack order, u32 CRC32 of the payload --

def save_model(model: SerModel, path) -> None:
    tensors = list(model.named_tensors())
    header = {
        "architecture": _architecture(model.input_shape),
        "input_shape": list(model.input_shape),
        "class_labels": [{"gender": c.gender, "emotion": c.emotion}
                         for c in model.class_labels],
        "normalization": "per_input_standardize",
        "tensors": [{"name": name, "kind": kind, "shape": list(arr.shape)}
                    for name, kind, arr in tensors],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    payload = b"".join(np.asarray(arr, dtype="<f4").tobytes() for _, _, arr in tensors)
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(np.uint32(model.version).tobytes())
        fh.write(np.uint32(len(header_bytes)).tobytes())
        fh.write(header_bytes)
        fh.write(payload)
        fh.write(np.uint32(zlib.crc32(payload)).tobytes())


def load_model(path) -> SerModel:
    """Reconstruct a model bitwise from save_model output.

    Raises VersionMismatch, TruncatedFile or ChecksumFailure.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != MODEL_MAGIC:
        raise TruncatedFile(f"{path}: not a model file (bad magic)")
    version = int(np.frombuffer(data[4:8], dtype="<u4")[0])
    if version != MODEL_VERSION:
        raise VersionMismatch(f"{path}: file version {version}, supported {MODEL_VERSION}")
    header_len = int(np.frombuffer(data[8:12], dtype="<u4")[0])
    if len(data) < 12 + header_len:
        raise TruncatedFile(f"{path}: header truncated")
    header = json.loads(data[12:12 + header_len])

    expected = sum(int(np.prod(t["shape"])) for t in header["tensors"])
    body = data[12 + header_len:]
    if len(body) < 4 * expected + 4:
        raise TruncatedFile(f"{path}: payload shorter than {expected} tensors + checksum")
    payload = body[:4 * expected]
    stored_crc = int(np.frombuffer(body[4 * expected:4 * expected + 4], dtype="<u4")[0])
    if zlib.crc32(payload) != stored_crc:
        raise ChecksumFailure(f"{path}: payload CRC mismatch")

    layers = [_layer_from_config(cfg) for cfg in header["architecture"]]
    model = SerModel(
        layers,
        input_shape=tuple(header["input_shape"]),
        class_labels=tuple(ClassLabel(gender=c["gender"], emotion=c["emotion"])
                           for c in header["class_labels"]),
        version=version,
    )
    slots = {name: arr for name, _, arr in model.named_tensors()}
    offset = 0
    for entry in header["tensors"]:
        size = int(np.prod(entry["shape"]))
        values = np.frombuffer(payload, dtype="<f4", count=size, offset=offset * 4)
        target = slots.get(entry["name"])
        if target is None or list(target.shape) != entry["shape"]:
            raise ShapeMismatch(f"{path}: tensor {entry['name']} does not fit the architecture")
        target[:] = values.reshape(entry["shape"])
        offset += size
    model.file_checksum = f"{stored_crc:08x}"
    return model
