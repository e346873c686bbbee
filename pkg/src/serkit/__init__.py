"""serkit: speech emotion recognition from log-mel spectrograms.

WAV in, ranked gender+emotion probabilities out. The network (four conv
blocks plus a dense head) and its training loop are implemented from
scratch on numpy; a CLI and an HTTP service wrap the pipeline.
"""

__version__ = "0.1.0"

from .audio_io import AudioClip, decode_wav, encode_wav, resample
from .dataset import CLASS_LABELS, ClassLabel, LabeledExample
from .dsp import MelParams, MelSpectrogram, StftParams, extract_features
from .model import PredictionResult, build_ser_model, load_model, predict, save_model
from .optim import TrainingConfig, TrainingHistory, train

__all__ = [
    "AudioClip",
    "CLASS_LABELS",
    "ClassLabel",
    "LabeledExample",
    "MelParams",
    "MelSpectrogram",
    "PredictionResult",
    "StftParams",
    "TrainingConfig",
    "TrainingHistory",
    "build_ser_model",
    "decode_wav",
    "encode_wav",
    "extract_features",
    "load_model",
    "predict",
    "resample",
    "save_model",
    "train",
]
