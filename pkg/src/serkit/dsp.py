"""Log-mel feature extraction.

Pipeline: Hann-windowed power STFT -> triangular mel filterbank projection
-> decibel scaling -> fixed-length framing. Defaults (n_fft 2048, hop 512,
128 mel bands, 3.0 s analysis window at 22050 Hz) give a 128 x 130 matrix.
"""

import struct
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio_io import AudioClip, PIPELINE_RATE
from .errors import DegenerateFilter, DomainError, InsufficientSamples, RateMismatch

#: power floor before the log, and dynamic range kept below the peak (dB)
AMIN = 1e-10
TOP_DB = 80.0

#: canonical analysis window: 3.0 s at 22050 Hz -> 130 frames at hop 512
CANONICAL_SECONDS = 3.0
CANONICAL_FRAMES = 130


@dataclass(frozen=True)
class StftParams:
    n_fft: int = 2048
    hop: int = 512
    window: str = "hann"

    def __post_init__(self):
        if not (0 < self.hop <= self.n_fft):
            raise ValueError(f"need 0 < hop <= n_fft, got hop={self.hop} n_fft={self.n_fft}")
        if self.n_fft & (self.n_fft - 1):
            raise ValueError(f"n_fft must be a power of two, got {self.n_fft}")
        if self.window != "hann":
            raise ValueError(f"unsupported window {self.window!r}")


@dataclass(frozen=True)
class MelParams:
    n_mels: int = 128
    f_min: float = 0.0
    f_max: float | None = None
    sample_rate: int = PIPELINE_RATE

    def __post_init__(self):
        if self.f_max is None:
            object.__setattr__(self, "f_max", self.sample_rate / 2)
        if not (0 <= self.f_min < self.f_max <= self.sample_rate / 2):
            raise ValueError(
                f"need 0 <= f_min < f_max <= sr/2, got [{self.f_min}, {self.f_max}] at sr={self.sample_rate}"
            )
        if self.n_mels < 1:
            raise ValueError(f"n_mels must be >= 1, got {self.n_mels}")


@dataclass(frozen=True)
class MelSpectrogram:
    """dB-scaled mel matrix (n_mels x n_frames); the model's input domain."""

    values: np.ndarray
    params: MelParams | None = None

    @property
    def frames(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def hz_to_mel(f):
    """2595 * log10(1 + f/700); scalar or array, f >= 0."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise DomainError("frequency must be >= 0 Hz")
    out = 2595.0 * np.log10(1.0 + f / 700.0)
    return out if out.ndim else float(out)


def mel_to_hz(m):
    """Inverse of hz_to_mel: 700 * (10^(m/2595) - 1)."""
    m = np.asarray(m, dtype=np.float64)
    if np.any(m < 0):
        raise DomainError("mel value must be >= 0")
    out = 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    return out if out.ndim else float(out)


def _hann(n_fft: int) -> np.ndarray:
    # periodic form, matching FFT analysis convention
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n_fft) / n_fft)


def stft_power(clip: AudioClip, params: StftParams = StftParams()) -> np.ndarray:
    """Squared-magnitude STFT, shape (n_fft//2 + 1, n_frames).

    The signal is reflect-padded by n_fft//2 on both ends so frame t is
    centered on sample t*hop; n_frames = 1 + len(samples)//hop.
    """
    x = np.asarray(clip.samples, dtype=np.float64)
    if x.size < 1:
        raise InsufficientSamples("cannot transform an empty signal")

    n_fft, hop = params.n_fft, params.hop
    padded = np.pad(x, n_fft // 2, mode="reflect")
    frames = sliding_window_view(padded, n_fft)[::hop]
    spectrum = np.fft.rfft(frames * _hann(n_fft), axis=1)
    return (spectrum.real**2 + spectrum.imag**2).T


def mel_filterbank(params: MelParams, n_fft: int) -> np.ndarray:
    """Triangular mel filters, shape (n_mels, n_fft//2 + 1).

    Peaks sit at n_mels + 2 equally spaced points on the mel axis between
    f_min and f_max; each row is area-normalized by 2 / (hz_upper - hz_lower)
    of its triangle.
    """
    fft_freqs = np.linspace(0.0, params.sample_rate / 2.0, n_fft // 2 + 1)
    mel_pts = np.linspace(hz_to_mel(params.f_min), hz_to_mel(params.f_max),
                          params.n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)

    ramps = hz_pts[:, None] - fft_freqs[None, :]
    widths = np.diff(hz_pts)
    lower = -ramps[:-2] / widths[:-1, None]
    upper = ramps[2:] / widths[1:, None]
    weights = np.maximum(0.0, np.minimum(lower, upper))
    weights *= (2.0 / (hz_pts[2:] - hz_pts[:-2]))[:, None]

    dead = np.flatnonzero(~weights.any(axis=1))
    if dead.size:
        raise DegenerateFilter(
            f"filter rows {dead.tolist()} have no support on the {n_fft}-point FFT grid; "
            "use fewer mel bands or a larger n_fft"
        )
    return weights


def mel_spectrogram(clip: AudioClip, stft_params: StftParams = StftParams(),
                    mel_params: MelParams = MelParams()) -> np.ndarray:
    """Linear-power mel spectrogram: filterbank @ stft_power."""
    if clip.sample_rate != mel_params.sample_rate:
        raise RateMismatch(
            f"clip is {clip.sample_rate} Hz but features expect {mel_params.sample_rate} Hz"
        )
    fb = mel_filterbank(mel_params, stft_params.n_fft)
    return fb @ stft_power(clip, stft_params)


def power_to_db(mel: np.ndarray, params: MelParams | None = None) -> MelSpectrogram:
    """10*log10 with a 1e-10 power floor, clamped to 80 dB below the peak."""
    mel = np.asarray(mel, dtype=np.float64)
    if np.any(mel < 0):
        raise DomainError("power values must be >= 0")
    db = 10.0 * np.log10(np.maximum(mel, AMIN))
    db = np.maximum(db, db.max() - TOP_DB)
    return MelSpectrogram(values=db, params=params)


def fix_length(values: np.ndarray, target_frames: int,
               pad_value: float | None = None) -> np.ndarray:
    """Center-crop or symmetrically pad the frame axis to target_frames.

    Padding uses the matrix's dB floor (max - 80 dB) unless overridden;
    when padding is odd the extra frame goes on the right, and a crop
    starts at floor((T - target) / 2).
    """
    values = np.asarray(values)
    n_frames = values.shape[1]
    if n_frames == target_frames:
        return values
    if n_frames > target_frames:
        start = (n_frames - target_frames) // 2
        return values[:, start:start + target_frames]
    if pad_value is None:
        pad_value = float(values.max()) - TOP_DB
    left = (target_frames - n_frames) // 2
    right = target_frames - n_frames - left
    return np.pad(values, ((0, 0), (left, right)), constant_values=pad_value)


def extract_features(clip: AudioClip, stft_params: StftParams = StftParams(),
                     mel_params: MelParams = MelParams(),
                     target_frames: int = CANONICAL_FRAMES) -> MelSpectrogram:
    """Full pipeline from a rate-matched clip to the canonical dB matrix."""
    power = mel_spectrogram(clip, stft_params, mel_params)
    db = power_to_db(power, mel_params)
    return MelSpectrogram(values=fix_length(db.values, target_frames), params=mel_params)


# feature cache: "SERF", u32 version, u32 n_mels, u32 n_frames, f32 row-major

_SERF_MAGIC = b"SERF"
_SERF_VERSION = 1


def save_features(path, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(_SERF_MAGIC)
        fh.write(struct.pack("<III", _SERF_VERSION, values.shape[0], values.shape[1]))
        fh.write(values.astype("<f4").tobytes())


def load_features(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16 or head[:4] != _SERF_MAGIC:
            raise ValueError(f"{path}: not a feature cache file")
        version, n_mels, n_frames = struct.unpack("<III", head[4:])
        if version != _SERF_VERSION:
            raise ValueError(f"{path}: cache version {version}, supported {_SERF_VERSION}")
        payload = fh.read(4 * n_mels * n_frames)
        if len(payload) < 4 * n_mels * n_frames:
            raise ValueError(f"{path}: truncated feature cache")
        return np.frombuffer(payload, dtype="<f4").reshape(n_mels, n_frames).astype(np.float64)
