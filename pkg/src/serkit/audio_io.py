"""WAV decoding and sample-rate conversion.

Accepts the two encodings browsers and RAVDESS actually produce (16-bit PCM
and 32-bit IEEE float, 1-2 channels) and canonicalizes everything to mono
float at the pipeline rate of 22050 Hz.
"""

import io
import struct
from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.signal import resample_poly

from .errors import EmptyAudio, MalformedContainer, UnsupportedEncoding

#: canonical pipeline rate; all features are extracted at this rate
PIPELINE_RATE = 22050

_FMT_PCM = 1
_FMT_FLOAT = 3


@dataclass(frozen=True)
class AudioClip:
    """Mono sample buffer. ``samples`` are float64 in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int
    source_id: str | None = None

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate


def decode_wav(data: bytes, source_id: str | None = None) -> AudioClip:
    """Decode a RIFF/WAVE byte string to a normalized mono clip.

    16-bit PCM samples are scaled by 1/32768; float32 samples pass through.
    Stereo is averaged to mono per frame. Unknown chunks are skipped.

    Raises MalformedContainer, UnsupportedEncoding or EmptyAudio.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedContainer("not a RIFF/WAVE container")

    fmt = None
    frames = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            if len(body) < 16:
                raise MalformedContainer("fmt chunk shorter than 16 bytes")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            if len(body) < size:
                raise MalformedContainer("data chunk truncated")
            frames = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None:
        raise MalformedContainer("missing fmt chunk")
    if frames is None:
        raise MalformedContainer("missing data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if n_channels not in (1, 2):
        raise UnsupportedEncoding(f"{n_channels} channels; only mono/stereo supported")
    if sample_rate <= 0:
        raise MalformedContainer("non-positive sample rate")

    if audio_format == _FMT_PCM and bits == 16:
        raw = np.frombuffer(frames[:len(frames) - len(frames) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == _FMT_FLOAT and bits == 32:
        raw = np.frombuffer(frames[:len(frames) - len(frames) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise UnsupportedEncoding(
            f"format tag {audio_format} at {bits} bits; need PCM16 or float32"
        )

    if n_channels == 2:
        samples = samples[:len(samples) - len(samples) % 2].reshape(-1, 2).mean(axis=1)
    if len(samples) == 0:
        raise EmptyAudio("zero data frames")

    samples = np.clip(samples, -1.0, 1.0)
    return AudioClip(samples=samples, sample_rate=sample_rate, source_id=source_id)


def encode_wav(clip: AudioClip, encoding: str = "float32") -> bytes:
    """Write a mono clip back to WAV bytes (``float32`` or ``pcm16``).

    float32 round-trips decode() output sample-exactly.
    """
    if encoding == "float32":
        payload = np.asarray(clip.samples, dtype="<f4").tobytes()
        fmt_tag, bits = _FMT_FLOAT, 32
    elif encoding == "pcm16":
        scaled = np.clip(np.asarray(clip.samples) * 32768.0, -32768, 32767)
        payload = scaled.astype("<i2").tobytes()
        fmt_tag, bits = _FMT_PCM, 16
    else:
        raise ValueError(f"unknown encoding {encoding!r}")

    block_align = bits // 8
    out = io.BytesIO()
    out.write(b"RIFF")
    out.write(struct.pack("<I", 36 + len(payload)))
    out.write(b"WAVE")
    out.write(b"fmt ")
    out.write(struct.pack("<IHHIIHH", 16, fmt_tag, 1, clip.sample_rate,
                          clip.sample_rate * block_align, block_align, bits))
    out.write(b"data")
    out.write(struct.pack("<I", len(payload)))
    out.write(payload)
    return out.getvalue()


def _design_lowpass(up: int, down: int, taps_per_phase: int = 64,
                    beta: float = 9.0) -> np.ndarray:
    """Kaiser-windowed sinc prototype with unit DC gain.

    Length is ``taps_per_phase * up + 1`` (odd, linear phase), cutoff at the
    tighter of the input/output Nyquist limits. resample_poly multiplies by
    ``up`` internally to compensate for zero stuffing.
    """
    n = taps_per_phase * up + 1
    cutoff = 1.0 / max(up, down)
    t = np.arange(n) - (n - 1) / 2
    h = cutoff * np.sinc(cutoff * t) * np.kaiser(n, beta)
    return h / h.sum()


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited polyphase resampling to ``target_rate``.

    Identity (same object) when the rate already matches; otherwise output
    duration matches input within one sample period.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if clip.sample_rate == target_rate:
        return clip

    g = gcd(clip.sample_rate, target_rate)
    up, down = target_rate // g, clip.sample_rate // g
    out = resample_poly(clip.samples, up, down, window=_design_lowpass(up, down))
    return AudioClip(samples=out, sample_rate=target_rate, source_id=clip.source_id)
