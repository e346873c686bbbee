import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `references` importable

from serkit.audio_io import AudioClip, encode_wav
from serkit.dataset import ClassLabel, LabeledExample
from serkit.dsp import MelSpectrogram

DATA_DIR = Path(__file__).parent / "data"


def sine_clip(freq=440.0, seconds=1.0, rate=22050, amplitude=0.5):
    t = np.arange(int(round(seconds * rate))) / rate
    return AudioClip(samples=amplitude * np.sin(2 * np.pi * freq * t), sample_rate=rate)


def synthetic_examples(count=16, seed=7):
    """Random dB-like spectrograms with cycling class labels."""
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(count):
        values = rng.uniform(-80.0, 0.0, size=(128, 130))
        examples.append(LabeledExample(
            features=MelSpectrogram(values=values),
            label=ClassLabel.from_index(i % 12),
            actor_id=1 + i % 24,
            source_id=f"synthetic-{i:03d}",
        ))
    return examples


@pytest.fixture
def ravdess_tree(tmp_path):
    """Tiny RAVDESS-layout tree: tone frequency varies with the emotion code.

    Covers actors 1, 2 and 24 so the split contract is exercisable.
    """
    rng = np.random.default_rng(0)
    root = tmp_path / "ravdess"
    for actor in (1, 2, 24):
        actor_dir = root / f"Actor_{actor:02d}"
        actor_dir.mkdir(parents=True)
        for emotion in range(1, 9):
            intensities = (1,) if emotion == 1 else (1, 2)
            for intensity in intensities:
                name = f"03-01-{emotion:02d}-{intensity:02d}-01-01-{actor:02d}.wav"
                freq = 200.0 + 60.0 * emotion + 10.0 * actor
                clip = sine_clip(freq=freq, seconds=0.6,
                                 amplitude=0.4 + 0.02 * intensity)
                noisy = AudioClip(
                    samples=np.clip(clip.samples + 0.01 * rng.standard_normal(len(clip.samples)), -1, 1),
                    sample_rate=clip.sample_rate)
                (actor_dir / name).write_bytes(encode_wav(noisy, "pcm16"))
    return root
