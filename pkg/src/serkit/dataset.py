"""RAVDESS corpus handling: filename labels, class merging, splits.

Filenames follow the 7-field convention MM-VV-EE-II-SS-RR-AA.wav
(modality, vocal channel, emotion, intensity, statement, repetition,
actor). Targets are joint gender x emotion classes; calm folds into
neutral and surprised into happy, leaving 6 emotions x 2 genders = 12.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

from . import dsp
from .audio_io import decode_wav, resample
from .dsp import MelParams, MelSpectrogram, StftParams
from .errors import (
    CodeOutOfRange,
    EmptyDataset,
    InsufficientData,
    MalformedName,
    SerkitError,
)
from .rng import rank_key

MODALITIES = {1: "audio_video", 2: "video_only", 3: "audio_only"}
VOCAL_CHANNELS = {1: "speech", 2: "song"}
SOURCE_EMOTIONS = {1: "neutral", 2: "calm", 3: "happy", 4: "sad",
                   5: "angry", 6: "fearful", 7: "disgust", 8: "surprised"}

#: emotions kept as targets, in class-index order
EMOTIONS = ("neutral", "happy", "sad", "angry", "fearful", "disgust")
GENDERS = ("male", "female")

_MERGES = {"calm": "neutral", "surprised": "happy"}


@dataclass(frozen=True)
class RawLabel:
    """Fields decoded from one RAVDESS filename."""

    modality: str
    vocal_channel: str
    emotion_code: int
    intensity_code: int
    statement: int
    repetition: int
    actor_id: int

    @property
    def gender(self) -> str:
        # odd-numbered actors are male
        return "male" if self.actor_id % 2 == 1 else "female"

    @property
    def emotion(self) -> str:
        return SOURCE_EMOTIONS[self.emotion_code]


@dataclass(frozen=True, order=True)
class ClassLabel:
    """One of the 12 gender x emotion targets."""

    gender: str
    emotion: str

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise ValueError(f"unknown gender {self.gender!r}")
        if self.emotion not in EMOTIONS:
            raise ValueError(f"unknown emotion {self.emotion!r}")

    @property
    def class_index(self) -> int:
        return 6 * GENDERS.index(self.gender) + EMOTIONS.index(self.emotion)

    @classmethod
    def from_index(cls, index: int) -> "ClassLabel":
        if not 0 <= index < 12:
            raise ValueError(f"class index {index} outside 0..11")
        return cls(gender=GENDERS[index // 6], emotion=EMOTIONS[index % 6])

    def __str__(self) -> str:
        return f"{self.gender} {self.emotion}"


#: all 12 classes in index order
CLASS_LABELS = tuple(ClassLabel.from_index(i) for i in range(12))


@dataclass(frozen=True)
class LabeledExample:
    features: MelSpectrogram
    label: ClassLabel
    actor_id: int
    source_id: str


_FIELD_RANGES = (
    ("modality", 1, 3),
    ("vocal channel", 1, 2),
    ("emotion", 1, 8),
    ("intensity", 1, 2),
    ("statement", 1, 2),
    ("repetition", 1, 2),
    ("actor", 1, 24),
)


def parse_ravdess_filename(name: str) -> RawLabel:
    """Decode MM-VV-EE-II-SS-RR-AA.wav into a RawLabel."""
    stem = Path(name).name
    if not stem.endswith(".wav"):
        raise MalformedName(f"{name!r}: expected a .wav filename")
    fields = stem[:-4].split("-")
    if len(fields) != 7 or any(len(f) != 2 or not f.isdigit() for f in fields):
        raise MalformedName(f"{name!r}: need seven dash-separated two-digit fields")

    codes = [int(f) for f in fields]
    for (label, lo, hi), value in zip(_FIELD_RANGES, codes):
        if not lo <= value <= hi:
            raise CodeOutOfRange(f"{name!r}: {label} code {value} outside {lo}..{hi}")

    mm, vv, ee, ii, ss, rr, aa = codes
    return RawLabel(modality=MODALITIES[mm], vocal_channel=VOCAL_CHANNELS[vv],
                    emotion_code=ee, intensity_code=ii, statement=ss,
                    repetition=rr, actor_id=aa)


def format_ravdess_filename(raw: RawLabel) -> str:
    """Inverse of parse_ravdess_filename."""
    modality = {v: k for k, v in MODALITIES.items()}[raw.modality]
    channel = {v: k for k, v in VOCAL_CHANNELS.items()}[raw.vocal_channel]
    return "-".join(f"{c:02d}" for c in (modality, channel, raw.emotion_code,
                                         raw.intensity_code, raw.statement,
                                         raw.repetition, raw.actor_id)) + ".wav"


def convert_label(raw: RawLabel) -> ClassLabel:
    """Apply the merge policy: calm -> neutral, surprised -> happy."""
    emotion = _MERGES.get(raw.emotion, raw.emotion)
    return ClassLabel(gender=raw.gender, emotion=emotion)


@dataclass(frozen=True)
class ManifestEntry:
    """One dataset record: enough to locate, label and split an example."""

    path: str
    label: ClassLabel
    actor_id: int
    split: str = ""

    @property
    def source_id(self) -> str:
        return self.path


@dataclass
class DatasetBuild:
    examples: list[LabeledExample]
    skipped: list[tuple[str, str]]  # (path, reason)


def scan_dataset(root) -> tuple[list[ManifestEntry], list[tuple[str, str]]]:
    """Enumerate usable speech clips under ``root`` without decoding audio.

    Returns entries in lexicographic path order plus a skip report for
    non-speech modalities and unparseable names.
    """
    root = Path(root)
    entries: list[ManifestEntry] = []
    skipped: list[tuple[str, str]] = []
    for path in sorted(root.rglob("*.wav"), key=lambda p: p.relative_to(root).as_posix()):
        rel = path.relative_to(root).as_posix()
        try:
            raw = parse_ravdess_filename(path.name)
        except (MalformedName, CodeOutOfRange) as exc:
            skipped.append((rel, str(exc)))
            continue
        if raw.modality != "audio_only" or raw.vocal_channel != "speech":
            skipped.append((rel, f"{raw.modality}/{raw.vocal_channel} clip, not audio-only speech"))
            continue
        entries.append(ManifestEntry(path=rel, label=convert_label(raw), actor_id=raw.actor_id))
    return entries, skipped


def load_example(root, entry: ManifestEntry,
                 stft_params: StftParams = StftParams(),
                 mel_params: MelParams = MelParams(),
                 cache_dir=None) -> LabeledExample:
    """Decode one clip and extract its canonical feature matrix."""
    if cache_dir is not None:
        cache_path = Path(cache_dir) / (entry.path.replace("/", "__") + ".serf")
        if cache_path.exists():
            values = dsp.load_features(cache_path)
            return LabeledExample(features=MelSpectrogram(values, mel_params),
                                  label=entry.label, actor_id=entry.actor_id,
                                  source_id=entry.path)

    clip = decode_wav((Path(root) / entry.path).read_bytes(), source_id=entry.path)
    clip = resample(clip, mel_params.sample_rate)
    features = dsp.extract_features(clip, stft_params, mel_params)

    if cache_dir is not None:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        dsp.save_features(cache_path, features.values)
        # use the float32-quantized values so cached and fresh runs agree bitwise
        features = MelSpectrogram(values=dsp.load_features(cache_path),
                                  params=mel_params)
    return LabeledExample(features=features, label=entry.label,
                          actor_id=entry.actor_id, source_id=entry.path)


def build_dataset(root, stft_params: StftParams = StftParams(),
                  mel_params: MelParams = MelParams(),
                  cache_dir=None) -> DatasetBuild:
    """Feature-extract every usable speech WAV under ``root``.

    Per-file decode failures land in the skip report instead of aborting
    the build; an entirely unusable tree raises EmptyDataset.
    """
    entries, skipped = scan_dataset(root)
    examples: list[LabeledExample] = []
    for entry in entries:
        try:
            examples.append(load_example(root, entry, stft_params, mel_params, cache_dir))
        except SerkitError as exc:
            skipped.append((entry.path, str(exc)))
    if not examples:
        raise EmptyDataset(f"no usable speech WAV files under {root}")
    return DatasetBuild(examples=examples, skipped=skipped)


def split_train_test(examples, seed: int, test_size: int = 180,
                     holdout_actor: int = 24):
    """Deterministic blind-test split.

    The test set holds every clip of the held-out actor plus a seeded
    uniform sample of the rest, topped up to ``test_size``, and is nudged
    (deterministically) to contain every emotion present in the corpus.
    Items need ``actor_id``, ``source_id`` and ``label`` attributes; both
    halves come back in the input order.
    """
    examples = list(examples)
    if len(examples) < test_size:
        raise InsufficientData(f"{len(examples)} examples < test size {test_size}")

    holdout = {e.source_id for e in examples if e.actor_id == holdout_actor}
    if len(holdout) > test_size:
        raise InsufficientData(
            f"held-out actor {holdout_actor} has {len(holdout)} clips, more than test size {test_size}"
        )

    pool = sorted((e for e in examples if e.source_id not in holdout),
                  key=lambda e: (rank_key(seed, e.source_id), e.source_id))
    chosen = pool[:test_size - len(holdout)]
    rest = pool[test_size - len(holdout):]
    test_ids = holdout | {e.source_id for e in chosen}

    # ensure every emotion present in the corpus appears in the test set
    def emotions(ids):
        return {e.label.emotion for e in examples if e.source_id in ids}

    corpus_emotions = {e.label.emotion for e in examples}
    for emotion in EMOTIONS:
        if emotion not in corpus_emotions or emotion in emotions(test_ids):
            continue
        candidates = [e for e in rest if e.label.emotion == emotion]
        if not candidates:
            continue
        counts = {}
        for e in chosen:
            counts[e.label.emotion] = counts.get(e.label.emotion, 0) + 1
        removable = [e for e in reversed(chosen) if counts[e.label.emotion] > 1]
        if not removable:
            removable = list(reversed(chosen))
        test_ids.discard(removable[0].source_id)
        chosen.remove(removable[0])
        chosen.append(candidates[0])
        rest.remove(candidates[0])
        test_ids.add(candidates[0].source_id)

    train = [e for e in examples if e.source_id not in test_ids]
    test = [e for e in examples if e.source_id in test_ids]
    return train, test


# manifest: one CSV record per example

_MANIFEST_FIELDS = ("path", "class_index", "actor_id", "split")


def write_manifest(path, entries: list[ManifestEntry]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_MANIFEST_FIELDS)
        for e in entries:
            writer.writerow((e.path, e.label.class_index, e.actor_id, e.split))


def read_manifest(path) -> list[ManifestEntry]:
    entries = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(_MANIFEST_FIELDS):
            raise ValueError(f"{path}: not a dataset manifest (header {header})")
        for row in reader:
            rel, class_index, actor_id, split = row
            entries.append(ManifestEntry(path=rel,
                                         label=ClassLabel.from_index(int(class_index)),
                                         actor_id=int(actor_id), split=split))
    return entries
