"""Audio loop loading, onset detection and corpus ingestion.

Loops are normalized to mono 44.1 kHz on load so the detector's
parameters mean the same thing for every corpus. Onsets come from
spectral flux: an STFT (2048-sample Hann window, 512-sample hop,
centered frames), per-bin magnitude increases summed into an onset
strength envelope, then peak picking. A frame is an onset when it is
the maximum of a +/-3 frame neighborhood, exceeds the local mean over
+/-10 frames by 0.3 global standard deviations, and is at least 30 ms
after the previous accepted onset.

Frames are centered (the signal is zero-padded by half a window on
both sides) so a click on the very first sample is still seen at full
window weight; reported time is frame_index * hop / sample_rate.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import CorpusError, FormatError, InputError
from .patterns import TimeBase, quantize_to_steps, seconds_to_ticks, validate_pattern

logger = logging.getLogger(__name__)

TARGET_SAMPLE_RATE = 44100
STFT_WINDOW = 2048
STFT_HOP = 512
PEAK_NEIGHBORHOOD = 3        # frames on each side for the local-max test
PEAK_MEAN_WINDOW = 10        # frames on each side for the local-mean floor
PEAK_THRESHOLD_STD = 0.3     # global-std multiple added to the local mean
MIN_ONSET_GAP = 0.030        # seconds
DURATION_TOLERANCE = 0.02    # fraction of the expected loop length


@dataclass
class AudioLoop:
    """A mono 44.1 kHz audio loop plus provenance."""

    samples: np.ndarray
    sample_rate: int
    source_path: str
    duration_mismatch: bool = False

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    source: str
    pattern: np.ndarray


@dataclass
class Dataset:
    """The training corpus: one binary pattern per successfully ingested loop."""

    records: list[DatasetRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def pattern_matrix(self) -> np.ndarray:
        """All patterns stacked into an (N, 32) float array."""
        if not self.records:
            raise CorpusError("dataset is empty")
        return np.stack([r.pattern for r in self.records]).astype(float)

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        for r in self.records:
            digest.update(r.id.encode())
            digest.update(bytes(r.pattern.astype(np.uint8)))
        return digest.hexdigest()

    def save_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.records:
                fh.write(json.dumps({
                    "id": r.id,
                    "source": r.source,
                    "pattern": r.pattern.tolist(),
                }) + "\n")

    @classmethod
    def load_jsonl(cls, path) -> "Dataset":
        records = []
        seen = set()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    raw = json.loads(line)
                    record = DatasetRecord(
                        id=str(raw["id"]),
                        source=str(raw["source"]),
                        pattern=validate_pattern(raw["pattern"]),
                    )
                except (json.JSONDecodeError, KeyError, TypeError, InputError) as exc:
                    raise FormatError(f"{path}:{line_no}: bad dataset record: {exc}") from exc
                if record.id in seen:
                    raise FormatError(f"{path}:{line_no}: duplicate record id {record.id!r}")
                seen.add(record.id)
                records.append(record)
        return cls(records)


def _to_float(samples: np.ndarray) -> np.ndarray:
    """Scale integer PCM into [-1, 1]; floats pass through."""
    if np.issubdtype(samples.dtype, np.floating):
        return samples.astype(np.float64)
    if samples.dtype == np.uint8:
        return (samples.astype(np.float64) - 128.0) / 128.0
    info = np.iinfo(samples.dtype)
    return samples.astype(np.float64) / (info.max + 1)


def load_loop(path, expected_duration: float | None = None) -> AudioLoop:
    """Decode a PCM WAV file to mono float64 samples at 44.1 kHz.

    Stereo is downmixed by channel mean. If expected_duration is given,
    a loop whose length deviates more than 2% is still loaded but gets
    duration_mismatch set.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        rate, data = wavfile.read(path)
    except Exception as exc:
        raise FormatError(f"{path}: not a readable PCM WAV file ({exc})") from exc
    if data.size == 0:
        raise InputError(f"{path}: empty audio")

    samples = _to_float(data)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    elif samples.ndim != 1:
        raise FormatError(f"{path}: unsupported channel layout {data.shape}")

    if rate != TARGET_SAMPLE_RATE:
        gcd = np.gcd(int(rate), TARGET_SAMPLE_RATE)
        samples = resample_poly(samples, TARGET_SAMPLE_RATE // gcd, int(rate) // gcd)

    loop = AudioLoop(samples=samples, sample_rate=TARGET_SAMPLE_RATE, source_path=str(path))
    if expected_duration is not None:
        deviation = abs(loop.duration - expected_duration)
        loop.duration_mismatch = deviation > DURATION_TOLERANCE * expected_duration
    return loop


def onset_envelope(samples: np.ndarray) -> np.ndarray:
    """Spectral-flux onset strength, one value per STFT frame."""
    pad = STFT_WINDOW // 2
    padded = np.pad(np.asarray(samples, dtype=float), (pad, pad))
    n_frames = 1 + (len(padded) - STFT_WINDOW) // STFT_HOP
    if n_frames <= 0:
        return np.zeros(0)
    idx = np.arange(STFT_WINDOW)[None, :] + STFT_HOP * np.arange(n_frames)[:, None]
    frames = padded[idx] * np.hanning(STFT_WINDOW)
    magnitude = np.abs(np.fft.rfft(frames, axis=1))
    previous = np.vstack([np.zeros(magnitude.shape[1]), magnitude[:-1]])
    return np.maximum(magnitude - previous, 0.0).sum(axis=1)


def detect_onsets(loop: AudioLoop) -> np.ndarray:
    """Return onset times in seconds, ascending. Silence yields an empty array."""
    env = onset_envelope(loop.samples)
    if env.size == 0 or env.max() <= 0:
        return np.zeros(0)
    global_std = env.std()
    hop_time = STFT_HOP / loop.sample_rate
    onsets = []
    last = -np.inf
    for i in range(len(env)):
        lo = max(0, i - PEAK_NEIGHBORHOOD)
        hi = min(len(env), i + PEAK_NEIGHBORHOOD + 1)
        if env[i] < env[lo:hi].max():
            continue
        mlo = max(0, i - PEAK_MEAN_WINDOW)
        mhi = min(len(env), i + PEAK_MEAN_WINDOW + 1)
        if env[i] <= env[mlo:mhi].mean() + PEAK_THRESHOLD_STD * global_std:
            continue
        t = i * hop_time
        if t - last < MIN_ONSET_GAP:
            continue
        onsets.append(t)
        last = t
    return np.asarray(onsets)


def encode_loop(loop: AudioLoop, tb: TimeBase) -> np.ndarray:
    """Full loop-to-pattern pipeline: onsets -> ticks -> binary steps."""
    return quantize_to_steps(seconds_to_ticks(detect_onsets(loop), tb), tb)


def ingest_corpus(directory, tb: TimeBase | None = None) -> Dataset:
    """Encode every WAV loop under a directory into a Dataset.

    Loops that fail to decode are skipped with a warning; the call only
    fails if nothing at all could be ingested.
    """
    tb = tb or TimeBase()
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    paths = sorted(p for p in directory.iterdir()
                   if p.is_file() and p.suffix.lower() in (".wav", ".wave"))

    records = []
    used_ids: set[str] = set()
    for path in paths:
        try:
            loop = load_loop(path, expected_duration=tb.loop_duration)
        except (InputError, FormatError) as exc:
            logger.warning("skipping %s: %s", path, exc)
            continue
        if loop.duration_mismatch:
            logger.warning("%s: duration %.3fs deviates more than %d%% from expected %.3fs",
                           path, loop.duration, int(DURATION_TOLERANCE * 100), tb.loop_duration)
        record_id = path.stem
        n = 2
        while record_id in used_ids:
            record_id = f"{path.stem}-{n}"
            n += 1
        used_ids.add(record_id)
        records.append(DatasetRecord(id=record_id, source=str(path),
                                     pattern=encode_loop(loop, tb)))

    if not records:
        raise CorpusError(f"no loops ingested from {directory}")
    return Dataset(records)


def synth_click_loop(pattern, tb: TimeBase | None = None,
                     sample_rate: int = TARGET_SAMPLE_RATE) -> np.ndarray:
    """Synthesize a loop of unit impulses, one on each active step's grid time.

    The inverse of the encode pipeline on grid-aligned material, handy
    for sanity-checking a corpus pipeline end to end.
    """
    tb = tb or TimeBase()
    p = validate_pattern(pattern)
    samples = np.zeros(int(round(tb.loop_duration * sample_rate)))
    for step in np.flatnonzero(p):
        samples[int(round(step * tb.seconds_per_step * sample_rate))] = 1.0
    return samples


def write_wav(path, samples: np.ndarray, sample_rate: int = TARGET_SAMPLE_RATE) -> None:
    """Write float samples in [-1, 1] as 16-bit PCM."""
    scaled = np.clip(np.asarray(samples, dtype=float), -1.0, 1.0)
    wavfile.write(path, sample_rate, (scaled * 32767).astype(np.int16))
