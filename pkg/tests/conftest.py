"""Shared fixtures: synthetic rhythm corpora and click-track WAV folders.

The synthetic corpus mirrors what a real loop library looks like:
patterns cluster around a handful of style templates with sparse
per-slot variation, rather than 32 independent coin flips. That keeps
the corpus compressible, which is the whole premise of training a
2-unit-bottleneck autoencoder on it.
"""

import numpy as np
import pytest

from latentseq.audio import synth_click_loop, write_wav
from latentseq.patterns import TimeBase

RHYTHM_TEMPLATES = np.array([
    [1, 0, 0, 0] * 8,                    # four on the floor
    [1, 0, 1, 0] * 8,                    # straight eighths
    [0, 0, 1, 0] * 8,                    # offbeat eighths
    [1, 1, 1, 1] * 8,                    # running sixteenths
    [1, 0, 0, 1, 0, 0, 1, 0] * 4,        # tresillo
    [0, 0, 0, 0, 1, 0, 0, 0] * 4,        # backbeat
    [1, 0, 0, 0, 0, 0, 0, 0] * 4,        # downbeats only
    [1, 0, 1, 1, 0, 1, 1, 0] * 4,        # syncopated drive
])


def rhythm_corpus(n: int, seed: int, flip_p: float = 0.05) -> np.ndarray:
    """n random 32-step patterns: a random template with sparse flips."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        template = RHYTHM_TEMPLATES[rng.integers(len(RHYTHM_TEMPLATES))].copy()
        flips = rng.random(32) < flip_p
        rows.append(np.where(flips, 1 - template, template))
    return np.array(rows, dtype=float)


def build_click_corpus(directory, patterns, tb: TimeBase | None = None) -> None:
    """Write one click-track WAV per pattern into a directory."""
    tb = tb or TimeBase()
    for i, pattern in enumerate(np.asarray(patterns, dtype=int)):
        write_wav(directory / f"loop{i:03d}.wav", synth_click_loop(pattern, tb))


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    """12 click loops on known grids, plus the generating patterns."""
    directory = tmp_path_factory.mktemp("loops")
    patterns = rhythm_corpus(12, seed=2024)
    build_click_corpus(directory, patterns)
    return directory, patterns
