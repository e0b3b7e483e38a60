"""Binary rhythm patterns and conversions between seconds, MIDI ticks and steps.

A pattern is a 32-slot binary vector, one slot per sixteenth note of a
two-bar 4/4 sequence. Onset times detected in audio move through three
time bases on their way into a pattern:

    seconds  ->  MIDI ticks  ->  sixteenth-note step index

All conversions round half up, and step indices wrap modulo 32 so an
onset that rounds onto the next loop's downbeat lands on slot 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .midifile import SmfNote, write_smf0

PATTERN_LENGTH = 32


@dataclass(frozen=True)
class TimeBase:
    """Tempo and resolution context for tick arithmetic.

    ppq must be divisible by 4 so a sixteenth note is a whole number of
    ticks. Defaults describe the two-bar 120 BPM loops the system is
    built around.
    """

    bpm: float = 120.0
    ppq: int = 480
    bars: int = 2
    beats_per_bar: int = 4

    def __post_init__(self) -> None:
        if self.bpm <= 0:
            raise InputError(f"bpm must be > 0, got {self.bpm}")
        if self.ppq <= 0 or self.ppq % 4 != 0:
            raise InputError(f"ppq must be a positive multiple of 4, got {self.ppq}")
        if self.bars <= 0:
            raise InputError(f"bars must be positive, got {self.bars}")
        if self.beats_per_bar != 4:
            raise InputError("only 4/4 meter is supported")

    @property
    def ticks_per_sixteenth(self) -> int:
        return self.ppq // 4

    @property
    def total_steps(self) -> int:
        return self.bars * self.beats_per_bar * 4

    @property
    def seconds_per_step(self) -> float:
        return 60.0 / self.bpm / 4.0

    @property
    def loop_duration(self) -> float:
        """Length of one full loop in seconds."""
        return self.bars * self.beats_per_bar * 60.0 / self.bpm


def round_half_up(values) -> np.ndarray:
    """Round to nearest integer, halves away from zero toward +inf."""
    return np.floor(np.asarray(values, dtype=float) + 0.5).astype(int)


def empty_pattern() -> np.ndarray:
    return np.zeros(PATTERN_LENGTH, dtype=int)


def validate_pattern(pattern) -> np.ndarray:
    """Coerce to a length-32 int array of 0/1, raising InputError otherwise."""
    p = np.asarray(pattern)
    if p.shape != (PATTERN_LENGTH,):
        raise InputError(f"pattern must have shape ({PATTERN_LENGTH},), got {p.shape}")
    p = p.astype(int)
    if not np.isin(p, (0, 1)).all():
        raise InputError("pattern slots must be 0 or 1")
    return p


def validate_velocities(velocities) -> np.ndarray:
    v = np.asarray(velocities)
    if v.shape != (PATTERN_LENGTH,):
        raise InputError(f"velocities must have shape ({PATTERN_LENGTH},), got {v.shape}")
    v = v.astype(int)
    if v.min(initial=0) < 0 or v.max(initial=0) > 127:
        raise InputError("velocities must be within 0..127")
    return v


def seconds_to_ticks(onsets_sec, tb: TimeBase) -> np.ndarray:
    """Convert onset times in seconds to integer MIDI ticks.

    tick = round(onset_sec * (bpm / 60) * ppq). Ordering is preserved;
    negative times are rejected.
    """
    onsets = np.asarray(onsets_sec, dtype=float)
    if onsets.size and onsets.min() < 0:
        raise InputError("onset times must be >= 0")
    return round_half_up(onsets * (tb.bpm / 60.0) * tb.ppq)


def quantize_to_steps(ticks, tb: TimeBase) -> np.ndarray:
    """Snap tick onsets to the nearest sixteenth-note step of the loop.

    An onset that rounds to step index total_steps is the next loop's
    downbeat and wraps to step 0. Multiple onsets on one step collapse
    to a single 1: the representation is binary.
    """
    t = np.asarray(ticks, dtype=float)
    if t.size and t.min() < 0:
        raise InputError("ticks must be >= 0")
    pattern = np.zeros(tb.total_steps, dtype=int)
    if t.size:
        steps = round_half_up(t / tb.ticks_per_sixteenth) % tb.total_steps
        pattern[steps] = 1
    return pattern


def steps_to_ticks(pattern, tb: TimeBase) -> np.ndarray:
    """Place one onset exactly on each active step's grid tick."""
    p = validate_pattern(pattern)
    return np.flatnonzero(p) * tb.ticks_per_sixteenth


def pattern_to_midi_file(pattern, velocities, pitch: int, tb: TimeBase) -> bytes:
    """Render a pattern as a format-0 Standard MIDI File.

    One note-on/note-off pair per active slot, note-on on the slot's
    grid tick, gate length 50% of a sixteenth. Returns the file bytes.
    """
    p = validate_pattern(pattern)
    v = validate_velocities(velocities)
    if not 0 <= int(pitch) <= 127:
        raise InputError(f"pitch must be within 0..127, got {pitch}")
    tps = tb.ticks_per_sixteenth
    gate = tps // 2
    notes = [
        SmfNote(onset_tick=step * tps, duration=gate, pitch=int(pitch), velocity=int(v[step]))
        for step in np.flatnonzero(p)
    ]
    return write_smf0(notes, division=tb.ppq, tempo_bpm=tb.bpm)
