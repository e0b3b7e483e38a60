"""The playable step sequencer.

A 32-step rhythm lane (pattern + velocities, usually supplied by the
generator) drives a monophonic note stream; an 8-slot pitch lane
repeats underneath it (sounding pitch at step s is pitch_lane[s mod 8])
and a length control truncates the cycle to 1..32 steps.

Timing model: tick(now) plays the step under the playhead and then
advances. The gate is 50% of a step, so every note-off lands strictly
before the next tick. Control changes never take effect mid-step: they
are queued (after immediate validation) and applied at the next tick,
so a generation swap cannot truncate a sounding step.

Events go to a MIDI sink. CaptureSink records them for tests and
offline rendering; RawPortSink writes raw MIDI bytes to an OS rawmidi
device or FIFO for live use.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .midifile import SmfNote, write_smf0
from .patterns import (
    PATTERN_LENGTH,
    TimeBase,
    round_half_up,
    validate_pattern,
    validate_velocities,
)

PITCH_LANE_LENGTH = 8
GATE_FRACTION = 0.5


@dataclass(frozen=True)
class MidiEvent:
    kind: str        # "note_on" | "note_off"
    note: int
    velocity: int
    time: float      # seconds on the sequencer clock


class CaptureSink:
    """Collects events in memory."""

    def __init__(self):
        self.events: list[MidiEvent] = []

    def send(self, event: MidiEvent) -> None:
        self.events.append(event)


class ConsoleSink:
    def send(self, event: MidiEvent) -> None:
        print(f"{event.time:10.4f}  {event.kind:<8}  note={event.note:<3} vel={event.velocity}")


class RawPortSink:
    """Writes raw MIDI bytes to a device path (ALSA rawmidi, virmidi, FIFO).

    There is no portable in-process MIDI stack in the standard library,
    but every Linux MIDI interface exposes a writable byte device; point
    this at /dev/snd/midiC*D* or a FIFO bridged to your synth.
    """

    def __init__(self, path, channel: int = 0):
        self.channel = channel & 0x0F
        self._fh = open(path, "wb", buffering=0)

    def send(self, event: MidiEvent) -> None:
        status = 0x90 if event.kind == "note_on" else 0x80
        self._fh.write(bytes([status | self.channel, event.note & 0x7F,
                              event.velocity & 0x7F]))

    def close(self) -> None:
        self._fh.close()


@dataclass
class SequencerState:
    pattern: np.ndarray = field(default_factory=lambda: np.zeros(PATTERN_LENGTH, dtype=int))
    velocities: np.ndarray = field(default_factory=lambda: np.full(PATTERN_LENGTH, 100, dtype=int))
    pitch_lane: np.ndarray = field(default_factory=lambda: np.full(PITCH_LANE_LENGTH, 60, dtype=int))
    length: int = PATTERN_LENGTH
    bpm: float = 120.0
    playhead: int = 0
    running: bool = False

    def copy(self) -> "SequencerState":
        return SequencerState(
            pattern=self.pattern.copy(), velocities=self.velocities.copy(),
            pitch_lane=self.pitch_lane.copy(), length=self.length,
            bpm=self.bpm, playhead=self.playhead, running=self.running,
        )


class StepSequencer:
    """Single-owner sequencer core, driven by explicit tick times.

    One execution context (a live clock thread or a test loop) calls
    tick/flush_pending/stop; any thread may enqueue control changes.
    """

    def __init__(self, sink=None, state: SequencerState | None = None):
        self.sink = sink if sink is not None else CaptureSink()
        self.state = state.copy() if state is not None else SequencerState()
        self._mutations: deque = deque()
        self._mutation_lock = threading.Lock()
        self._sounding: list[tuple[int, float]] = []  # (note, off_time)

    # control surface: validate now, apply at the next step boundary

    def set_length(self, length: int) -> None:
        if not 1 <= length <= PATTERN_LENGTH:
            raise InputError(f"length must be within 1..{PATTERN_LENGTH}, got {length}")
        self._queue(("length", int(length)))

    def set_pitch(self, slot: int, note: int) -> None:
        if not 0 <= slot < PITCH_LANE_LENGTH:
            raise InputError(f"pitch slot must be within 0..{PITCH_LANE_LENGTH - 1}, got {slot}")
        if not 0 <= note <= 127:
            raise InputError(f"note must be within 0..127, got {note}")
        self._queue(("pitch", int(slot), int(note)))

    def set_bpm(self, bpm: float) -> None:
        if bpm <= 0:
            raise InputError(f"bpm must be > 0, got {bpm}")
        self._queue(("bpm", float(bpm)))

    def apply_generation(self, result) -> None:
        """Swap pattern and velocities atomically at the next step boundary."""
        pattern = validate_pattern(result.pattern)
        velocities = validate_velocities(result.velocities)
        self._queue(("generation", pattern, velocities))

    def _queue(self, mutation) -> None:
        with self._mutation_lock:
            if mutation[0] == "generation":
                # only the newest pending swap matters; a long drag while
                # stopped must not pile up thousands of stale patterns
                kept = [m for m in self._mutations if m[0] != "generation"]
                self._mutations.clear()
                self._mutations.extend(kept)
            self._mutations.append(mutation)

    def _apply_mutations(self) -> None:
        with self._mutation_lock:
            pending = list(self._mutations)
            self._mutations.clear()
        for mutation in pending:
            if mutation[0] == "length":
                self.state.length = mutation[1]
                self.state.playhead %= self.state.length
            elif mutation[0] == "pitch":
                self.state.pitch_lane[mutation[1]] = mutation[2]
            elif mutation[0] == "bpm":
                self.state.bpm = mutation[1]
            elif mutation[0] == "generation":
                self.state.pattern = mutation[1].copy()
                self.state.velocities = mutation[2].copy()

    # timing

    def step_period(self) -> float:
        """Seconds per sixteenth-note step at the current tempo."""
        return 60.0 / self.state.bpm / 4.0

    def next_off_time(self) -> float | None:
        return self._sounding[0][1] if self._sounding else None

    def flush_pending(self, now: float) -> list[MidiEvent]:
        """Emit note-offs whose scheduled time has arrived."""
        events = []
        while self._sounding and self._sounding[0][1] <= now:
            note, off_time = self._sounding.pop(0)
            events.append(MidiEvent("note_off", note, 0, off_time))
        for e in events:
            self.sink.send(e)
        return events

    # transport

    def start(self) -> None:
        self.state.playhead = 0
        self.state.running = True

    def stop(self, now: float) -> list[MidiEvent]:
        """Halt and immediately close any sounding note."""
        self.state.running = False
        events = [MidiEvent("note_off", note, 0, now) for note, _ in self._sounding]
        self._sounding.clear()
        for e in events:
            self.sink.send(e)
        return events

    def tick(self, now: float) -> list[MidiEvent]:
        """Play the step under the playhead, then advance.

        Due note-offs are flushed first and queued control changes are
        applied, so this is the step boundary everything synchronizes to.
        """
        events = self.flush_pending(now)
        self._apply_mutations()
        if not self.state.running:
            return events
        step = self.state.playhead
        if self.state.pattern[step]:
            note = int(self.state.pitch_lane[step % PITCH_LANE_LENGTH])
            velocity = int(self.state.velocities[step])
            on = MidiEvent("note_on", note, velocity, now)
            self.sink.send(on)
            events.append(on)
            self._sounding.append((note, now + GATE_FRACTION * self.step_period()))
        self.state.playhead = (step + 1) % self.state.length
        return events


def render_offline(state: SequencerState, n_steps: int,
                   tb: TimeBase | None = None) -> bytes:
    """Render n_steps of the sequence, from the top, as a format-0 SMF.

    Runs the same StepSequencer machinery over the ideal step grid, so
    the event sequence is identical to n_steps of live ticks; times are
    converted to MIDI ticks through the shared seconds-to-ticks rule.
    """
    if n_steps < 1:
        raise InputError(f"n_steps must be >= 1, got {n_steps}")
    tb = tb or TimeBase(bpm=state.bpm)
    capture = CaptureSink()
    seq = StepSequencer(sink=capture, state=state)
    seq.start()
    now = 0.0
    for _ in range(n_steps):
        seq.tick(now)
        now += seq.step_period()
    seq.flush_pending(now)

    notes = []
    open_events: dict[int, MidiEvent] = {}
    for event in capture.events:
        tick = int(round_half_up(event.time * (tb.bpm / 60.0) * tb.ppq))
        if event.kind == "note_on":
            open_events[event.note] = (tick, event)
        else:
            onset_tick, on = open_events.pop(event.note)
            notes.append(SmfNote(onset_tick=onset_tick, duration=max(1, tick - onset_tick),
                                 pitch=on.note, velocity=on.velocity))
    return write_smf0(notes, division=tb.ppq, tempo_bpm=tb.bpm)


def _sleep_until(target: float, clock, sleep, spin: bool) -> None:
    # Coarse sleep to just short of the deadline, then (on a real clock)
    # burn the last stretch in a spin; timer wakeups alone overshoot by
    # more than the 2 ms jitter budget under scheduler load.
    while True:
        remaining = target - clock()
        if remaining <= 0:
            return
        if remaining > 0.0015:
            sleep(remaining - 0.0015)
        elif not spin:
            sleep(remaining)  # simulated clocks advance by being slept on


class LiveRunner:
    """Drives a StepSequencer against the wall clock in its own thread.

    Ticks are scheduled on an accumulating ideal grid (next = previous
    target + period), so timing errors do not drift. Event timestamps
    are the scheduled times; physical emission jitter is the only
    wall-clock artifact.
    """

    def __init__(self, seq: StepSequencer, clock=time.monotonic, sleep=time.sleep,
                 on_step=None):
        self.seq = seq
        self.clock = clock
        self.sleep = sleep
        self.on_step = on_step
        # spin out the final stretch only against the real clock; a
        # simulated clock advances through sleep calls and would hang
        self._spin = clock is time.monotonic
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._stop.clear()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
            self._thread = None

    def _run(self) -> None:
        self.seq.start()
        next_step = self.clock()
        while not self._stop.is_set():
            off_time = self.seq.next_off_time()
            if off_time is not None and off_time < next_step:
                _sleep_until(off_time, self.clock, self.sleep, self._spin)
                self.seq.flush_pending(off_time)
                continue
            _sleep_until(next_step, self.clock, self.sleep, self._spin)
            step = self.seq.state.playhead
            self.seq.tick(next_step)
            if self.on_step is not None:
                self.on_step(step)
            next_step += self.seq.step_period()
        self.seq.stop(self.clock())
