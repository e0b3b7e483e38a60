#!/usr/bin/env python3
"""From generated patterns to Standard MIDI Files.

Two export paths end in the same bytes: pattern_to_midi_file writes a
single pattern straight to disk, and render_offline runs the actual
step sequencer (pitch lane, length control and all) over an ideal
clock. Both produce format-0 SMFs any DAW or hardware can read.

Run:  python3 demos/05_sequence_to_midi.py
"""

import tempfile
from pathlib import Path

import numpy as np

from latentseq.generate import GenerationRequest, generate
from latentseq.midifile import scan_smf0
from latentseq.nn import init_model, split
from latentseq.patterns import TimeBase, pattern_to_midi_file
from latentseq.sequencer import SequencerState, render_offline


def main() -> None:
    outdir = Path(tempfile.mkdtemp(prefix="latentseq_midi_"))
    tb = TimeBase()

    # Any decoder works here; an untrained one still generates.
    decoder = split(init_model("model1", seed=14))[1]
    result = generate(decoder, GenerationRequest(2.0, 1.0, threshold=0.45))
    print("generated pattern:",
          "".join("X" if v else "." for v in result.pattern))

    flat = outdir / "flat.mid"
    flat.write_bytes(pattern_to_midi_file(result.pattern, result.velocities, 60, tb))
    print(f"\npattern_to_midi_file -> {flat}")

    state = SequencerState(pattern=result.pattern.copy(),
                           velocities=result.velocities.copy())
    state.pitch_lane[:] = [48, 51, 55, 58, 60, 58, 55, 51]  # Cm arpeggio lane
    state.length = 12                                       # truncate the cycle
    sequenced = outdir / "sequenced.mid"
    sequenced.write_bytes(render_offline(state, 48, tb))
    print(f"render_offline (12-step cycle, pitch lane) -> {sequenced}")

    summary = scan_smf0(sequenced.read_bytes())
    print(f"\ninside the sequenced file: division {summary.division}, "
          f"tempo {summary.tempo_bpm:.0f} BPM")
    print(f"{'tick':>6}  {'event':<5} {'note':>4} {'vel':>4}")
    for tick, kind, note, velocity in summary.note_events[:14]:
        print(f"{tick:>6}  {kind:<5} {note:>4} {velocity:>4}")
    remaining = len(summary.note_events) - 14
    if remaining > 0:
        print(f"  ... {remaining} more events")
    print("\nthe 12-step length makes the note cycle repeat every 1440 ticks")
    print("while the pitch lane keeps rotating underneath it (mod 8).")


if __name__ == "__main__":
    main()
