#!/usr/bin/env python3
"""From a folder of audio loops to binary rhythm patterns.

This walks the whole ingest pipeline on synthetic material so it runs
anywhere: we render a handful of click-track WAVs whose clicks sit on
known sixteenth-note grids, then ask the library to get the patterns
back out of the audio. With real loops the steps are identical:

    WAV -> mono 44.1 kHz -> onset times -> MIDI ticks -> 32 binary steps

Run:  python3 demos/01_loops_to_patterns.py
"""

import tempfile
from pathlib import Path

import numpy as np

from latentseq.audio import detect_onsets, ingest_corpus, load_loop, synth_click_loop, write_wav
from latentseq.patterns import TimeBase

GROOVES = {
    "four_on_floor": [1, 0, 0, 0] * 8,
    "offbeats": [0, 0, 1, 0] * 8,
    "tresillo": [1, 0, 0, 1, 0, 0, 1, 0] * 4,
    "busy": [1, 0, 1, 1, 0, 1, 1, 0] * 4,
}


def show(pattern) -> str:
    return "".join("X" if v else "." for v in pattern)


def main() -> None:
    tb = TimeBase()  # 120 BPM, two bars, 480 ppq
    workdir = Path(tempfile.mkdtemp(prefix="latentseq_demo_"))
    print(f"writing {len(GROOVES)} synthetic loops to {workdir}\n")

    for name, pattern in GROOVES.items():
        write_wav(workdir / f"{name}.wav", synth_click_loop(pattern, tb))

    # Peek at one loop's onset times before quantization.
    loop = load_loop(workdir / "tresillo.wav")
    onsets = detect_onsets(loop)
    print(f"tresillo.wav: {len(onsets)} onsets detected, first four at "
          f"{np.round(onsets[:4], 4).tolist()} s")
    print(f"(the sixteenth-note grid at 120 BPM is every {tb.seconds_per_step} s)\n")

    dataset = ingest_corpus(workdir, tb)
    print(f"ingested {len(dataset)} loops:")
    print(f"{'loop':<16} {'steps 1..32 (X = onset)'}")
    for record in dataset.records:
        original = GROOVES[record.id]
        status = "exact" if (record.pattern == original).all() else "DIFFERS"
        print(f"{record.id:<16} {show(record.pattern)}   [{status}]")

    out = workdir / "corpus.jsonl"
    dataset.save_jsonl(out)
    print(f"\ndataset saved to {out}")


if __name__ == "__main__":
    main()
