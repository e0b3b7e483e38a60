#!/usr/bin/env python3
"""Playing the decoder like an instrument: latent sweeps and thresholds.

The trained decoder turns any (x, y) coordinate into 32 sigmoid values.
A threshold slices them into a binary pattern; the same values scaled
to 0..127 become per-step velocities. Sweeping one latent axis shows
rhythms morphing; sweeping the threshold thins the same rhythm out.

Run:  python3 demos/04_steer_the_decoder.py
"""

import numpy as np

from latentseq.generate import GenerationRequest, generate
from latentseq.nn import init_model, split, train

TEMPLATES = np.array([
    [1, 0, 0, 0] * 8,
    [0, 0, 1, 0] * 8,
    [1, 0, 0, 1, 0, 0, 1, 0] * 4,
    [1, 1, 1, 1] * 8,
])


def make_corpus(n=96, seed=23, flip_p=0.05):
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        t = TEMPLATES[rng.integers(len(TEMPLATES))].copy()
        rows.append(np.where(rng.random(32) < flip_p, 1 - t, t))
    return np.array(rows, dtype=float)


def show(pattern) -> str:
    return "".join("X" if v else "." for v in pattern)


def main() -> None:
    data = make_corpus()
    model, _ = train(init_model("model1", seed=9), data, epochs=300, seed=9)
    encoder, decoder = split(model)

    spread = np.array([encoder.forward(row) for row in data])
    hi = spread.max(axis=0)
    print(f"training data spans x 0..{hi[0]:.1f}, y 0..{hi[1]:.1f}\n")

    print("sweeping x across (and past) the data at fixed y, threshold 0.5:")
    y_mid = float(spread[:, 1].mean())
    for x in np.linspace(0.0, 1.6 * hi[0], 7):
        result = generate(decoder, GenerationRequest(float(x), y_mid))
        print(f"  x={x:6.2f}  {show(result.pattern)}   {int(result.pattern.sum()):2d} steps")

    print("\nraising the threshold at a fixed point keeps only the confident steps:")
    x_mid = float(spread[:, 0].mean())
    for threshold in (0.1, 0.3, 0.5, 0.7, 0.9):
        result = generate(decoder, GenerationRequest(x_mid, y_mid, threshold=threshold))
        active = result.velocities[result.pattern == 1]
        loudest = int(active.max()) if active.size else 0
        print(f"  t={threshold:.1f}  {show(result.pattern)}   "
              f"{int(result.pattern.sum()):2d} steps, peak velocity {loudest}")

    print("\nnegative coordinates are allowed on purpose; the decoder has")
    print("never seen them, which is what makes the corner cases playable:")
    for xy in ((-2.0, -2.0), (-4.0, 1.0)):
        result = generate(decoder, GenerationRequest(*xy))
        print(f"  ({xy[0]:5.1f}, {xy[1]:5.1f})  {show(result.pattern)}")


if __name__ == "__main__":
    main()
