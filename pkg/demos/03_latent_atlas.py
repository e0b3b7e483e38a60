#!/usr/bin/env python3
"""Where does the corpus live in latent space?

After training, the encoder half maps every training pattern to a 2-D
point. Plotting those points shows the spread a performer will explore
with the XY pad, and the bounding box picks the pad's range: twice the
largest coordinate, mirrored through zero, so there is always room to
steer beyond (and opposite to) the data.

Run:  python3 demos/03_latent_atlas.py
"""

import numpy as np

from latentseq.atlas import build_atlas, compute_range
from latentseq.audio import Dataset, DatasetRecord
from latentseq.nn import init_model, split, train

TEMPLATES = np.array([
    [1, 0, 0, 0] * 8,
    [0, 0, 1, 0] * 8,
    [1, 0, 0, 1, 0, 0, 1, 0] * 4,
    [1, 0, 1, 1, 0, 1, 1, 0] * 4,
])


def make_dataset(n=96, seed=11, flip_p=0.05) -> Dataset:
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        t = TEMPLATES[rng.integers(len(TEMPLATES))].copy()
        pattern = np.where(rng.random(32) < flip_p, 1 - t, t)
        records.append(DatasetRecord(id=f"loop{i:03d}", source=f"loop{i:03d}.wav",
                                     pattern=pattern.astype(int)))
    return Dataset(records)


def ascii_scatter(points, rows=18, cols=56) -> str:
    xs = np.array([p.x for p in points])
    ys = np.array([p.y for p in points])
    span_x = max(xs.max(), 1e-9)
    span_y = max(ys.max(), 1e-9)
    grid = [[" "] * cols for _ in range(rows)]
    for x, y in zip(xs, ys):
        c = min(int(x / span_x * (cols - 1)), cols - 1)
        r = rows - 1 - min(int(y / span_y * (rows - 1)), rows - 1)
        grid[r][c] = "o" if grid[r][c] == " " else "O"
    border = "+" + "-" * cols + "+"
    return "\n".join([border] + ["|" + "".join(row) + "|" for row in grid] + [border])


def main() -> None:
    dataset = make_dataset()
    model, _ = train(init_model("model1", seed=3), dataset, epochs=300, seed=3)
    encoder, _ = split(model)

    points = build_atlas(encoder, dataset)
    lrange = compute_range(points)

    print(f"{len(points)} corpus points through the trained encoder "
          f"(origin bottom-left, axes to max):\n")
    print(ascii_scatter(points))
    print(f"\nlatent bounding box: x [{lrange.min_x:.2f}, {lrange.max_x:.2f}], "
          f"y [{lrange.min_y:.2f}, {lrange.max_y:.2f}]")
    print(f"suggested XY pad range: [{lrange.suggested_ui_min:g}, "
          f"{lrange.suggested_ui_max:g}] on both axes")
    print("\nReLU keeps every point in the nonnegative quadrant; the pad range")
    print("mirrors through zero anyway so the performer can leave the data.")


if __name__ == "__main__":
    main()
