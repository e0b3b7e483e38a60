"""Latent-space maps of a training corpus.

Feeding the corpus through a trained encoder gives one 2-D point per
loop; the bounding box of those points drives the UI control range.
The published interfaces used -10..10 controls for latents spreading
roughly 0..5 and -2..2 for 0..1, i.e. about twice the data extent and
mirrored through zero, so the suggested range here is the symmetric
interval +/-max(2 * largest absolute coordinate, 1.0).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .errors import FormatError, InputError


@dataclass(frozen=True)
class LatentPoint:
    x: float
    y: float
    record_id: str


@dataclass(frozen=True)
class LatentRange:
    min_x: float
    max_x: float
    min_y: float
    max_y: float
    suggested_ui_min: float
    suggested_ui_max: float


def build_atlas(encoder, dataset) -> list[LatentPoint]:
    """Encode every dataset record, order preserved."""
    if encoder.in_dim != 32:
        raise InputError(f"encoder takes {encoder.in_dim} inputs, expected 32")
    points = []
    for record in dataset.records:
        x, y = encoder.forward(record.pattern.astype(float))
        points.append(LatentPoint(x=float(x), y=float(y), record_id=record.id))
    return points


def compute_range(points: list[LatentPoint]) -> LatentRange:
    """Bounding box plus the symmetric UI range that strictly contains it."""
    if not points:
        raise InputError("cannot compute a range from zero points")
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    max_abs = max(max(abs(v) for v in xs), max(abs(v) for v in ys))
    bound = max(2.0 * max_abs, 1.0)
    return LatentRange(
        min_x=min(xs), max_x=max(xs),
        min_y=min(ys), max_y=max(ys),
        suggested_ui_min=-bound, suggested_ui_max=bound,
    )


def export_atlas(points: list[LatentPoint], lrange: LatentRange, path,
                 model_id: str = "") -> None:
    """Write the atlas JSON consumed by the web UI scatter overlay."""
    if not points:
        raise InputError("refusing to export an empty atlas")
    payload = {
        "model_id": model_id,
        "points": [{"id": p.record_id, "x": p.x, "y": p.y} for p in points],
        "range": asdict(lrange),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_atlas(path) -> tuple[str, list[LatentPoint], LatentRange]:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        points = [LatentPoint(x=float(p["x"]), y=float(p["y"]), record_id=str(p["id"]))
                  for p in payload["points"]]
        lrange = LatentRange(**{k: float(v) for k, v in payload["range"].items()})
        return str(payload["model_id"]), points, lrange
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed atlas file ({exc})") from exc
