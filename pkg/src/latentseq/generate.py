"""Decoder inference: latent coordinates plus a threshold become a pattern.

The raw sigmoid outputs double as the velocity source, scaled to
0..127, so louder steps are the ones the model was most confident
about. Latent inputs are deliberately unclamped: coordinates outside
(or opposite to) the training spread are part of the instrument.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .patterns import round_half_up

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class GenerationRequest:
    x: float
    y: float
    threshold: float = DEFAULT_THRESHOLD
    model_id: str = ""


@dataclass
class GenerationResult:
    raw: np.ndarray         # sigmoid outputs, strictly in (0, 1)
    pattern: np.ndarray     # raw >= threshold
    velocities: np.ndarray  # round(raw * 127)
    model_id: str = ""
    request: GenerationRequest | None = field(default=None, repr=False)


def generate(decoder, req: GenerationRequest) -> GenerationResult:
    """One deterministic decoder pass. Steps at raw >= threshold are active."""
    if not 0.0 <= req.threshold <= 1.0:
        raise InputError(f"threshold must be within [0, 1], got {req.threshold}")
    if decoder.in_dim != 2:
        raise InputError(f"decoder takes {decoder.in_dim} inputs, expected 2")
    raw = decoder.forward(np.array([req.x, req.y], dtype=float))
    return GenerationResult(
        raw=raw,
        pattern=(raw >= req.threshold).astype(int),
        velocities=round_half_up(raw * 127),
        model_id=req.model_id,
        request=req,
    )


def generate_ensemble(decoders: dict, requests) -> dict:
    """Run one request per model id; unknown ids raise KeyError.

    requests may be a single GenerationRequest (applied to every
    decoder) or a mapping of model_id -> GenerationRequest.
    """
    if not decoders:
        raise InputError("no decoders loaded")
    if isinstance(requests, GenerationRequest):
        requests = {model_id: requests for model_id in decoders}
    results = {}
    for model_id, req in requests.items():
        decoder = decoders[model_id]
        results[model_id] = generate(
            decoder,
            GenerationRequest(x=req.x, y=req.y, threshold=req.threshold, model_id=model_id),
        )
    return results
