"""Engine configuration: a flat key = value text file, flags win over file.

Lines are `key = value`; blank lines and # comments are ignored.
Unknown keys are rejected by name so typos surface immediately.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import InputError


def _str_list(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


@dataclass
class Config:
    bpm: float = 120.0
    ppq: int = 480
    dataset: str = ""
    models: list[str] = field(default_factory=list)    # up to 3 for the ensemble
    atlases: list[str] = field(default_factory=list)   # aligned with models
    # port -1 disables that transport entirely
    osc_in_port: int = 9000
    osc_out_port: int = 9001
    osc_out_host: str = "127.0.0.1"
    ws_port: int = 8080
    midi_port: str = ""                                # rawmidi device or FIFO path
    ui_dir: str = ""
    http_port: int = 8000
    epochs: int = 500
    batch_size: int = 16
    learning_rate: float = 2e-2
    seed: int = 0

    def validate(self) -> "Config":
        if self.bpm <= 0:
            raise InputError(f"config: bpm must be > 0, got {self.bpm}")
        if self.ppq <= 0 or self.ppq % 4:
            raise InputError(f"config: ppq must be a positive multiple of 4, got {self.ppq}")
        if len(self.models) > 3:
            raise InputError(f"config: at most 3 models, got {len(self.models)}")
        if self.atlases and len(self.atlases) > len(self.models):
            raise InputError("config: more atlases than models")
        for name in ("osc_in_port", "osc_out_port", "ws_port", "http_port"):
            port = getattr(self, name)
            if not -1 <= port <= 65535:
                raise InputError(f"config: {name} out of range: {port}")
        if self.osc_in_port < 0 and self.ws_port < 0:
            raise InputError("config: at least one of OSC and WebSocket must be enabled")
        if self.epochs <= 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise InputError("config: training hyperparameters must be positive")
        return self


_FIELD_PARSERS = {
    "bpm": float,
    "ppq": int,
    "dataset": str,
    "models": _str_list,
    "atlases": _str_list,
    "osc_in_port": int,
    "osc_out_port": int,
    "osc_out_host": str,
    "ws_port": int,
    "midi_port": str,
    "ui_dir": str,
    "http_port": int,
    "epochs": int,
    "batch_size": int,
    "learning_rate": float,
    "seed": int,
}
assert set(_FIELD_PARSERS) == {f.name for f in fields(Config)}


def load_config(path) -> Config:
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such config file: {path}")
    config = Config()
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InputError(f"{path}:{line_no}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_PARSERS:
            raise InputError(f"{path}:{line_no}: unknown config key {key!r}")
        try:
            setattr(config, key, _FIELD_PARSERS[key](raw))
        except ValueError as exc:
            raise InputError(f"{path}:{line_no}: bad value for {key}: {exc}") from exc
    return config.validate()
