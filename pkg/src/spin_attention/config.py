"""Flat key=value run configuration shared by all CLI subcommands."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class RunConfig:
    data_dir: str = "data"
    out_dir: str = "out"
    checkpoint: str = ""  # defaults to <out_dir>/model.bsa
    side: int = 2
    d: int = 0  # 0 = 2 * side^2
    n_train: int = 50000
    epochs: int = 20
    batch_size: int = 32
    lambda_train: float = 5.0
    lambda_eval: float = 1.0
    learning_rate: float = 0.05
    clip_threshold: float = 1.0
    seed: int = 0
    embed_seed: int = 1234
    gamma: float = 1.0
    norm_mode: str = "l2"
    task: str = "mask"
    iters: int = 50
    mask_fraction: float = 0.3
    noise_variance: float = 0.7
    eval_seed: int = 0
    n_eval: int = 500
    n_samples: int = 4
    n_probe: int = 10
    probe_iters: int = 200
    bins: int = 30

    def checkpoint_path(self) -> Path:
        return Path(self.checkpoint) if self.checkpoint else Path(self.out_dir) / "model.bsa"


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


class ConfigError(Exception):
    pass


def _coerce(key: str, value: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _FIELD_TYPES[key]
    try:
        if kind in ("int", int):
            return int(value)
        if kind in ("float", float):
            return float(value)
        return value
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional key=value file plus overrides
    (CLI flags win). Unknown keys are rejected."""
    cfg = RunConfig()
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            setattr(cfg, key, _coerce(key, value))
    for key, value in (overrides or {}).items():
        setattr(cfg, key, _coerce(key, str(value)))
    return cfg
