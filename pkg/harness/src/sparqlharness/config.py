"""Training configuration with per-mode defaults.

Fine-tuning updates every weight with AdamW under an inverse-square-root
schedule (max lr 0.0015, 5000 warmup steps, 120 epochs).  Prefix tuning
freezes the base model and trains only the prefix encoder with Adafactor
at a constant 0.001 for 400 epochs, prefix length 50.  Each setting is
meant to be run with three seeds.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

MODES = ("finetune", "prefixtune")
SIZES = ("small", "base")
DEFAULT_SEEDS = (0, 1, 2)

MAX_TARGET_LEN = 192
DECODING = "greedy"
PREFIX_SHARING = "single embedding, shared two-layer MLP, per-site key/value heads"

_MODE_DEFAULTS = {
    "finetune": {"learning_rate": 0.0015, "warmup_steps": 5000, "epochs": 120},
    "prefixtune": {"learning_rate": 0.001, "warmup_steps": 0, "epochs": 400},
}


@dataclass
class TrainConfig:
    mode: str
    size: str = "small"
    prefix_len: int = 50
    learning_rate: float | None = None
    warmup_steps: int | None = None
    epochs: int | None = None
    seed: int = 0
    batch_size: int = 8
    max_steps: int | None = None
    train_path: str = ""
    dev_path: str | None = None
    out_dir: str = "harness_run"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.size not in SIZES:
            raise ValueError(f"size must be one of {SIZES}, got {self.size!r}")
        defaults = _MODE_DEFAULTS[self.mode]
        if self.learning_rate is None:
            self.learning_rate = defaults["learning_rate"]
        if self.warmup_steps is None:
            self.warmup_steps = defaults["warmup_steps"]
        if self.epochs is None:
            self.epochs = defaults["epochs"]

    @classmethod
    def from_json(cls, path: str | Path) -> "TrainConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**raw)

    def echo(self) -> dict:
        """Everything a rerun needs, including the fixed decoding choices."""
        payload = asdict(self)
        payload.update(
            {
                "decoding": DECODING,
                "max_target_len": MAX_TARGET_LEN,
                "prefix_sharing": PREFIX_SHARING,
                "optimizer": "adamw+inverse-sqrt" if self.mode == "finetune" else "adafactor-constant",
            }
        )
        return payload

    def write_echo(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.echo(), indent=2, sort_keys=True) + "\n", "utf-8")


@dataclass(frozen=True)
class ModelDims:
    d_model: int
    n_layers: int
    n_heads: int
    d_ff: int


SIZE_DIMS = {
    "small": ModelDims(d_model=64, n_layers=2, n_heads=4, d_ff=128),
    "base": ModelDims(d_model=128, n_layers=3, n_heads=4, d_ff=256),
}
