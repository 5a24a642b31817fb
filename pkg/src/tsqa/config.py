"""Feature and run configuration objects, with JSON round-trips."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class FeatureConfig:
    """How token and temporal information become policy features."""

    embed_dim: int = 32
    window: int = 10  # dilation radius, in tokens
    hidden: int = 64
    fusion_mode: str = "add"  # "add" or "concat"
    temporal_fusion: bool = True  # False freezes the time table at zero

    def __post_init__(self) -> None:
        if self.embed_dim < 1:
            raise ValueError("embed_dim must be positive")
        if self.window < 0:
            raise ValueError("window must be non-negative")
        if self.hidden < 1:
            raise ValueError("hidden must be positive")
        if self.fusion_mode not in ("add", "concat"):
            raise ValueError(f"unknown fusion mode {self.fusion_mode!r}")

    @property
    def fused_width(self) -> int:
        return self.embed_dim * (2 if self.fusion_mode == "concat" else 1)

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, payload: dict) -> "FeatureConfig":
        known = {f: payload[f] for f in cls.__dataclass_fields__ if f in payload}
        return cls(**known)


@dataclass(frozen=True)
class RunConfig:
    """Top-level knobs shared by the command-line workflows."""

    features: FeatureConfig = field(default_factory=FeatureConfig)
    seed: int = 0

    def to_json_dict(self) -> dict:
        return {"features": self.features.to_json_dict(), "seed": self.seed}

    @classmethod
    def from_json_dict(cls, payload: dict) -> "RunConfig":
        features = FeatureConfig.from_json_dict(payload.get("features", {}))
        return cls(features=features, seed=int(payload.get("seed", 0)))


def load_run_config(path: str | Path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return RunConfig.from_json_dict(json.load(fh))
