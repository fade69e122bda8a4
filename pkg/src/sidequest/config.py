"""Engine configuration: one flat record of every tunable, JSON-loadable.

Unknown keys are rejected rather than ignored -- a typoed knob that
silently does nothing is worse than a crash.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

__all__ = ["EngineConfig", "ConfigError"]


class ConfigError(ValueError):
    pass


@dataclass
class EngineConfig:
    # memory
    flush_threshold: int = 2000
    session_period: float = 300.0
    k_local: int = 10
    k_session: int = 5
    # triggers
    sustained_sim: float = 0.9
    revisit_sim: float = 0.8
    history_horizon: float = 180.0
    refractory: float = 120.0
    min_age: float = 20.0
    threshold_min: float = 10.0
    threshold_max: float = 60.0
    # reading speed
    default_speed: float = 100.0
    min_speed: float = 10.0
    max_speed: float = 500.0
    speed_window: int = 20
    # questions and search
    questions_per_trigger: int = 3
    results_per_question: int = 3
    context_per_layer: int = 2
    screen_text_cap: int = 1500
    # adapters
    llm_adapter: str = "template"  # "template" | "identity"
    embed_dimension: int = 384
    adapter_timeout: float = 30.0
    # state and paths
    profile_seed: str | None = None
    index_path: str | None = None  # None = search explicitly disabled
    journal_path: str | None = None
    # serving
    host: str = "127.0.0.1"
    port: int = 8765

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        positive = [
            "flush_threshold", "session_period", "k_local", "k_session",
            "history_horizon", "threshold_min", "threshold_max",
            "default_speed", "min_speed", "max_speed", "speed_window",
            "questions_per_trigger", "context_per_layer", "screen_text_cap",
            "embed_dimension", "adapter_timeout",
        ]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("refractory", "min_age", "results_per_question"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("sustained_sim", "revisit_sim"):
            value = getattr(self, name)
            if not (0.0 < value <= 1.0):
                raise ConfigError(f"{name} must be in (0, 1], got {value}")
        if self.threshold_min > self.threshold_max:
            raise ConfigError("threshold_min must be <= threshold_max")
        if not (self.min_speed <= self.default_speed <= self.max_speed):
            raise ConfigError("require min_speed <= default_speed <= max_speed")
        if self.llm_adapter not in ("template", "identity"):
            raise ConfigError(
                f"llm_adapter must be 'template' or 'identity', got {self.llm_adapter!r}"
            )
        if not (1 <= self.port <= 65535):
            raise ConfigError(f"port must be in 1..65535, got {self.port}")

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)
