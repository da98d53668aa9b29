from __future__ import annotations

from dataclasses import dataclass

MODES = ("paraphrase", "parser")


@dataclass(frozen=True)
class BridgeConfig:
    """One process, one role; the seed reaches every stochastic component."""

    mode: str
    model: str = "echo"
    device: str = "cpu"
    max_sequence_length: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.max_sequence_length < 1:
            raise ValueError("max_sequence_length must be positive")
