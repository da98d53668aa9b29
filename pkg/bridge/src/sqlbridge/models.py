"""Offline bridge models.

Paraphrase side: ``echo`` returns the input unchanged; ``rule-noise``
deterministically perturbs it the way real rewriters do (token drops,
adjacent swaps, and back-translation-style placeholder mangling such as
``$loc`` -> ``$ LOC``), so the core's repair and filtering paths get honest
exercise. Parser side: ``memorize`` stores exact utterance -> SQL pairs and
abstains on anything unseen; greedy and fully deterministic.

A neural rewriter or seq2seq parser plugs in by implementing the same two
methods; nothing in the protocol layer assumes these toy models.
"""

from __future__ import annotations

import random
from typing import Protocol

from .config import BridgeConfig


class ParaphraseModel(Protocol):
    def paraphrase(self, text: str, n: int) -> list[str]: ...


class ParserModel(Protocol):
    def train(self, pairs: list[dict], seed: int) -> str: ...

    def predict(self, model_id: str, utterance: str) -> str | None: ...


class EchoModel:
    """Identity paraphraser: n copies of the input."""

    def __init__(self, config: BridgeConfig):
        self.config = config

    def paraphrase(self, text: str, n: int) -> list[str]:
        return [text[: self.config.max_sequence_length * 8]] * n


class RuleNoiseModel:
    """Deterministic noisy rewriter seeded per (seed, text)."""

    def __init__(self, config: BridgeConfig):
        self.config = config

    def paraphrase(self, text: str, n: int) -> list[str]:
        rng = random.Random(f"{self.config.seed}|{text}")
        out: list[str] = []
        for _ in range(n):
            tokens = text.split()
            roll = rng.random()
            if roll < 0.35:
                # placeholder mangling: $loc -> $ LOC
                mangled = []
                for token in tokens:
                    if token.startswith("$") and len(token) > 1 and rng.random() < 0.8:
                        mangled.extend(["$", token[1:].upper()])
                    else:
                        mangled.append(token)
                tokens = mangled
            elif roll < 0.6 and len(tokens) > 3:
                index = rng.randrange(len(tokens) - 1)
                tokens[index], tokens[index + 1] = tokens[index + 1], tokens[index]
            elif roll < 0.85 and len(tokens) > 3:
                drop = rng.randrange(len(tokens))
                tokens = tokens[:drop] + tokens[drop + 1:]
            out.append(" ".join(tokens))
        return out


class MemorizingParser:
    """Exact-match parser: training SQL back for training utterances, else abstain."""

    def __init__(self, config: BridgeConfig):
        self.config = config
        self._models: dict[str, dict[str, str]] = {}
        self._counter = 0

    def train(self, pairs: list[dict], seed: int) -> str:
        table: dict[str, str] = {}
        for pair in pairs:
            table.setdefault(pair["utterance"], pair["sql"])
        self._counter += 1
        model_id = f"memorize-{self._counter}"
        self._models[model_id] = table
        return model_id

    def predict(self, model_id: str, utterance: str) -> str | None:
        return self._models.get(model_id, {}).get(utterance)


_PARAPHRASE_MODELS = {"echo": EchoModel, "rule-noise": RuleNoiseModel}
_PARSER_MODELS = {"memorize": MemorizingParser}


def build_model(config: BridgeConfig):
    registry = _PARAPHRASE_MODELS if config.mode == "paraphrase" else _PARSER_MODELS
    if config.model not in registry:
        raise ValueError(
            f"unknown {config.mode} model {config.model!r}; "
            f"available: {sorted(registry)}"
        )
    return registry[config.model](config)
