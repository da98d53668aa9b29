"""Reference adapter for the sqlbootstrap wire protocols.

One process serves exactly one role over stdin/stdout, newline-delimited
JSON objects both ways:

* paraphrase provider (``--mode paraphrase``): ``{"id", "text", "n"}`` ->
  ``{"id", "candidates": [...]}``
* parser backend (``--mode parser``): ``{"id", "verb": "train", "count": N,
  "seed"}`` + N pair lines -> ``{"id", "model"}``; ``{"id", "verb":
  "predict", "model", "utterance"}`` -> ``{"id", "sql"}`` (null = abstain).

The shipped models (echo, rule-noise, memorize) need no downloads, so the
bridge and its tests run offline; heavier neural rewriters slot in behind
the same ParaphraseModel/ParserModel interfaces.
"""

from .config import BridgeConfig
from .models import EchoModel, MemorizingParser, RuleNoiseModel, build_model
from .server import serve

__all__ = [
    "BridgeConfig",
    "EchoModel",
    "MemorizingParser",
    "RuleNoiseModel",
    "build_model",
    "serve",
]

__version__ = "0.1.0"
