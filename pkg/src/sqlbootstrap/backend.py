"""Trainable-parser contract, builtin template parser, and the remote bridge client.

The builtin backend memorizes anonymized utterance templates: lexicon values
are replaced by {varname} slots (longest match), placeholder tokens pass
through, and optionally tokens are folded through the synonym table. At
prediction time an exact or near key (token edit distance within a threshold)
selects a SQL template, and the values captured from the input are bound back
into it. Anything further away is an abstention.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Protocol, Sequence

from .lexicon import Lexicon
from .sqlmodel import SqlParseError, parse_sql
from .synonyms import fold_token
from .tokenization import edit_distance, tokenize
from .wire import LineClient, ProviderSpec, TransportError, exchange_once, decode_response_lines

_SLOT_RE = re.compile(r"\{(\w+)\}")


class BackendError(Exception):
    """Unusable training data or a failing external backend."""


class ParserModel(Protocol):
    def predict(self, utterance: str) -> str | None: ...


class ParserBackend(Protocol):
    name: str

    def train(self, pairs: Sequence[tuple[str, str]], seed: int = 0) -> ParserModel: ...


@dataclass(frozen=True)
class TemplateParserConfig:
    fold_synonyms: bool = False
    theta: int | None = None       # absolute distance threshold; None = factor rule
    theta_factor: float = 0.25     # threshold = ceil(factor * key length)

    def threshold(self, key_length: int) -> int:
        if self.theta is not None:
            return self.theta
        return math.ceil(self.theta_factor * key_length)

    def to_dict(self) -> dict:
        return {
            "fold_synonyms": self.fold_synonyms,
            "theta": self.theta,
            "theta_factor": self.theta_factor,
        }


class ValueAnonymizer:
    """Longest-match replacement of lexicon values with {varname} slots."""

    def __init__(self, lexicon: Lexicon, fold_synonyms: bool = False):
        self.fold_synonyms = fold_synonyms
        self._by_first_token: dict[str, list[tuple[tuple[str, ...], str, str]]] = {}
        for var in lexicon.concrete():
            for value in var.values:
                value_tokens = tuple(tokenize(value))
                if not value_tokens:
                    continue
                bucket = self._by_first_token.setdefault(value_tokens[0], [])
                bucket.append((value_tokens, var.name, value))
        for bucket in self._by_first_token.values():
            bucket.sort(key=lambda entry: len(entry[0]), reverse=True)

    def anonymize(self, text: str) -> tuple[tuple[str, ...], dict[str, str]]:
        tokens = tokenize(text)
        key: list[str] = []
        captured: dict[str, str] = {}
        i = 0
        while i < len(tokens):
            token = tokens[i]
            match = None
            for value_tokens, var, value in self._by_first_token.get(token, ()):
                if tuple(tokens[i:i + len(value_tokens)]) == value_tokens:
                    match = (value_tokens, var, value)
                    break
            if match is not None:
                value_tokens, var, value = match
                key.append("{%s}" % var)
                captured.setdefault(var, value)
                i += len(value_tokens)
            else:
                if self.fold_synonyms and not token.startswith(("$", "{")):
                    token = fold_token(token)
                key.append(token)
                i += 1
        return tuple(key), captured


@dataclass
class TemplateParserModel:
    index: dict[tuple[str, ...], tuple[str, tuple[str, ...]]]  # key -> (sql template, needed vars)
    anonymizer: ValueAnonymizer
    config: TemplateParserConfig
    conflicts: int = 0
    trained_on: int = 0

    def predict(self, utterance: str) -> str | None:
        key, captured = self.anonymizer.anonymize(utterance)
        entry = self.index.get(key)
        if entry is None:
            entry = self._nearest(key)
            if entry is None:
                return None
        sql_template, needed = entry
        if any(var not in captured for var in needed):
            return None
        sql = sql_template
        for var in needed:
            sql = sql.replace("{%s}" % var, captured[var])
        return sql

    def _nearest(self, key: tuple[str, ...]):
        theta = self.config.threshold(len(key))
        best: tuple[int, tuple[str, ...]] | None = None
        for candidate in self.index:
            distance = edit_distance(list(key), list(candidate), cutoff=theta)
            if distance > theta:
                continue
            if best is None or (distance, candidate) < best:
                best = (distance, candidate)
        return self.index[best[1]] if best else None


class TemplateParserBackend:
    """Builtin backend: deterministic, trainable in milliseconds, no ML runtime."""

    def __init__(self, lexicon: Lexicon, config: TemplateParserConfig | None = None):
        self.name = "template"
        self.lexicon = lexicon
        self.config = config or TemplateParserConfig()

    def train(self, pairs: Sequence[tuple[str, str]], seed: int = 0) -> TemplateParserModel:
        return train_template_parser(list(pairs), self.lexicon, self.config)


def train_template_parser(
    pairs: Sequence[tuple[str, str]],
    lexicon: Lexicon,
    config: TemplateParserConfig | None = None,
) -> TemplateParserModel:
    """Build the key -> SQL-template index from (utterance, sql) pairs.

    Key collisions with different SQL keep the first entry and are counted
    as conflicts. Unparseable SQL is a hard error naming the row.
    """
    if not pairs:
        raise BackendError("training dataset is empty")
    config = config or TemplateParserConfig()
    anonymizer = ValueAnonymizer(lexicon, fold_synonyms=config.fold_synonyms)
    index: dict[tuple[str, ...], tuple[str, tuple[str, ...]]] = {}
    conflicts = 0
    for row, (utterance, sql) in enumerate(pairs):
        try:
            parse_sql(sql)
        except SqlParseError as exc:
            raise BackendError(f"row {row}: unparseable training SQL: {exc}")
        key, captured = anonymizer.anonymize(utterance)
        sql_template = sql
        for var, value in sorted(captured.items(), key=lambda kv: -len(kv[1])):
            sql_template = sql_template.replace(f'"{value}"', '"{%s}"' % var)
        needed = tuple(dict.fromkeys(_SLOT_RE.findall(sql_template)))
        existing = index.get(key)
        if existing is None:
            index[key] = (sql_template, needed)
        elif existing[0] != sql_template:
            conflicts += 1
    return TemplateParserModel(
        index=index,
        anonymizer=anonymizer,
        config=config,
        conflicts=conflicts,
        trained_on=len(pairs),
    )


def predict(model: ParserModel, utterance: str) -> str | None:
    return model.predict(utterance)


# --- remote backend (wire protocol client) -----------------------------------

class RemoteModel:
    def __init__(self, backend: "RemoteBackend", model_id: str):
        self._backend = backend
        self.model_id = model_id

    def predict(self, utterance: str) -> str | None:
        return self._backend._predict(self.model_id, utterance)


class RemoteBackend:
    """ParserBackend speaking the train/predict wire protocol."""

    def __init__(self, spec: ProviderSpec):
        if spec.kind == "builtin":
            raise ValueError("RemoteBackend needs a subprocess or http spec")
        self.name = spec.name
        self.spec = spec
        self._client: LineClient | None = None
        self._counter = 0

    def _next_id(self) -> str:
        self._counter += 1
        return f"b{self._counter}"

    def _roundtrip(self, lines: list[str]) -> dict:
        if self.spec.kind == "subprocess":
            if self._client is None:
                self._client = LineClient(self.spec.endpoint, timeout=self.spec.timeout)
            raw = self._client.request(lines, responses=1)
        else:
            raw = exchange_once(self.spec, lines)
        responses = decode_response_lines(raw)
        if not responses:
            raise TransportError(f"backend {self.name!r}: empty response")
        obj = responses[0]
        if "error" in obj:
            raise BackendError(f"backend {self.name!r}: {obj['error']}")
        return obj

    def train(self, pairs: Sequence[tuple[str, str]], seed: int = 0) -> RemoteModel:
        request_id = self._next_id()
        header = json.dumps(
            {"id": request_id, "verb": "train", "count": len(pairs), "seed": seed}
        )
        dataset = [
            json.dumps({"utterance": utterance, "sql": sql}) for utterance, sql in pairs
        ]
        obj = self._roundtrip([header] + dataset)
        model_id = obj.get("model")
        if not isinstance(model_id, str):
            raise BackendError(f"backend {self.name!r}: train returned no model id")
        return RemoteModel(self, model_id)

    def _predict(self, model_id: str, utterance: str) -> str | None:
        obj = self._roundtrip(
            [json.dumps({
                "id": self._next_id(), "verb": "predict",
                "model": model_id, "utterance": utterance,
            })]
        )
        sql = obj.get("sql")
        if sql is not None and not isinstance(sql, str):
            raise BackendError(f"backend {self.name!r}: non-string prediction")
        return sql

    def close(self):
        if self._client is not None:
            self._client.close()
            self._client = None


# --- conformance ----------------------------------------------------------------

CONFORMANCE_PAIRS = (
    ("how many ships were seen in $loc ?",
     'SELECT COUNT(*) FROM incidents AS va WHERE va.location = $loc'),
    ("who attacked the dhow on $dat ?",
     'SELECT va.aggressor FROM incidents AS va WHERE va.victim = "dhow" AND va.date = $dat'),
)

CONFORMANCE_PROBES = (
    "how many ships were seen in $loc ?",
    "an utterance the backend has never seen before",
    "",
    "punctuation !! and $weird tokens {braces}",
)


def check_backend_conformance(
    backend: ParserBackend,
    pairs: Sequence[tuple[str, str]] = CONFORMANCE_PAIRS,
    probes: Sequence[str] = CONFORMANCE_PROBES,
) -> list[str]:
    """Train/predict determinism and totality checks; empty result = conformant."""
    violations: list[str] = []

    def predictions(tag: str) -> list[str | None] | None:
        try:
            model = backend.train(list(pairs), seed=7)
        except Exception as exc:
            violations.append(f"{tag}: train failed: {exc}")
            return None
        out: list[str | None] = []
        for probe in probes:
            try:
                result = model.predict(probe)
            except Exception as exc:
                violations.append(f"{tag}: predict raised on {probe!r}: {exc}")
                return None
            if result is not None and not isinstance(result, str):
                violations.append(f"{tag}: predict returned {type(result).__name__}")
                return None
            out.append(result)
        # predict must be stable for a fixed model
        for probe, earlier in zip(probes, out):
            if model.predict(probe) != earlier:
                violations.append(f"{tag}: predict not deterministic on {probe!r}")
                return None
        return out

    first = predictions("run 1")
    second = predictions("run 2")
    if first is not None and second is not None and first != second:
        violations.append("train not reproducible: identical seed, different predictions")
    return violations
