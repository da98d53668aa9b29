"""JSONL dataset files and content digests.

Canonical pairs, paraphrase candidates, and plain (utterance, sql) example
sets all travel as one JSON object per line, UTF-8, sorted keys, so files
are diffable and byte-stable across runs.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Iterator

from .grammar import CanonicalPair
from .paraphrase import ParaphraseCandidate


def _dump_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    path = Path(path)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(_dump_line(record) + "\n")
            count += 1
    return count


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with Path(path).open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}")


def write_pairs(path: str | Path, pairs: Iterable[CanonicalPair]) -> int:
    return write_jsonl(path, (pair.to_dict() for pair in pairs))


def read_pairs(path: str | Path) -> list[CanonicalPair]:
    return [CanonicalPair.from_dict(record) for record in read_jsonl(path)]


def write_candidates(path: str | Path, candidates: Iterable[ParaphraseCandidate]) -> int:
    return write_jsonl(path, (candidate.to_dict() for candidate in candidates))


def read_candidates(path: str | Path) -> list[ParaphraseCandidate]:
    return [ParaphraseCandidate.from_dict(record) for record in read_jsonl(path)]


def read_examples(path: str | Path) -> list[tuple[str, str]]:
    """Held-out question file: {"utterance", "sql"} per line."""
    examples = []
    for lineno, record in enumerate(read_jsonl(path), start=1):
        if "utterance" not in record or "sql" not in record:
            raise ValueError(f"{path}:{lineno}: expected utterance and sql fields")
        examples.append((record["utterance"], record["sql"]))
    return examples


def file_digest(path: str | Path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def text_digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()
