"""Paraphrase generation behind a uniform provider contract.

Candidates from any provider are post-processed the same way: abstract
placeholder tokens mangled by the rewrite ("$ LOC", "$Pos") are repaired,
candidates that lost or duplicated a placeholder are marked invalid, and
verbatim copies of the source are flagged as duplicates. The builtin
provider is a deterministic synonym/reordering rewriter so the whole
pipeline runs without any external service.
"""

from __future__ import annotations

import json
import logging
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .grammar import CanonicalPair
from .synonyms import alternatives
from .tokenization import tokenize
from .wire import ProviderSpec, TransportError, exchange_once, decode_response_lines

logger = logging.getLogger(__name__)

PASSIVE_VERBS = ("rob", "steal", "loot", "hijack", "board", "attack", "seize")


@dataclass(frozen=True)
class ParaphraseCandidate:
    source_pair_ref: str
    text: str
    provider: str
    source_utterance: str = ""
    round_kept: int | None = None
    repairs: tuple[str, ...] = ()
    invalid_reason: str | None = None
    duplicate: bool = False
    predicted_sql: str | None = None  # filled by the filter loop when kept

    @property
    def valid(self) -> bool:
        return self.invalid_reason is None

    def to_dict(self) -> dict:
        return {
            "source_pair_ref": self.source_pair_ref,
            "text": self.text,
            "provider": self.provider,
            "source_utterance": self.source_utterance,
            "round_kept": self.round_kept,
            "repairs": list(self.repairs),
            "invalid_reason": self.invalid_reason,
            "duplicate": self.duplicate,
            "predicted_sql": self.predicted_sql,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "ParaphraseCandidate":
        return cls(
            source_pair_ref=record["source_pair_ref"],
            text=record["text"],
            provider=record["provider"],
            source_utterance=record.get("source_utterance", ""),
            round_kept=record.get("round_kept"),
            repairs=tuple(record.get("repairs", ())),
            invalid_reason=record.get("invalid_reason"),
            duplicate=record.get("duplicate", False),
            predicted_sql=record.get("predicted_sql"),
        )


# --- placeholder repair ------------------------------------------------------

@dataclass(frozen=True)
class RepairResult:
    text: str
    repairs: tuple[str, ...]
    missing: tuple[str, ...]   # source placeholders absent after repair
    surplus: tuple[str, ...]   # placeholders present too often or uninvited

    @property
    def ok(self) -> bool:
        return not self.missing and not self.surplus


def repair_variables(source: str | Sequence[str], candidate: str) -> RepairResult:
    """Rejoin split/case-mangled $-tokens; report any that cannot be restored.

    Only placeholders that occur in the source are repaired; tokens are never
    invented. A source placeholder absent (or present more than once) after
    repair makes the candidate invalid.
    """
    source_tokens = source.split() if isinstance(source, str) else list(source)
    placeholders = [t for t in dict.fromkeys(source_tokens) if t.startswith("$")]
    text = candidate
    applied: list[str] = []
    for token in placeholders:
        name = token[1:]
        pattern = re.compile(r"\$\s*" + re.escape(name) + r"\b", re.IGNORECASE)
        repaired = pattern.sub(token, text)
        if repaired != text:
            applied.append(f"rejoined {token}")
            text = repaired

    counts: dict[str, int] = {}
    for tok in tokenize(text):
        if tok.startswith("$"):
            counts[tok] = counts.get(tok, 0) + 1
    missing = tuple(t for t in placeholders if counts.get(t, 0) == 0)
    surplus = tuple(
        sorted(
            [t for t in counts if t not in placeholders]
            + [t for t in placeholders if counts.get(t, 0) > 1]
        )
    )
    return RepairResult(text=text, repairs=tuple(applied), missing=missing, surplus=surplus)


# --- builtin provider --------------------------------------------------------

def builtin_paraphrase(
    utterance: str | Sequence[str],
    seed: int,
    k: int,
    protected: Sequence[str] = (),
) -> list[str]:
    """Deterministic rewrites: synonym swaps, phrase fronting, tense and
    active/passive frame changes. Placeholder tokens, {slot} tokens and
    protected value phrases are never altered."""
    if k < 1:
        raise ValueError("k must be >= 1")
    tokens = utterance.split() if isinstance(utterance, str) else list(utterance)
    locked = _locked_positions(tokens, protected)

    swappable: list[tuple[int, tuple[str, ...]]] = []
    for i, tok in enumerate(tokens):
        if i in locked or tok.startswith("$") or tok.startswith("{"):
            continue
        mates = alternatives(tok)
        if mates:
            swappable.append((i, mates))

    pool: list[list[str]] = [list(tokens)]

    def add(candidate: list[str] | None):
        if candidate and candidate not in pool:
            pool.append(candidate)

    for i, mates in swappable:
        for mate in mates[:2]:
            swapped = list(tokens)
            swapped[i] = mate
            add(swapped)
    for depth in range(2, len(swappable) + 1):
        combo = list(tokens)
        for i, mates in swappable[:depth]:
            combo[i] = mates[0]
        add(combo)

    syntactic = [_front_phrase(tokens), _swap_tense(tokens), _swap_voice(tokens)]
    for variant in syntactic:
        add(variant)
        if variant and swappable:
            folded = list(variant)
            variant_locked = _locked_positions(folded, protected)
            for tok_index, tok in enumerate(folded):
                if tok_index in variant_locked or tok.startswith(("$", "{")):
                    continue
                mates = alternatives(tok)
                if mates:
                    folded[tok_index] = mates[0]
            add(folded)

    rng = random.Random(f"{seed}|{' '.join(tokens)}")
    order = list(range(len(pool)))
    rng.shuffle(order)
    return [" ".join(pool[i]) for i in order[:k]]


def _locked_positions(tokens: list[str], protected: Sequence[str]) -> set[int]:
    locked: set[int] = set()
    for phrase in protected:
        words = phrase.split()
        if not words:
            continue
        for start in range(len(tokens) - len(words) + 1):
            if tokens[start:start + len(words)] == words:
                locked.update(range(start, start + len(words)))
    return locked


def _front_phrase(tokens: list[str]) -> list[str] | None:
    """Move a trailing "in $loc" / "on $dat" / "near $pos" phrase to the front."""
    for i in range(len(tokens) - 1, 0, -1):
        if tokens[i].startswith("$") and tokens[i - 1] in ("in", "on", "near") and i > 1:
            rest = tokens[: i - 1] + tokens[i + 1:]
            return [tokens[i - 1], tokens[i], ","] + rest
    return None


def _swap_tense(tokens: list[str]) -> list[str] | None:
    for i in range(len(tokens) - 1):
        if tokens[i] == "have" and tokens[i + 1] == "been":
            return tokens[:i] + ["were"] + tokens[i + 2:]
    for i, tok in enumerate(tokens):
        if tok == "were":
            return tokens[:i] + ["have", "been"] + tokens[i + 1:]
    return None


def _swap_voice(tokens: list[str]) -> list[str] | None:
    """did X use to V ... <-> was used by X to V ... for whitelisted verbs."""
    for i, tok in enumerate(tokens):
        if tok == "did":
            for j in range(i + 1, min(i + 5, len(tokens))):
                if tokens[j] == "use" and j + 2 < len(tokens) and tokens[j + 1] == "to":
                    verb = tokens[j + 2]
                    if verb in PASSIVE_VERBS:
                        agent = tokens[i + 1:j]
                        return (
                            tokens[:i]
                            + ["was", "used", "by"] + agent + ["to", verb]
                            + tokens[j + 3:]
                        )
    for i, tok in enumerate(tokens):
        if tokens[i:i + 3] == ["was", "used", "by"]:
            for j in range(i + 3, min(i + 8, len(tokens))):
                if tokens[j] == "to" and j + 1 < len(tokens) and tokens[j + 1] in PASSIVE_VERBS:
                    agent = tokens[i + 3:j]
                    return (
                        tokens[:i]
                        + ["did"] + agent + ["use", "to", tokens[j + 1]]
                        + tokens[j + 2:]
                    )
    return None


# --- provider batch interface -------------------------------------------------

def paraphrase_batch(
    provider: ProviderSpec,
    pairs: Sequence[CanonicalPair],
    k: int = 1,
    seed: int = 0,
) -> list[list[ParaphraseCandidate]]:
    """One (possibly empty) candidate list per pair, order aligned.

    External transport failures never abort the job: the affected batch
    yields empty lists and the error is logged.
    """
    if provider.kind == "builtin":
        return [
            [
                _postprocess(pair, text, provider.name)
                for text in builtin_paraphrase(
                    pair.utterance, seed, k,
                    protected=[v for v in pair.bindings.values() if not v.startswith("$")],
                )
            ]
            for pair in pairs
        ]

    out: list[list[ParaphraseCandidate]] = [[] for _ in pairs]
    for start in range(0, len(pairs), provider.batch_size):
        chunk = list(enumerate(pairs))[start:start + provider.batch_size]
        lines = [
            json.dumps({"id": f"q{index}", "text": pair.utterance, "n": k})
            for index, pair in chunk
        ]
        try:
            responses = decode_response_lines(exchange_once(provider, lines))
        except TransportError as exc:
            logger.error("paraphrase batch failed (provider=%s): %s", provider.name, exc)
            continue
        by_id = {}
        for obj in responses:
            if "error" in obj:
                logger.error(
                    "provider %s error for id=%s: %s", provider.name,
                    obj.get("id"), obj["error"],
                )
                continue
            if "id" in obj and isinstance(obj.get("candidates"), list):
                by_id[obj["id"]] = [c for c in obj["candidates"] if isinstance(c, str)]
            else:
                logger.error("provider %s: malformed response %r", provider.name, obj)
        for index, pair in chunk:
            texts = by_id.get(f"q{index}", [])
            out[index] = [_postprocess(pair, text, provider.name) for text in texts]
    return out


def _postprocess(pair: CanonicalPair, text: str, provider: str) -> ParaphraseCandidate:
    repair = repair_variables(pair.utterance, text)
    invalid_reason = None
    if repair.missing:
        invalid_reason = "missing placeholder " + ", ".join(repair.missing)
    elif repair.surplus:
        invalid_reason = "unbalanced placeholder " + ", ".join(repair.surplus)
    return ParaphraseCandidate(
        source_pair_ref=pair.pair_id,
        text=repair.text,
        provider=provider,
        source_utterance=pair.utterance,
        repairs=repair.repairs,
        invalid_reason=invalid_reason,
        duplicate=_normalized(repair.text) == _normalized(pair.utterance),
    )


def _normalized(text: str) -> str:
    return " ".join(text.lower().split())


def run_providers(
    providers: Sequence[ProviderSpec],
    pairs: Sequence[CanonicalPair],
    k: int = 1,
    seed: int = 0,
) -> list[list[ParaphraseCandidate]]:
    """Fan out to all providers concurrently and merge per-pair candidate lists.

    Merge order follows the provider list, not completion order, so output is
    deterministic; candidates identical after case/whitespace normalization
    are merged keeping the first provider's attribution.
    """
    if not providers:
        return [[] for _ in pairs]
    with ThreadPoolExecutor(max_workers=len(providers)) as pool:
        futures = [
            pool.submit(paraphrase_batch, provider, pairs, k, seed)
            for provider in providers
        ]
        per_provider = [future.result() for future in futures]
    merged: list[list[ParaphraseCandidate]] = []
    for index in range(len(pairs)):
        seen: dict[str, ParaphraseCandidate] = {}
        for provider_lists in per_provider:
            for candidate in provider_lists[index]:
                key = _normalized(candidate.text)
                if key not in seen:
                    seen[key] = candidate
        merged.append(list(seen.values()))
    return merged


# --- provider conformance ------------------------------------------------------

DEFAULT_PROBES = (
    "how many container ship have been involved in robbery in $loc ?",
    "which weapon did pirates use to rob the oil tanker on $dat in $loc ?",
    "who attacked the bulk carrier near $pos ?",
)


def check_provider_conformance(
    provider: ProviderSpec, probes: Sequence[str] = DEFAULT_PROBES, n: int = 2
) -> list[str]:
    """Protocol checks for an external provider; an empty list means conformant."""
    violations: list[str] = []
    lines = [json.dumps({"id": f"p{i}", "text": t, "n": n}) for i, t in enumerate(probes)]

    def collect(tag: str) -> dict[str, list[str]] | None:
        try:
            responses = decode_response_lines(exchange_once(provider, lines))
        except TransportError as exc:
            violations.append(f"{tag}: transport failure: {exc}")
            return None
        answered: dict[str, list[str]] = {}
        for obj in responses:
            rid = obj.get("id")
            if "error" in obj:
                violations.append(f"{tag}: error object for id={rid}: {obj['error']}")
                continue
            if rid is None:
                violations.append(f"{tag}: response without id: {obj!r}")
                continue
            if rid in answered:
                violations.append(f"{tag}: duplicate response for id={rid}")
                continue
            candidates = obj.get("candidates")
            if not isinstance(candidates, list) or not all(
                isinstance(c, str) for c in candidates
            ):
                violations.append(f"{tag}: candidates for id={rid} is not a string list")
                continue
            answered[rid] = candidates
        for i in range(len(probes)):
            if f"p{i}" not in answered:
                violations.append(f"{tag}: request id=p{i} left unanswered")
        for rid in answered:
            if not rid.startswith("p") or rid not in {f"p{i}" for i in range(len(probes))}:
                violations.append(f"{tag}: unknown response id={rid}")
        return answered

    first = collect("batch 1")
    second = collect("batch 2")
    if first is not None and second is not None and first != second:
        violations.append("determinism: identical batches produced different candidates")

    # A malformed line must not take down the peer or eat valid requests.
    probe_lines = ['{"text": "missing id", "n": 1}',
                   json.dumps({"id": "alive", "text": probes[0], "n": 1})]
    try:
        responses = decode_response_lines(exchange_once(provider, probe_lines))
        if not any(obj.get("id") == "alive" and "candidates" in obj for obj in responses):
            violations.append("resilience: valid request after malformed line unanswered")
    except TransportError as exc:
        violations.append(f"resilience: transport failure after malformed line: {exc}")
    return violations
