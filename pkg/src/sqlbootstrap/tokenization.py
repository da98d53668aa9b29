"""Shared utterance tokenizer and token-level edit distance.

All natural-language text in the toolkit is compared at the token level:
lowercased, whitespace-split, punctuation detached. Placeholder tokens
($loc, $dat, ...) and slot tokens ({victim}, ...) survive as single tokens.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"\$\w+|\{\w+\}|[\w']+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word/punctuation tokens, keeping $- and {}-tokens whole."""
    return _TOKEN_RE.findall(text.lower())


def detokenize(tokens: list[str]) -> str:
    return " ".join(tokens)


def edit_distance(a: list[str], b: list[str], cutoff: int | None = None) -> int:
    """Levenshtein distance between token sequences.

    With a cutoff, returns cutoff + 1 as soon as the distance provably
    exceeds it (band pruning keeps nearest-key search cheap).
    """
    if a == b:
        return 0
    if cutoff is not None and abs(len(a) - len(b)) > cutoff:
        return cutoff + 1
    prev = list(range(len(b) + 1))
    for i, tok_a in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        best = cur[0]
        for j, tok_b in enumerate(b, start=1):
            cost = 0 if tok_a == tok_b else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            best = min(best, cur[j])
        if cutoff is not None and best > cutoff:
            return cutoff + 1
        prev = cur
    return prev[-1]
