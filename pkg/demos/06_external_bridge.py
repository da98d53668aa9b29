#!/usr/bin/env python3
"""Plugging external components in over the wire protocols.

Any process that answers newline-delimited JSON can act as a paraphrase
provider or a parser backend; the bridge package (bridge/) ships offline
reference models. This demo uses the bridge's rule-noise paraphraser and its
memorizing parser next to the builtin components, after checking both with
the conformance suites. Requires `pip install -e ./bridge`.
"""

import shutil
import sys
from importlib import resources

from sqlbootstrap import (
    RemoteBackend,
    check_backend_conformance,
    check_provider_conformance,
    expand,
    load_grammar,
    load_lexicon,
    run_filter,
    run_providers,
    sample_uat,
)
from sqlbootstrap.wire import ProviderSpec

if shutil.which("sqlbridge") is None:
    sys.exit("sqlbridge is not installed; run: pip install -e ./bridge")

data = resources.files("sqlbootstrap") / "data"
lexicon = load_lexicon(data / "maritime.lexicon")
grammar = load_grammar(data / "maritime.grammar", lexicon)
pairs = list(expand(grammar, lexicon))

noise_provider = ProviderSpec(
    name="bridge-noise", kind="subprocess",
    endpoint="sqlbridge --mode paraphrase --model rule-noise --seed 7",
)
violations = check_provider_conformance(noise_provider)
print(f"provider conformance violations: {len(violations)}")

backend = RemoteBackend(ProviderSpec(
    name="bridge-parser", kind="subprocess",
    endpoint="sqlbridge --mode parser --model memorize",
))
print(f"backend conformance violations: {len(check_backend_conformance(backend))}")

sampled = sample_uat(pairs, 0.05, seed=7)
candidates = [c for g in run_providers([noise_provider], sampled, k=2, seed=7) for c in g]
valid = sum(c.valid for c in candidates)
print(f"\nrule-noise produced {len(candidates)} candidates "
      f"({valid} valid after placeholder repair)")

# An exact-match parser keeps only undamaged rewrites: noisy output gets the
# low retention it deserves.
result = run_filter(pairs, candidates, backend, rounds=2, match="exact", seed=7)
for report in result.reports:
    print(f"round {report.round}: kept {report.kept_this_round} "
          f"({report.cumulative_fraction:.1%} cumulative)")
backend.close()
