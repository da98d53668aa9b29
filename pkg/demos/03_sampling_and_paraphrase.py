#!/usr/bin/env python3
"""Template-uniform sampling, then paraphrase generation with repair.

Sampling spreads a budget round-robin across abstract templates so every
logical-form structure stays represented. The builtin paraphraser then
rewrites the sampled utterances (synonyms, fronting, tense, voice) without
ever touching placeholder tokens or bound lexicon values; candidates that
come back from any provider are repaired ("$ LOC" -> "$loc") or marked
invalid when a placeholder went missing.
"""

from importlib import resources

from sqlbootstrap import (
    builtin_paraphrase,
    expand,
    load_grammar,
    load_lexicon,
    repair_variables,
    run_providers,
    sample_uat,
    sampling_report,
)
from sqlbootstrap.metrics import diversity_report, render_diversity_table
from sqlbootstrap.wire import ProviderSpec

data = resources.files("sqlbootstrap") / "data"
lexicon = load_lexicon(data / "maritime.lexicon")
grammar = load_grammar(data / "maritime.grammar", lexicon)
pairs = list(expand(grammar, lexicon))

sampled = sample_uat(pairs, 0.1, seed=11)
report = sampling_report(sampled, population=len(pairs))
print(f"sampled {report.selected}/{report.population} pairs "
      f"across {report.template_count} templates")
print(f"abstract-variable fraction in the sample: {report.abstract_fraction:.1%}")
spreads = sorted(set(report.per_template.values()))
print(f"per-template allocation sizes: {spreads} (never differ by more than 1)\n")

source = "which weapon did pirates use to rob the offshore supply vessel on $dat in $loc ?"
print("source:", source)
print("builtin rewrites:")
for text in builtin_paraphrase(source, seed=3, k=6,
                               protected=["pirates", "offshore supply vessel"]):
    print("  -", text)

# Back-translation-style damage gets repaired; lost placeholders are fatal.
mangled = "what weapon did the pirates use in $ DAT at $Loc ?"
repair = repair_variables(source, mangled)
print(f"\nmangled:  {mangled}")
print(f"repaired: {repair.text}   (applied: {', '.join(repair.repairs)})")

dropped = "what weapon did the pirates use that day ?"
print(f"\ndropped:  {dropped}")
print(f"verdict:  invalid, missing {repair_variables(source, dropped).missing}")

# Provider fan-out: candidate lists stay order-aligned with their sources and
# duplicates across providers merge, keeping the first provider's attribution.
provider = ProviderSpec(name="builtin", kind="builtin")
groups = run_providers([provider], sampled[:50], k=2, seed=11)
candidates = [c for group in groups for c in group]
valid = [c for c in candidates if c.valid]
print(f"\n{len(candidates)} candidates from {len(sampled[:50])} sources; "
      f"{len(valid)} valid, {sum(c.duplicate for c in candidates)} duplicates")

diversity = diversity_report([c.text for c in valid],
                             [c.source_utterance for c in valid])
print("\ndiversity of the builtin paraphrases (lower BLEU = more diverse):")
print(render_diversity_table({"builtin": diversity}))
