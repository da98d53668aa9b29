"""Budgeted, template-uniform selection of canonical pairs.

Pairs are grouped by their abstract template and the budget is spread
round-robin across templates, so the selected set covers logical-form
structures as evenly as the populations allow.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .grammar import CanonicalPair


@dataclass(frozen=True)
class SamplingReport:
    population: int
    selected: int
    template_count: int
    per_template: dict[str, int]
    abstract_fraction: float  # share of selected pairs with >=1 abstract variable

    def to_dict(self) -> dict:
        return {
            "population": self.population,
            "selected": self.selected,
            "template_count": self.template_count,
            "per_template": dict(self.per_template),
            "abstract_fraction": self.abstract_fraction,
        }


def resolve_budget(budget: float | int, population: int) -> int:
    """Absolute sample size for a fractional or absolute budget."""
    if population <= 0:
        raise ValueError("cannot sample from an empty population")
    if isinstance(budget, float) and not budget.is_integer():
        if not 0.0 < budget <= 1.0:
            raise ValueError(f"fractional budget must be in (0, 1], got {budget}")
        return math.ceil(budget * population)
    size = int(budget)
    if isinstance(budget, float) and budget == 1.0:
        # 1.0 reads as "everything", matching the fraction semantics.
        return population
    if size <= 0:
        raise ValueError(f"budget must be positive, got {budget}")
    if size > population:
        raise ValueError(f"budget {size} exceeds population {population}")
    return size


def sample_uat(
    pairs: Iterable[CanonicalPair], budget: float | int, seed: int
) -> list[CanonicalPair]:
    """Select `budget` pairs spread uniformly across abstract templates.

    Allocation is round-robin over templates (sorted by template id), one
    slot at a time, skipping exhausted templates; within a template, choices
    are a seeded shuffle prefix, so a larger budget selects a superset of a
    smaller one under the same seed. Deterministic for a fixed seed; the
    seed only permutes within-template choices.
    """
    materialized = list(pairs)
    size = resolve_budget(budget, len(materialized))

    by_template: dict[str, list[int]] = {}
    for index, pair in enumerate(materialized):
        by_template.setdefault(pair.template_id, []).append(index)

    shuffled: dict[str, list[int]] = {}
    for template_id, indices in by_template.items():
        rng = random.Random(f"{seed}|{template_id}")
        order = list(indices)
        rng.shuffle(order)
        shuffled[template_id] = order

    allocation = {template_id: 0 for template_id in sorted(by_template)}
    remaining = size
    while remaining > 0:
        progressed = False
        for template_id in allocation:
            if remaining == 0:
                break
            if allocation[template_id] < len(by_template[template_id]):
                allocation[template_id] += 1
                remaining -= 1
                progressed = True
        if not progressed:  # unreachable: size <= population
            break

    chosen: set[int] = set()
    for template_id, count in allocation.items():
        chosen.update(shuffled[template_id][:count])
    return [materialized[i] for i in sorted(chosen)]


def sampling_report(
    selected: Sequence[CanonicalPair], population: int | None = None
) -> SamplingReport:
    per_template: dict[str, int] = {}
    with_abstract = 0
    for pair in selected:
        per_template[pair.template_id] = per_template.get(pair.template_id, 0) + 1
        if pair.abstract_vars:
            with_abstract += 1
    n = len(selected)
    return SamplingReport(
        population=population if population is not None else n,
        selected=n,
        template_count=len(per_template),
        per_template=dict(sorted(per_template.items())),
        abstract_fraction=(with_abstract / n) if n else 0.0,
    )
