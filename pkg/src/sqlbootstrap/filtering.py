"""Self-training paraphrase filter.

Round 1 trains the parser on the synthetic pairs alone; each round keeps the
not-yet-kept candidates whose predicted SQL matches their source SQL, folds
the keeps back into the training data, retrains, and repeats until the round
budget is spent or a round keeps nothing. Keeps are never re-evaluated, so
cumulative retention can only grow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

from .backend import ParserBackend
from .grammar import CanonicalPair
from .paraphrase import ParaphraseCandidate
from .sqlmodel import SqlParseError, SqlQuery, equal_exact, equal_no_order, parse_sql

DEFAULT_ROUNDS = 3  # retraining gets expensive; gains flatten after round two

MATCH_PREDICATES: dict[str, Callable[[SqlQuery, SqlQuery], bool]] = {
    "exact": equal_exact,
    "no_order": equal_no_order,
}


class FilterInterrupted(Exception):
    """Backend failure mid-run; a checkpoint holds the rounds finished so far."""

    def __init__(self, round_number: int, checkpoint: Path | None, cause: Exception):
        self.round_number = round_number
        self.checkpoint = checkpoint
        self.cause = cause
        where = f"; checkpoint at {checkpoint}" if checkpoint else ""
        super().__init__(f"backend failed in round {round_number}: {cause}{where}")


@dataclass(frozen=True)
class FilterRoundReport:
    round: int
    evaluated: int
    kept_this_round: int
    cumulative_kept: int
    cumulative_fraction: float
    per_provider: dict[str, dict[str, float]]

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "evaluated": self.evaluated,
            "kept_this_round": self.kept_this_round,
            "cumulative_kept": self.cumulative_kept,
            "cumulative_fraction": self.cumulative_fraction,
            "per_provider": {k: dict(v) for k, v in self.per_provider.items()},
        }


@dataclass
class FilterResult:
    kept: list[ParaphraseCandidate]
    reports: list[FilterRoundReport]
    invalid: int
    total_candidates: int  # valid candidates (the retention denominator)


def run_filter(
    synthetic: Sequence[CanonicalPair],
    candidates: Sequence[ParaphraseCandidate],
    backend: ParserBackend,
    rounds: int = DEFAULT_ROUNDS,
    match: str = "exact",
    seed: int = 0,
    checkpoint_path: str | Path | None = None,
    resume: bool = False,
) -> FilterResult:
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if match not in MATCH_PREDICATES:
        raise ValueError(f"match must be one of {sorted(MATCH_PREDICATES)}")
    predicate = MATCH_PREDICATES[match]

    pair_by_id = {pair.pair_id: pair for pair in synthetic}
    for candidate in candidates:
        if candidate.source_pair_ref not in pair_by_id:
            raise ValueError(
                f"candidate references unknown source pair {candidate.source_pair_ref!r}"
            )

    valid = [(i, c) for i, c in enumerate(candidates) if c.valid]
    invalid_count = len(candidates) - len(valid)
    total = len(valid)
    gold_cache: dict[str, SqlQuery] = {}

    def gold_query(pair: CanonicalPair) -> SqlQuery:
        if pair.pair_id not in gold_cache:
            gold_cache[pair.pair_id] = parse_sql(pair.sql)
        return gold_cache[pair.pair_id]

    kept: dict[int, ParaphraseCandidate] = {}
    start_round = 1
    checkpoint = Path(checkpoint_path) if checkpoint_path else None
    reports: list[FilterRoundReport] = []
    if resume and checkpoint and checkpoint.exists():
        state = json.loads(checkpoint.read_text(encoding="utf-8"))
        for index_str, payload in state["kept"].items():
            index = int(index_str)
            kept[index] = replace(
                candidates[index],
                round_kept=payload["round"],
                predicted_sql=payload["predicted_sql"],
            )
        reports = [FilterRoundReport(**r) for r in state["reports"]]
        start_round = state["rounds_done"] + 1

    def provider_breakdown() -> dict[str, dict[str, float]]:
        totals: dict[str, int] = {}
        kept_counts: dict[str, int] = {}
        for _, candidate in valid:
            totals[candidate.provider] = totals.get(candidate.provider, 0) + 1
        for candidate in kept.values():
            kept_counts[candidate.provider] = kept_counts.get(candidate.provider, 0) + 1
        return {
            provider: {
                "kept_cumulative": kept_counts.get(provider, 0),
                "total": n,
                "fraction": kept_counts.get(provider, 0) / n if n else 0.0,
            }
            for provider, n in sorted(totals.items())
        }

    for round_number in range(start_round, rounds + 1):
        training = [(pair.utterance, pair.sql) for pair in synthetic]
        training += [
            (c.text, pair_by_id[c.source_pair_ref].sql) for c in kept.values()
        ]
        pending = [(i, c) for i, c in valid if i not in kept]
        try:
            model = backend.train(training, seed=seed)
            kept_this_round = 0
            for index, candidate in pending:
                predicted = model.predict(candidate.text)
                if predicted is None:
                    continue
                try:
                    predicted_query = parse_sql(predicted)
                except SqlParseError:
                    continue
                if predicate(predicted_query, gold_query(pair_by_id[candidate.source_pair_ref])):
                    kept[index] = replace(
                        candidate, round_kept=round_number, predicted_sql=predicted
                    )
                    kept_this_round += 1
        except Exception as exc:  # backend failure: persist progress, then surface
            if checkpoint:
                _write_checkpoint(checkpoint, kept, reports, round_number - 1)
            raise FilterInterrupted(round_number, checkpoint, exc)

        reports.append(
            FilterRoundReport(
                round=round_number,
                evaluated=len(pending),
                kept_this_round=kept_this_round,
                cumulative_kept=len(kept),
                cumulative_fraction=len(kept) / total if total else 0.0,
                per_provider=provider_breakdown(),
            )
        )
        if checkpoint:
            _write_checkpoint(checkpoint, kept, reports, round_number)
        if kept_this_round == 0:
            break

    ordered = [kept[i] for i in sorted(kept)]
    return FilterResult(
        kept=ordered, reports=reports, invalid=invalid_count, total_candidates=total
    )


def _write_checkpoint(path: Path, kept, reports, rounds_done: int) -> None:
    state = {
        "rounds_done": rounds_done,
        "kept": {
            str(i): {"round": c.round_kept, "predicted_sql": c.predicted_sql}
            for i, c in kept.items()
        },
        "reports": [r.to_dict() for r in reports],
    }
    path.write_text(json.dumps(state, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def verify_kept(
    kept: Sequence[ParaphraseCandidate],
    synthetic: Sequence[CanonicalPair],
    match: str = "exact",
) -> bool:
    """Re-check, from outputs alone, that every keep satisfies the match predicate."""
    predicate = MATCH_PREDICATES[match]
    pair_by_id = {pair.pair_id: pair for pair in synthetic}
    for candidate in kept:
        if candidate.predicted_sql is None or candidate.round_kept is None:
            return False
        source = pair_by_id.get(candidate.source_pair_ref)
        if source is None:
            return False
        try:
            if not predicate(parse_sql(candidate.predicted_sql), parse_sql(source.sql)):
                return False
        except SqlParseError:
            return False
    return True


def render_filter_table(reports: Sequence[FilterRoundReport]) -> str:
    """Cumulative % kept per provider per round, as an aligned text table."""
    if not reports:
        return "(no filtering rounds ran)\n"
    providers = sorted(reports[-1].per_provider)
    header = ["#Rounds"] + providers + ["All"]
    rows = [header]
    for report in reports:
        row = [f"Round {report.round}"]
        for provider in providers:
            stats = report.per_provider.get(provider)
            row.append(f"{100 * stats['fraction']:.2f}" if stats else "-")
        row.append(f"{100 * report.cumulative_fraction:.2f}")
        rows.append(row)
    final = reports[-1]
    total_row = ["Total"]
    for provider in providers:
        stats = final.per_provider.get(provider)
        total_row.append(f"{100 * stats['fraction']:.2f}" if stats else "-")
    total_row.append(f"{100 * final.cumulative_fraction:.2f}")
    rows.append(total_row)

    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for index, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if index == 0 or index == len(rows) - 2:
            lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    return "\n".join(lines) + "\n"
