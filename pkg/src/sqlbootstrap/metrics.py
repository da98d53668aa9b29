"""Parser-evaluation metrics and paraphrase-diversity BLEU.

Evaluation scores predictions against gold SQL three ways: exact match on
normalized token sequences, exact match ignoring order inside each clause,
and component matching F1 (set-overlap F1 per clause kind, averaged over the
five kinds per example, then over examples). Unparseable predictions score
zero everywhere instead of aborting. Diversity is corpus BLEU-1..4 with
pooled modified n-gram precisions and no smoothing, scaled to 0..100.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .sqlmodel import COMPONENTS, SqlParseError, equal_exact, equal_no_order, parse_sql
from .tokenization import tokenize


@dataclass(frozen=True)
class EvalReport:
    exact_match_acc: float
    exact_match_no_order_acc: float
    component_f1: float
    per_component: dict[str, dict[str, float]]  # clause -> precision/recall/f1
    n: int

    def to_dict(self) -> dict:
        return {
            "exact_match_acc": self.exact_match_acc,
            "exact_match_no_order_acc": self.exact_match_no_order_acc,
            "component_f1": self.component_f1,
            "per_component": {k: dict(v) for k, v in self.per_component.items()},
            "n": self.n,
        }


@dataclass(frozen=True)
class DiversityReport:
    bleu: dict[int, float]  # n -> corpus score in [0, 100]

    def to_dict(self) -> dict:
        return {f"bleu_{n}": score for n, score in sorted(self.bleu.items())}


def _component_prf(predicted: frozenset[str], gold: frozenset[str]) -> tuple[float, float, float]:
    if not predicted and not gold:
        return 1.0, 1.0, 1.0
    overlap = len(predicted & gold)
    precision = overlap / len(predicted) if predicted else 0.0
    recall = overlap / len(gold) if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def evaluate(predictions: Sequence[str], gold: Sequence[str]) -> EvalReport:
    if len(predictions) != len(gold):
        raise ValueError(
            f"prediction/gold length mismatch: {len(predictions)} vs {len(gold)}"
        )
    if not gold:
        raise ValueError("evaluation set is empty")

    exact_hits = 0
    no_order_hits = 0
    example_f1_sum = 0.0
    component_sums = {c: {"precision": 0.0, "recall": 0.0, "f1": 0.0} for c in COMPONENTS}

    for row, (predicted_text, gold_text) in enumerate(zip(predictions, gold)):
        try:
            gold_query = parse_sql(gold_text)
        except SqlParseError as exc:
            raise ValueError(f"gold row {row}: {exc}")
        try:
            predicted_query = parse_sql(predicted_text)
        except SqlParseError:
            predicted_query = None  # malformed prediction: scores 0 on all metrics
        if predicted_query is None:
            continue
        if equal_exact(predicted_query, gold_query):
            exact_hits += 1
        if equal_no_order(predicted_query, gold_query):
            no_order_hits += 1
        f1_per_component = []
        for component in COMPONENTS:
            p, r, f1 = _component_prf(
                predicted_query.components[component], gold_query.components[component]
            )
            component_sums[component]["precision"] += p
            component_sums[component]["recall"] += r
            component_sums[component]["f1"] += f1
            f1_per_component.append(f1)
        example_f1_sum += sum(f1_per_component) / len(COMPONENTS)

    n = len(gold)
    return EvalReport(
        exact_match_acc=exact_hits / n,
        exact_match_no_order_acc=no_order_hits / n,
        component_f1=example_f1_sum / n,
        per_component={
            component: {metric: value / n for metric, value in sums.items()}
            for component, sums in component_sums.items()
        },
        n=n,
    )


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(candidates: Sequence[str], references: Sequence[str], n: int) -> float:
    """Corpus-level BLEU-n (pooled clipped precisions, brevity penalty, x100).

    No smoothing: a zero k-gram precision for any k <= n zeroes the score.
    """
    if not 1 <= n <= 4:
        raise ValueError("n must be in 1..4")
    if len(candidates) != len(references):
        raise ValueError("candidate/reference length mismatch")
    if not candidates:
        raise ValueError("empty corpus")

    candidate_tokens = [tokenize(text) for text in candidates]
    reference_tokens = [tokenize(text) for text in references]
    candidate_length = sum(len(t) for t in candidate_tokens)
    reference_length = sum(len(t) for t in reference_tokens)
    if candidate_length == 0:
        return 0.0

    log_precision_sum = 0.0
    for k in range(1, n + 1):
        matched = 0
        total = 0
        for cand, ref in zip(candidate_tokens, reference_tokens):
            cand_counts = _ngrams(cand, k)
            ref_counts = _ngrams(ref, k)
            total += sum(cand_counts.values())
            matched += sum(
                min(count, ref_counts[gram]) for gram, count in cand_counts.items()
            )
        if matched == 0 or total == 0:
            return 0.0
        log_precision_sum += math.log(matched / total) / n

    brevity = 1.0
    if candidate_length < reference_length:
        brevity = math.exp(1.0 - reference_length / candidate_length)
    return 100.0 * brevity * math.exp(log_precision_sum)


def diversity_report(candidates: Sequence[str], references: Sequence[str]) -> DiversityReport:
    return DiversityReport(
        bleu={n: corpus_bleu(candidates, references, n) for n in (1, 2, 3, 4)}
    )


def render_eval_table(report: EvalReport) -> str:
    lines = [
        f"{'Exact match (acc)':<28}{report.exact_match_acc:.4f}",
        f"{'Exact match no order (acc)':<28}{report.exact_match_no_order_acc:.4f}",
        f"{'Compo_match (F1)':<28}{report.component_f1:.4f}",
        f"{'n':<28}{report.n}",
        "",
        f"{'component':<12}{'P':>8}{'R':>8}{'F1':>8}",
    ]
    for component in COMPONENTS:
        stats = report.per_component[component]
        lines.append(
            f"{component:<12}{stats['precision']:>8.4f}{stats['recall']:>8.4f}{stats['f1']:>8.4f}"
        )
    return "\n".join(lines) + "\n"


def render_diversity_table(reports: dict[str, DiversityReport]) -> str:
    """Rows BLEU-1..4, one column per provider."""
    providers = sorted(reports)
    header = ["Metrics"] + providers
    rows = [header]
    for n in (1, 2, 3, 4):
        rows.append([f"BLEU-{n}"] + [f"{reports[p].bleu[n]:.2f}" for p in providers])
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for index, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if index == 0:
            lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    return "\n".join(lines) + "\n"
