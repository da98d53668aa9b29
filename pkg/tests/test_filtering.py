import json
import random

import pytest

from sqlbootstrap import (
    ParaphraseCandidate,
    TemplateParserBackend,
    TemplateParserConfig,
    parse_grammar,
    parse_lexicon,
    expand,
    render_filter_table,
    run_filter,
    verify_kept,
)
from sqlbootstrap.filtering import FilterInterrupted


def make_candidate(pair, text, provider="test", invalid_reason=None):
    return ParaphraseCandidate(
        source_pair_ref=pair.pair_id,
        text=text,
        provider=provider,
        source_utterance=pair.utterance,
        invalid_reason=invalid_reason,
        duplicate=(text == pair.utterance),
    )


@pytest.fixture(scope="module")
def chain_setup():
    """One-template grammar whose utterances have three independently
    swappable words, so keeps can chain across rounds at threshold 1."""
    lexicon = parse_lexicon('var victim : va.victim\n    "oil tanker"\n    "tugboat"\nabstract loc\n')
    grammar = parse_grammar(
        'Q -> "show the incidents reported about the" $victim "in" $loc "?" ||| '
        "SELECT va.incident_type FROM incidents AS va WHERE va.victim = {victim} "
        "AND va.location = $loc\n",
        lexicon,
    )
    pairs = list(expand(grammar, lexicon))
    return lexicon, pairs


def chain_candidates(pairs):
    candidates = []
    for pair in pairs:
        base = pair.utterance
        level1 = base.replace("show", "display")
        level2 = level1.replace("incidents", "events")
        level3 = level2.replace("reported", "recorded")
        for text in (level1, level2, level3):
            candidates.append(make_candidate(pair, text))
    return candidates


def test_identity_candidates_all_kept_round_one(toy_pairs, toy_lexicon):
    backend = TemplateParserBackend(toy_lexicon)
    candidates = [make_candidate(p, p.utterance) for p in toy_pairs]
    result = run_filter(toy_pairs, candidates, backend, rounds=3)
    assert result.reports[0].kept_this_round == len(candidates)
    assert result.reports[0].cumulative_fraction == 1.0
    assert all(c.round_kept == 1 for c in result.kept)


def test_shuffled_noise_kept_nothing_and_stops_early(toy_pairs, toy_lexicon):
    rng = random.Random(5)
    backend = TemplateParserBackend(toy_lexicon)
    candidates = []
    for pair in toy_pairs:
        words = pair.utterance.split()
        rng.shuffle(words)
        words = [w[::-1] for w in words]  # beyond any edit-distance threshold
        candidates.append(make_candidate(pair, " ".join(words)))
    result = run_filter(toy_pairs, candidates, backend, rounds=3)
    assert len(result.reports) == 1  # stopped after the zero-keep round
    assert result.reports[0].kept_this_round == 0
    assert result.kept == []


def test_chain_scenario_rises_across_three_rounds(chain_setup):
    lexicon, pairs = chain_setup
    backend = TemplateParserBackend(lexicon, TemplateParserConfig(fold_synonyms=False, theta=1))
    result = run_filter(pairs, chain_candidates(pairs), backend, rounds=3)
    assert [r.round for r in result.reports] == [1, 2, 3]
    assert all(r.kept_this_round > 0 for r in result.reports)
    fractions = [r.cumulative_fraction for r in result.reports]
    assert fractions == sorted(fractions)
    assert fractions[0] < fractions[1] < fractions[2] == 1.0
    by_round = {r.round: r.kept_this_round for r in result.reports}
    assert by_round == {1: len(pairs), 2: len(pairs), 3: len(pairs)}


def test_kept_sets_are_monotone(chain_setup):
    lexicon, pairs = chain_setup
    candidates = chain_candidates(pairs)

    def kept_texts(rounds):
        backend = TemplateParserBackend(lexicon, TemplateParserConfig(theta=1))
        return {c.text for c in run_filter(pairs, candidates, backend, rounds=rounds).kept}

    assert kept_texts(1) <= kept_texts(2) <= kept_texts(3)


def test_kept_candidates_reverify_post_hoc(chain_setup):
    lexicon, pairs = chain_setup
    backend = TemplateParserBackend(lexicon, TemplateParserConfig(theta=1))
    result = run_filter(pairs, chain_candidates(pairs), backend, rounds=3)
    assert result.kept
    assert verify_kept(result.kept, pairs, match="exact")


def test_no_order_match_mode(toy_pairs, toy_lexicon):
    backend = TemplateParserBackend(toy_lexicon)
    candidates = [make_candidate(p, p.utterance) for p in toy_pairs]
    result = run_filter(toy_pairs, candidates, backend, rounds=1, match="no_order")
    assert result.reports[0].cumulative_fraction == 1.0
    assert verify_kept(result.kept, toy_pairs, match="no_order")


def test_invalid_candidates_excluded_from_denominator(toy_pairs, toy_lexicon):
    backend = TemplateParserBackend(toy_lexicon)
    good = [make_candidate(p, p.utterance) for p in toy_pairs]
    bad = [
        make_candidate(p, p.utterance.replace("$loc", ""), invalid_reason="missing placeholder $loc")
        for p in toy_pairs
    ]
    result = run_filter(toy_pairs, good + bad, backend, rounds=1)
    assert result.invalid == len(bad)
    assert result.total_candidates == len(good)
    assert result.reports[0].cumulative_fraction == 1.0


def test_per_provider_breakdown(toy_pairs, toy_lexicon):
    backend = TemplateParserBackend(toy_lexicon)
    keepers = [make_candidate(p, p.utterance, provider="good") for p in toy_pairs]
    losers = [make_candidate(p, "gibberish tokens entirely", provider="bad") for p in toy_pairs]
    result = run_filter(toy_pairs, keepers + losers, backend, rounds=1)
    breakdown = result.reports[0].per_provider
    assert breakdown["good"]["fraction"] == 1.0
    assert breakdown["bad"]["fraction"] == 0.0
    assert breakdown["good"]["total"] == len(toy_pairs)
    table = render_filter_table(result.reports)
    assert "bad" in table and "good" in table and "Total" in table


def test_unknown_source_ref_rejected(toy_pairs, toy_lexicon):
    backend = TemplateParserBackend(toy_lexicon)
    stray = ParaphraseCandidate(source_pair_ref="nope", text="x", provider="p")
    with pytest.raises(ValueError, match="unknown source pair"):
        run_filter(toy_pairs, [stray], backend, rounds=1)


def test_reports_reproducible(chain_setup):
    lexicon, pairs = chain_setup
    candidates = chain_candidates(pairs)

    def snapshot():
        backend = TemplateParserBackend(lexicon, TemplateParserConfig(theta=1))
        result = run_filter(pairs, candidates, backend, rounds=3, seed=4)
        return json.dumps([r.to_dict() for r in result.reports], sort_keys=True)

    assert snapshot() == snapshot()


class FailingOnSecondTrain:
    name = "failing"

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def train(self, pairs, seed=0):
        self.calls += 1
        if self.calls == 2:
            raise RuntimeError("backend crashed")
        return self.inner.train(pairs, seed=seed)


def test_checkpoint_and_resume_after_backend_failure(chain_setup, tmp_path):
    lexicon, pairs = chain_setup
    candidates = chain_candidates(pairs)
    checkpoint = tmp_path / "filter_checkpoint.json"

    inner = TemplateParserBackend(lexicon, TemplateParserConfig(theta=1))
    flaky = FailingOnSecondTrain(inner)
    with pytest.raises(FilterInterrupted) as excinfo:
        run_filter(pairs, candidates, flaky, rounds=3, checkpoint_path=checkpoint)
    assert excinfo.value.round_number == 2
    assert checkpoint.exists()
    state = json.loads(checkpoint.read_text())
    assert state["rounds_done"] == 1

    resumed = run_filter(
        pairs, candidates, inner, rounds=3, checkpoint_path=checkpoint, resume=True
    )
    fresh = run_filter(pairs, candidates, inner, rounds=3)
    assert [r.to_dict() for r in resumed.reports] == [r.to_dict() for r in fresh.reports]
    assert {c.text for c in resumed.kept} == {c.text for c in fresh.kept}


def test_rounds_validation(toy_pairs, toy_lexicon):
    backend = TemplateParserBackend(toy_lexicon)
    with pytest.raises(ValueError):
        run_filter(toy_pairs, [], backend, rounds=0)
    with pytest.raises(ValueError):
        run_filter(toy_pairs, [], backend, rounds=1, match="fuzzy")
