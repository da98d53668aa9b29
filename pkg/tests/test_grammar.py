import json

import pytest
from hypothesis import given, settings, strategies as st

from oracles import oracle_count, oracle_expand
from randgrammars import random_grammar
from sqlbootstrap import (
    GrammarError,
    abstract_template,
    count_expansions,
    expand,
    parse_grammar,
)
from sqlbootstrap.datasets import read_pairs, write_pairs


def test_single_rule_grammar_loads(toy_grammar):
    assert len(toy_grammar.rules) == 1
    assert toy_grammar.start == "Q"
    assert toy_grammar.rules[0].rule_id == "r000"


def test_unknown_variable_rejected(toy_lexicon):
    with pytest.raises(GrammarError, match="unknown variable 'nope'"):
        parse_grammar('Q -> "x" $nope ||| k {nope}\n', toy_lexicon)


def test_unknown_nonterminal_rejected(toy_lexicon):
    with pytest.raises(GrammarError, match="unknown nonterminal 'MISSING'"):
        parse_grammar('Q -> "x" MISSING ||| k MISSING\n', toy_lexicon)


def test_variable_on_one_side_only_is_asymmetric(toy_lexicon):
    with pytest.raises(GrammarError, match="asymmetric slot multisets"):
        parse_grammar('Q -> "how many" "?" ||| SELECT k WHERE a = {victim}\n', toy_lexicon)


def test_cycle_detected_and_named(toy_lexicon):
    text = 'A -> "a" B ||| ka B\nB -> "b" A ||| kb A\n'
    with pytest.raises(GrammarError, match="cycle detected: A -> B -> A"):
        parse_grammar(text, toy_lexicon)


def test_repeated_variable_on_one_side_rejected(toy_lexicon):
    with pytest.raises(GrammarError, match="more than once"):
        parse_grammar('Q -> "x" $victim $victim ||| k {victim} {victim}\n', toy_lexicon)


def test_concrete_variable_must_use_braces_in_sql(toy_lexicon):
    with pytest.raises(GrammarError, match="written {victim}"):
        parse_grammar('Q -> "x" $victim ||| k $victim\n', toy_lexicon)


def test_abstract_variable_must_use_dollar_in_sql(toy_lexicon):
    with pytest.raises(GrammarError, match=r"written \$loc"):
        parse_grammar('Q -> "x" $loc ||| k {loc}\n', toy_lexicon)


def test_unquoted_utterance_literal_rejected(toy_lexicon):
    with pytest.raises(GrammarError, match="unquoted"):
        parse_grammar("Q -> how many ||| k\n", toy_lexicon)


def test_toy_expansion_count_is_product(toy_pairs, toy_grammar, toy_lexicon):
    # brute-force value: 3 victims x 2 incidents x 1 (abstract) = 6
    assert len(toy_pairs) == 6
    assert count_expansions(toy_grammar, toy_lexicon) == 6
    assert sorted(p.utterance for p in toy_pairs) == sorted(
        u for u, _ in oracle_expand(toy_grammar, toy_lexicon)
    )


def test_constant_rule_yields_one_pair(toy_lexicon):
    grammar = parse_grammar('Q -> "hello" "?" ||| SELECT k\n', toy_lexicon)
    pairs = list(expand(grammar, toy_lexicon))
    assert len(pairs) == 1
    assert count_expansions(grammar, toy_lexicon) == 1
    assert pairs[0].utterance == "hello ?"
    assert pairs[0].bindings == {}


def test_abstract_tokens_survive_in_both_sides(toy_pairs):
    for pair in toy_pairs:
        assert "$loc" in pair.utterance.split()
        assert "$loc" in pair.sql.split()
        assert pair.bindings["loc"] == "$loc"


def test_template_substitution_reproduces_pair(toy_pairs):
    for pair in toy_pairs:
        utterance = pair.template_id
        sql = pair.sql_template
        for var, value in pair.bindings.items():
            if not value.startswith("$"):
                utterance = utterance.replace("{%s}" % var, value)
                sql = sql.replace("{%s}" % var, value)
        assert utterance == pair.utterance
        assert sql == pair.sql


def test_abstract_template_examples(toy_pairs):
    pair = next(
        p
        for p in toy_pairs
        if p.bindings.get("victim") == "oil tanker" and p.bindings.get("incident") == "robbery"
    )
    assert pair.utterance == "how many oil tanker have been robbery in $loc ?"
    assert abstract_template(pair) == "how many {victim} have been {incident} in $loc ?"


def test_same_trace_same_template_across_values(toy_pairs):
    templates = {p.template_id for p in toy_pairs}
    assert templates == {"how many {victim} have been {incident} in $loc ?"}


def test_template_with_only_abstract_vars_equals_utterance(toy_lexicon):
    grammar = parse_grammar('Q -> "ships in" $loc "?" ||| k $loc\n', toy_lexicon)
    (pair,) = expand(grammar, toy_lexicon)
    assert abstract_template(pair) == pair.utterance


def test_expansion_deterministic(toy_grammar, toy_lexicon):
    first = [p.to_dict() for p in expand(toy_grammar, toy_lexicon)]
    second = [p.to_dict() for p in expand(toy_grammar, toy_lexicon)]
    assert json.dumps(first) == json.dumps(second)


def test_multi_rule_trace_order_and_sharing(toy_lexicon):
    text = (
        'Q -> "count" $victim W "?" ||| SELECT COUNT(*) WHERE v = {victim} AND W\n'
        'W -> "in" $loc ||| l = $loc\n'
        'W -> "of" $incident ||| i = {incident}\n'
    )
    grammar = parse_grammar(text, toy_lexicon)
    pairs = list(expand(grammar, toy_lexicon))
    # victim(3) x [loc(1) + incident(2)] = 9
    assert len(pairs) == 9 == count_expansions(grammar, toy_lexicon)
    assert pairs[0].rule_trace == ("r000", "r001")
    traces = [p.rule_trace for p in pairs]
    assert traces == sorted(traces)


def test_shared_variable_across_subtrees_binds_once(toy_lexicon):
    text = (
        'Q -> A B ||| A B\n'
        'A -> "a" $victim ||| ka {victim}\n'
        'B -> "b" $victim ||| kb {victim}\n'
    )
    grammar = parse_grammar(text, toy_lexicon)
    pairs = list(expand(grammar, toy_lexicon))
    assert len(pairs) == 3 == count_expansions(grammar, toy_lexicon)
    for pair in pairs:
        words = pair.utterance.split()
        assert words.count(pair.bindings["victim"].split()[0]) >= 1
        # both occurrences agree on the single binding
        assert pair.utterance == f'a {pair.bindings["victim"]} b {pair.bindings["victim"]}'


def test_pairs_jsonl_round_trip(tmp_path, toy_pairs):
    path = tmp_path / "pairs.jsonl"
    write_pairs(path, toy_pairs)
    loaded = read_pairs(path)
    assert loaded == toy_pairs
    assert [p.pair_id for p in loaded] == [p.pair_id for p in toy_pairs]


def test_maritime_sample_grammar_counts(maritime_grammar, maritime_lexicon, maritime_pairs):
    assert len(maritime_grammar.rules) == 31
    total = count_expansions(maritime_grammar, maritime_lexicon)
    assert len(maritime_pairs) == total
    # independent counting pass over derivations
    assert oracle_count(maritime_grammar, maritime_lexicon) == total
    assert len({(p.utterance, p.sql) for p in maritime_pairs}) == total


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_random_grammar_expansion_matches_oracle(seed):
    lexicon, grammar, _, _ = random_grammar(seed)
    pairs = list(expand(grammar, lexicon))
    assert len(pairs) == count_expansions(grammar, lexicon)
    oracle = oracle_expand(grammar, lexicon)
    assert sorted((p.utterance, p.sql) for p in pairs) == sorted(oracle)
    assert len({(p.utterance, p.sql) for p in pairs}) == len(pairs)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_random_grammar_synchronicity(seed):
    lexicon, grammar, _, _ = random_grammar(seed)
    for pair in expand(grammar, lexicon):
        for var, value in pair.bindings.items():
            if value.startswith("$"):
                assert value in pair.utterance.split()
                assert value in pair.sql.split()
            else:
                assert value in pair.utterance
                assert f'"{value}"' in pair.sql
