import sys
from pathlib import Path

import pytest

from sqlbootstrap import (
    BackendError,
    RemoteBackend,
    TemplateParserBackend,
    TemplateParserConfig,
    builtin_paraphrase,
    check_backend_conformance,
    equal_exact,
    parse_sql,
    train_template_parser,
)
from sqlbootstrap.backend import ValueAnonymizer, predict
from sqlbootstrap.wire import ProviderSpec

PROVIDERS_DIR = Path(__file__).parent / "providers"


def backend_spec(script: str) -> ProviderSpec:
    return ProviderSpec(
        name=script, kind="subprocess", endpoint=f"{sys.executable} {PROVIDERS_DIR / script}"
    )


def as_dataset(pairs):
    return [(p.utterance, p.sql) for p in pairs]


def test_anonymization_collapses_toy_expansion_to_one_key(toy_pairs, toy_lexicon):
    model = train_template_parser(as_dataset(toy_pairs), toy_lexicon)
    assert len(model.index) == 1
    assert model.conflicts == 0
    assert model.trained_on == 6


def test_empty_dataset_rejected(toy_lexicon):
    with pytest.raises(BackendError, match="empty"):
        train_template_parser([], toy_lexicon)


def test_unparseable_training_sql_names_row(toy_lexicon):
    pairs = [("a question ?", "SELECT va.x FROM t AS va"), ("bad ?", "DELETE FROM t")]
    with pytest.raises(BackendError, match="row 1"):
        train_template_parser(pairs, toy_lexicon)


def test_conflicting_sql_keeps_first_and_counts(toy_lexicon):
    pairs = [
        ("ships in $loc ?", "SELECT va.a FROM t AS va WHERE va.location = $loc"),
        ("ships in $loc ?", "SELECT va.b FROM t AS va WHERE va.location = $loc"),
    ]
    model = train_template_parser(pairs, toy_lexicon)
    assert model.conflicts == 1
    assert model.predict("ships in $loc ?") == "SELECT va.a FROM t AS va WHERE va.location = $loc"


def test_training_set_consistency(toy_pairs, toy_lexicon):
    model = train_template_parser(as_dataset(toy_pairs), toy_lexicon)
    for utterance, sql in as_dataset(toy_pairs):
        assert model.predict(utterance) == sql


def test_maritime_training_set_consistency(maritime_pairs, maritime_lexicon):
    model = train_template_parser(as_dataset(maritime_pairs), maritime_lexicon)
    for utterance, sql in as_dataset(maritime_pairs)[::17]:
        prediction = model.predict(utterance)
        assert prediction is not None
        assert equal_exact(parse_sql(prediction), parse_sql(sql))


def test_unrelated_utterance_abstains(toy_pairs, toy_lexicon):
    model = train_template_parser(as_dataset(toy_pairs), toy_lexicon)
    assert model.predict("hello world") is None
    assert predict(model, "hello world") is None


def test_synonym_fold_maps_steal_to_rob_template(maritime_pairs, maritime_lexicon):
    folding = TemplateParserConfig(fold_synonyms=True)
    model = train_template_parser(as_dataset(maritime_pairs), maritime_lexicon, folding)
    source = next(p for p in maritime_pairs if " rob " in p.utterance)
    paraphrased = source.utterance.replace(" rob ", " steal ")
    assert model.predict(paraphrased) == source.sql


def test_near_miss_within_threshold_rebinds_values(maritime_pairs, maritime_lexicon):
    model = train_template_parser(as_dataset(maritime_pairs), maritime_lexicon)
    source = next(p for p in maritime_pairs if p.utterance.startswith("how many incidents of"))
    # one token swapped: edit distance 1, well inside ceil(0.25 * len)
    paraphrased = source.utterance.replace("were reported", "were recorded")
    assert model.predict(paraphrased) == source.sql


def test_semantic_preservation_of_builtin_rewrites(toy_pairs, toy_lexicon):
    # generous threshold + single template: every rewrite must land on the source SQL
    config = TemplateParserConfig(theta=8)
    model = train_template_parser(as_dataset(toy_pairs), toy_lexicon, config)
    for pair in toy_pairs:
        protected = [v for v in pair.bindings.values() if not v.startswith("$")]
        for text in builtin_paraphrase(pair.utterance, 3, 50, protected=protected):
            assert model.predict(text) == pair.sql


def test_rebinding_requires_captured_values(toy_pairs, toy_lexicon):
    model = train_template_parser(as_dataset(toy_pairs), toy_lexicon)
    # drop the victim value: the template needs {victim}, nothing captured
    assert model.predict("how many have been robbery in $loc ?") is None


def test_prediction_deterministic(maritime_pairs, maritime_lexicon):
    model = train_template_parser(as_dataset(maritime_pairs), maritime_lexicon)
    probe = "which gun did pirates use to steal the oil tanker on $dat in $loc ?"
    assert model.predict(probe) == model.predict(probe)


def test_anonymizer_longest_match(maritime_lexicon):
    anonymizer = ValueAnonymizer(maritime_lexicon)
    key, captured = anonymizer.anonymize(
        "who attacked the offshore supply vessel near $pos ?"
    )
    assert "{victim}" in key
    assert captured == {"victim": "offshore supply vessel"}


def test_builtin_backend_passes_conformance(maritime_lexicon):
    backend = TemplateParserBackend(maritime_lexicon)
    assert check_backend_conformance(backend) == []


def test_remote_backend_memorizes_and_abstains(toy_pairs):
    backend = RemoteBackend(backend_spec("mini_backend.py"))
    try:
        model = backend.train(as_dataset(toy_pairs), seed=0)
        for utterance, sql in as_dataset(toy_pairs):
            assert model.predict(utterance) == sql
        assert model.predict("unseen question ?") is None
    finally:
        backend.close()


def test_remote_backend_passes_conformance():
    backend = RemoteBackend(backend_spec("mini_backend.py"))
    try:
        assert check_backend_conformance(backend) == []
    finally:
        backend.close()


def test_flaky_backend_fails_conformance():
    backend = RemoteBackend(backend_spec("flaky_backend.py"))
    try:
        violations = check_backend_conformance(backend)
    finally:
        backend.close()
    assert violations
    assert any("deterministic" in v or "reproducible" in v for v in violations)


def test_threshold_configuration():
    assert TemplateParserConfig().threshold(11) == 3
    assert TemplateParserConfig(theta=1).threshold(100) == 1
    assert TemplateParserConfig(theta_factor=0.5).threshold(10) == 5
